#include "carleman/rng.hpp"

#include <cmath>
#include <numbers>

#include "carleman/errors.hpp"

namespace carleman::fields {

PhiloxBlock philox4x32(PhiloxBlock c, std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < kPhiloxRounds; ++r) {
    if (r > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ key[0], lo1, hi0 ^ c[3] ^ key[1], lo0};
  }
  return c;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

std::uint64_t RandomStream::next_u64() {
  if (buffered_ == 0) {
    const PhiloxBlock out = philox4x32(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    ++block_;
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
  }
  return buffer_[static_cast<std::size_t>(2 - buffered_--)];
}

double RandomStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double BrownianPath::quadratic_variation() const {
  double qv = 0.0;
  for (double dw : increments) qv += dw * dw;
  return qv;
}

BrownianPath sample_brownian(std::uint64_t seed, double dt, double t_max, std::uint64_t stream) {
  if (!(dt > 0) || !(t_max > 0)) throw ConfigError("sample_brownian: dt and t_max must be positive");
  const double ratio = t_max / dt;
  const double steps = std::round(ratio);
  if (steps < 1 || std::abs(ratio - steps) > 1e-9 * steps)
    throw ConfigError("sample_brownian: dt must divide t_max");
  BrownianPath path;
  path.seed = seed;
  path.stream = stream;
  path.dt = dt;
  path.increments.resize(static_cast<std::size_t>(steps));
  RandomStream rs(seed, stream);
  const double scale = std::sqrt(dt);
  for (auto& dw : path.increments) dw = scale * rs.normal();
  return path;
}

}  // namespace carleman::fields
