#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace carleman::fields {

// ---------------------------------------------------------------------------
// Random numbers.
//
// Generator: Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3", SC'11). Block b of stream s under key `seed` is
// philox(counter = {lo32(b), hi32(b), lo32(s), hi32(s)}, key = {lo32(seed),
// hi32(seed)}); the four output words form two 64-bit draws
// (w1 << 32 | w0), (w3 << 32 | w2).
//
// Uniforms: u = ((draw >> 11) + 0.5) * 2^-53, strictly inside (0, 1).
// Normals: Box-Muller on consecutive uniform pairs (u1, u2):
//   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2),
// returned in the order z0, z1.
//
// The integer stream is bit-identical everywhere; normals additionally
// depend on the platform libm agreeing on log/cos/sin to the last ulp.
// ---------------------------------------------------------------------------
inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
inline constexpr int kPhiloxRounds = 10;

using PhiloxBlock = std::array<std::uint32_t, 4>;

PhiloxBlock philox4x32(PhiloxBlock counter, std::array<std::uint32_t, 2> key);

/// Sequential view of one Philox stream.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// One realization of a standard Brownian motion on a uniform time grid.
struct BrownianPath {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double dt = 0.0;
  std::vector<double> increments;  // increment k ~ N(0, dt)

  std::size_t steps() const { return increments.size(); }
  double quadratic_variation() const;
};

/// Requires t_max / dt to be an integer (relative tolerance 1e-9).
BrownianPath sample_brownian(std::uint64_t seed, double dt, double t_max, std::uint64_t stream = 0);

}  // namespace carleman::fields
