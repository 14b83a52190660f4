#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "carleman/errors.hpp"
#include "carleman/lab.hpp"

using namespace carleman;
using namespace carleman::lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("carleman_lab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string config(const std::string& name) { return std::string(CARLEMAN_CONFIG_DIR) + "/" + name; }

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CARLEMAN_LAB_EXE + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

// Drops the trailing wall_time_s column from every CSV line.
std::string without_wall_time(const std::string& csv) {
  std::string out;
  for (const auto& l : lines(csv)) out += l.substr(0, l.rfind(',')) + "\n";
  return out;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(4097.0) == "4097");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  for (double v : {1.0 / 3.0, std::exp(1.0), 1e-17, 123456789.123456789}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv layout") {
  ResultTable t;
  t.columns = {"name", "value"};
  t.config_hash = "00000000000000ff";
  t.wall_time_s = 0.5;
  CHECK(to_csv(t) == "name,value,config_hash,artifact_version,wall_time_s\n");

  t.add({std::string("a,b"), 1.0});
  t.add({std::string("say \"hi\""), 0.25});
  const auto ls = lines(to_csv(t));
  REQUIRE(ls.size() == 3);
  CHECK(ls[1] == "\"a,b\",1,00000000000000ff,1.0.0,0.5");
  CHECK(ls[2] == "\"say \"\"hi\"\"\",0.25,00000000000000ff,1.0.0,0.5");
  CHECK(to_csv(t).find('\r') == std::string::npos);

  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  emit_csv(t, (dir / "t.csv").string());
  CHECK(slurp(dir / "t.csv") == to_csv(t));
  CHECK_THROWS_AS(emit_csv(t, (dir / "missing" / "t.csv").string()), IoError);
}

TEST_CASE("config hash ignores key order") {
  const json a = json::parse(R"({"b": 1, "a": [1, 2]})");
  const json b = json::parse(R"({"a": [1, 2], "b": 1})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash(json::parse(R"({"a": [1, 2], "b": 2})")));
}

TEST_CASE("unknown config key exits 2 and writes nothing") {
  const fs::path dir = scratch("unknown");
  json j = json::parse(slurp(config("geometry.json")));
  j["alhpa"] = 0.5;
  const fs::path cfg = write_config(dir, "bad.json", j);
  const fs::path out = dir / "out";
  CHECK(cli("geometry --config " + cfg.string() + " --out " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out / "geometry.csv"));
  CHECK_FALSE(fs::exists(out / "geometry.log"));

  std::string msg;
  RunOptions opt{"geometry", cfg.string(), out.string(), {}, false};
  CHECK(run(opt, &msg) == 2);
  CHECK(msg.find("alhpa") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "geometry.csv"));

  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(cli("geometry --config " + broken.string() + " --out " + out.string()) == 2);
  CHECK(cli("geometry --out " + out.string()) == 2);
  CHECK(cli("no-such-command --config " + cfg.string()) == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("identity-check default suite") {
  const fs::path out = scratch("identity");
  CHECK(cli("identity-check --config " + config("identity.json") + " --out " + out.string()) == 0);
  const auto ls = lines(slurp(out / "identity-check.csv"));
  CHECK(ls.size() == 201);
  const std::string log = slurp(out / "identity-check.log");
  CHECK(log.find("FAIL") == std::string::npos);
  CHECK(log.find("PASS") != std::string::npos);
}

TEST_CASE("geometry reports c3 = 4097") {
  const fs::path out = scratch("geometry");
  CHECK(cli("geometry --config " + config("geometry.json") + " --out " + out.string()) == 0);
  const auto ls = lines(slurp(out / "geometry.csv"));
  REQUIRE(ls.size() > 1);
  CHECK(ls[1].rfind("c3,0,4097,", 0) == 0);
}

TEST_CASE("every module operation is reachable from a subcommand") {
  const std::set<std::string> ops{
      "field_kit.make_grid",           "field_kit.fd_apply",
      "field_kit.sample_brownian",     "carleman_weights.eval_frame",
      "carleman_weights.build_M",      "carleman_weights.eval_D",
      "carleman_weights.eval_VN",      "carleman_weights.psd_certificate",
      "carleman_weights.assumption_check", "identity_verifier.identity_residual",
      "identity_verifier.conjugation_residual", "identity_verifier.qv_check",
      "identity_verifier.inequality_gap", "spde_solver.step",
      "spde_solver.solve",             "spde_solver.manufactured_forcing",
      "spde_solver.total_energy",      "propagation_lab.distance_to_set",
      "propagation_lab.local_energy",  "propagation_lab.run_propagation",
      "cone_geometry.c3_constant",     "cone_geometry.vertex",
      "cone_geometry.membership",      "cone_geometry.sweep_cover"};
  std::set<std::string> reached;
  std::set<std::string> names;
  for (const auto& r : routes()) {
    names.insert(r.name);
    reached.insert(r.operations.begin(), r.operations.end());
  }
  for (const auto& op : ops) {
    INFO(op);
    CHECK(reached.count(op) == 1);
  }
  CHECK(names == std::set<std::string>{"identity-check", "conjugation-check", "expansion-check", "d2-check",
                                        "psd-check", "assumption-check", "qv-check", "inequality-scan", "propagation",
                                        "ucp-decay", "geometry", "sweep"});
}

TEST_CASE("reruns are byte-identical apart from wall time") {
  for (const std::string sub : {"identity-check", "qv-check", "inequality-scan"}) {
    const std::string file = sub == "identity-check" ? "identity.json" : sub == "qv-check" ? "qv.json" : "inequality.json";
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    REQUIRE(cli(sub + " --config " + config(file) + " --out " + a.string()) == 0);
    REQUIRE(cli(sub + " --config " + config(file) + " --out " + b.string()) == 0);
    INFO(sub);
    CHECK(without_wall_time(slurp(a / (sub + ".csv"))) == without_wall_time(slurp(b / (sub + ".csv"))));
  }
}

TEST_CASE("overrides change the seed and the hash") {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  REQUIRE(cli("identity-check --config " + config("identity.json") + " --out " + a.string()) == 0);
  REQUIRE(cli("identity-check --config " + config("identity.json") + " --out " + b.string() + " --seed 99") == 0);
  const auto la = lines(slurp(a / "identity-check.csv")), lb = lines(slurp(b / "identity-check.csv"));
  REQUIRE(la.size() == lb.size());
  CHECK(la[1] != lb[1]);
  CHECK(cli("identity-check --config " + config("identity.json") + " --paths 0") == 2);
}

TEST_CASE("a failing assertion exits 1 and is named in the log") {
  const fs::path dir = scratch("failing");
  json j = json::parse(slurp(config("psd.json")));
  j["expect_tau"] = 2;
  const fs::path cfg = write_config(dir, "psd.json", j);
  const fs::path out = dir / "out";
  CHECK(cli("psd-check --config " + cfg.string() + " --out " + out.string() + " --gnuplot") == 1);
  const std::string log = slurp(out / "psd-check.log");
  CHECK(log.find("FAIL ") != std::string::npos);
  CHECK(log.find("result fail") != std::string::npos);
  CHECK(fs::exists(out / "psd-check.csv"));
  const std::string gp = slurp(out / "psd-check.gp");
  CHECK(gp.find("psd-check.csv") != std::string::npos);
}

TEST_CASE("config readers reject wrong types") {
  const json j = json::parse(R"({"n": "two", "x": [1, "a"], "flag": 1})");
  Reader r(j, "test");
  CHECK_THROWS_AS(r.integer("n"), ConfigError);
  CHECK_THROWS_AS(r.numbers("x"), ConfigError);
  CHECK_THROWS_AS(r.boolean("flag"), ConfigError);
  CHECK_THROWS_AS(r.number("missing"), ConfigError);
  CHECK(r.number("other", 3.0) == 3.0);

  CHECK(parse_function(json(2.5), 1, "c").value(0.0, std::vector<double>{1.0}) == 2.5);
  CHECK(parse_function(json("x1"), 1, "c").value(0.0, std::vector<double>{1.5}) == 1.5);
  CHECK_THROWS_AS(parse_function(json("x2"), 1, "c"), ConfigError);
  CHECK_THROWS_AS(parse_profile(json::parse(R"(["bump", 0, 1])"), "p"), ConfigError);
}

TEST_CASE("execute runs without touching the file system") {
  const json j = json::parse(slurp(config("geometry.json")));
  const Outcome o = execute("geometry", j);
  CHECK(o.passed());
  CHECK_FALSE(o.table.rows.empty());
  CHECK_THROWS_AS(execute("nope", j), ConfigError);
}
