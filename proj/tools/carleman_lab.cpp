#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "carleman/lab.hpp"

int main(int argc, char** argv) {
  CLI::App app{"carleman-lab: identity checks, solver experiments and cone geometry"};
  app.require_subcommand(1, 1);

  carleman::lab::RunOptions opt;
  std::uint64_t seed = 0;
  int paths = 0;
  for (const auto& route : carleman::lab::routes()) {
    CLI::App* sub = app.add_subcommand(route.name, route.summary);
    sub->add_option("--config", opt.config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--paths", paths, "override the configured Monte Carlo path count")->check(CLI::PositiveNumber);
    sub->add_flag("--gnuplot", opt.gnuplot, "also write a gnuplot script");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.subcommand = sub->get_name();
  if (sub->count("--seed") > 0) opt.overrides.seed = seed;
  if (sub->count("--paths") > 0) opt.overrides.paths = paths;

  std::string message;
  const int code = carleman::lab::run(opt, &message);
  (code == 0 ? std::cout : std::cerr) << message;
  return code;
}
