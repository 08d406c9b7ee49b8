#include <CLI11.hpp>

#include <iostream>

#include "mppgeo/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Most probable paths on frame bundles"};
  app.require_subcommand(1);
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<std::string> scheme;
  for (const char* name : {"mpp", "sweep", "shoot", "landmarks", "estimate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "experiment JSON")->required();
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--steps", steps, "integrator steps")->check(CLI::PositiveNumber);
    sub->add_option("--scheme", scheme, "euler or rk4")->check(CLI::IsMember({"euler", "rk4"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mppgeo::cli::kConfigError;
  }
  mppgeo::cli::Overrides o;
  o.seed = seed;
  o.steps = steps;
  if (scheme) o.scheme = mppgeo::parse_scheme(*scheme);
  return mppgeo::cli::run(app.get_subcommands().front()->get_name(), config, out, o, std::cerr);
}
