#include "mifb/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Multi-step inertial forward-backward experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  mifb::CliOptions cli;
  std::uint64_t seed = 0;
  bool seed_set = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", cli.out_dir, "output directory (overrides config)");
    sub->add_flag("--no-plot", cli.no_plot, "skip SVG plot generation");
    sub->add_option("--seed-override", seed, "replace the problem seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* run = app.add_subcommand("run", "solve each schedule and emit trace CSVs");
  CLI::App* compare = app.add_subcommand("compare", "run schedules against one shared x*");
  CLI::App* rates = app.add_subcommand("rates", "predicted vs observed local rates");
  add_common(run);
  add_common(compare);
  add_common(rates);

  CLI11_PARSE(app, argc, argv);
  if (seed_set) cli.seed_override = seed;

  if (run->parsed()) return mifb::cmd_run(config_path, cli);
  if (compare->parsed()) return mifb::cmd_compare(config_path, cli);
  return mifb::cmd_rates(config_path, cli);
}
