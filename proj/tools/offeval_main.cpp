#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "offeval/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"offline recommender evaluation with exposure-debiasing weights"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", config, "config file (key = value sections)")
        ->required();
    sub->add_option("--seed", seed, "override the seed from the config");
    sub->add_option("-o,--out", out_dir,
                    "directory prepended to relative output paths");
    return sub;
  };

  CLI::App* sim = add("simulate", "generate a synthetic interaction log");
  CLI::App* eva = add("evaluate", "score recommenders on log snapshots");
  CLI::App* deb = add("debias", "fit item weights toward a reference snapshot");
  CLI::App* rep = add("report", "merge result CSVs into one JSON document");

  CLI11_PARSE(app, argc, argv);

  const offeval::CliOptions opts{config, seed, out_dir};
  if (sim->parsed()) return offeval::cmd_simulate(opts, std::cout, std::cerr);
  if (eva->parsed()) return offeval::cmd_evaluate(opts, std::cout, std::cerr);
  if (deb->parsed()) return offeval::cmd_debias(opts, std::cout, std::cerr);
  if (rep->parsed()) return offeval::cmd_report(opts, std::cout, std::cerr);
  return 2;
}
