#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "offeval/config.hpp"
#include "offeval/debias.hpp"
#include "offeval/simulate.hpp"

namespace offeval {

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;     // overrides the config seed
  std::optional<std::string> out_dir;    // prefix for relative output paths
};

// Exit codes: 0 on success, 2 for config problems (missing file, bad keys),
// 1 for runtime failures. Progress goes to `out`, diagnostics to `err`.
int cmd_simulate(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_evaluate(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_debias(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const CliOptions& opts, std::ostream& out, std::ostream& err);

// Builders shared with tests; both throw ConfigError on bad input.
SimulationConfig simulation_config_from(const Config& cfg);
OptimizerConfig optimizer_config_from(const Config& cfg,
                                      const std::string& section);

}  // namespace offeval
