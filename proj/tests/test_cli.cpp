#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "offeval/commands.hpp"
#include "offeval/config.hpp"
#include "offeval/debias.hpp"
#include "offeval/interaction_log.hpp"
#include "offeval/snapshot.hpp"
#include "offeval/text.hpp"
#include "offeval/weights.hpp"

using namespace offeval;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "offeval_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& p, const std::string& body) {
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in.good(), "cannot read " << p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

using CmdFn = int (*)(const CliOptions&, std::ostream&, std::ostream&);

RunResult run(CmdFn cmd, const fs::path& config, const fs::path& out_dir,
              std::optional<std::uint64_t> seed = std::nullopt) {
  CliOptions opts;
  opts.config_path = config.string();
  opts.out_dir = out_dir.string();
  opts.seed = seed;
  std::ostringstream out, err;
  RunResult r;
  r.code = cmd(opts, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const char* kSimBody =
    "[simulate]\n"
    "users = 60\n"
    "items = 12\n"
    "zipf_exponent = 0.9\n"
    "mean_profile_size = 3\n"
    "horizon = 100\n"
    "seed = 7\n"
    "log_out = events.csv\n"
    "campaign.1.time = 60\n"
    "campaign.1.recommender = constant:9,10,11\n"
    "campaign.1.k = 3\n"
    "campaign.1.target_fraction = 0.8\n"
    "campaign.1.accept_prob = 0.6\n";

}  // namespace

TEST_CASE("config files parse sections, comments and overrides") {
  std::istringstream in(
      "# top comment\n"
      "seed = 9\n"
      "[alpha]\n"
      "key = first\n"
      "key = second\n"
      "list = a, b,, c\n"
      "[beta]\n"
      "number = 42\n"
      "ratio = 0.5\n");
  const Config cfg = Config::parse(in, "inline.cfg");
  CHECK(cfg.get("", "seed") == "9");
  CHECK(cfg.get("alpha", "key") == "second");  // the last value wins
  CHECK(cfg.get_list("alpha", "list") ==
        std::vector<std::string>{"a", "b", "c"});
  CHECK(cfg.get_int("beta", "number") == 42);
  CHECK(cfg.get_double("beta", "ratio") == 0.5);
  CHECK(cfg.get_or("beta", "absent", "dflt") == "dflt");
  CHECK(cfg.get_int_or("beta", "absent", 5) == 5);
  CHECK(cfg.has("beta", "number"));
  CHECK_FALSE(cfg.has("beta", "nothing"));
  CHECK(cfg.origin() == "inline.cfg");

  CHECK_THROWS_AS(cfg.get("beta", "nothing"), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("alpha", "key"), ConfigError);

  std::istringstream bad("key_without_equals\n");
  CHECK_THROWS_AS(Config::parse(bad, "bad.cfg"), ConfigError);
}

TEST_CASE("a missing config file exits with code 2 and names the path") {
  const fs::path dir = fresh_dir("missing_config");
  const auto r = run(&cmd_simulate, dir / "nope.cfg", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("nope.cfg") != std::string::npos);
}

TEST_CASE("simulate writes a loadable log and a summary line") {
  const fs::path dir = fresh_dir("simulate_basic");
  const fs::path cfg = write_file(dir / "sim.cfg", kSimBody);

  const auto r = run(&cmd_simulate, cfg, dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("simulate: wrote") != std::string::npos);
  CHECK(r.out.find("campaign)") != std::string::npos);

  const InteractionLog log = load_log_file((dir / "events.csv").string());
  CHECK(log.size() > 100);
  std::int64_t campaign = 0;
  for (const Interaction& e : log.interactions())
    campaign += e.source.is_campaign();
  CHECK(campaign > 0);
}

TEST_CASE("simulate runs are byte-identical across invocations") {
  const fs::path a = fresh_dir("simulate_rep_a");
  const fs::path b = fresh_dir("simulate_rep_b");
  const fs::path cfg_a = write_file(a / "sim.cfg", kSimBody);
  const fs::path cfg_b = write_file(b / "sim.cfg", kSimBody);
  CHECK(run(&cmd_simulate, cfg_a, a).code == 0);
  CHECK(run(&cmd_simulate, cfg_b, b).code == 0);
  CHECK(slurp(a / "events.csv") == slurp(b / "events.csv"));

  // a different seed changes the bytes
  const fs::path c = fresh_dir("simulate_rep_c");
  const fs::path cfg_c = write_file(c / "sim.cfg", kSimBody);
  CHECK(run(&cmd_simulate, cfg_c, c, 12345).code == 0);
  CHECK(slurp(c / "events.csv") != slurp(a / "events.csv"));
}

TEST_CASE("simulate can emit an item probability series") {
  const fs::path dir = fresh_dir("simulate_series");
  const fs::path cfg = write_file(
      dir / "sim.cfg",
      std::string(kSimBody) +
          "probability_series_times = 30, 59, 61, 99\n"
          "probability_series_out = series.csv\n");
  const auto r = run(&cmd_simulate, cfg, dir);
  CHECK(r.code == 0);

  const std::string series = slurp(dir / "series.csv");
  CHECK(series.rfind("# offeval-series v1\n", 0) == 0);
  CHECK(series.find("t,item_id,p\n") != std::string::npos);
  // 4 times x 12 items plus version and header lines
  int lines = 0;
  for (char ch : series) lines += ch == '\n';
  CHECK(lines == 2 + 4 * 12);
}

TEST_CASE("debias on identical snapshots returns unit weights") {
  const fs::path dir = fresh_dir("debias_identity");
  write_file(dir / "sim.cfg", kSimBody);
  REQUIRE(run(&cmd_simulate, dir / "sim.cfg", dir).code == 0);

  const fs::path cfg = write_file(dir / "debias.cfg",
                                  "[debias]\n"
                                  "log = events.csv\n"
                                  "t0 = 50\n"
                                  "t1 = 50\n"
                                  "p = all\n"
                                  "out_prefix = fit\n");
  const auto r = run(&cmd_debias, cfg, dir);
  CHECK(r.code == 0);

  const InteractionLog log = load_log_file((dir / "events.csv").string());
  const WeightVector w =
      WeightVector::load((dir / "fit_pall_weights.csv").string(), log);
  CHECK(w.all_ones());

  // the divergence trace starts and ends at zero
  const std::string trace = slurp(dir / "fit_pall_trace.csv");
  CHECK(trace.find("# offeval-trace v1\n") == 0);
  CHECK(trace.find("iter,D,grad_norm,step\n") != std::string::npos);
  CHECK(trace.find("0,0,") != std::string::npos);
}

TEST_CASE("debias p sweep writes one fit per token with non-increasing D") {
  const fs::path dir = fresh_dir("debias_sweep");
  write_file(dir / "sim.cfg", kSimBody);
  REQUIRE(run(&cmd_simulate, dir / "sim.cfg", dir).code == 0);

  const fs::path cfg = write_file(dir / "debias.cfg",
                                  "[debias]\n"
                                  "log = events.csv\n"
                                  "t0 = 59\n"
                                  "t1 = 100\n"
                                  "p = 2, 4, all\n"
                                  "out_prefix = fit\n");
  const auto r = run(&cmd_debias, cfg, dir);
  CHECK(r.code == 0);

  const InteractionLog log = load_log_file((dir / "events.csv").string());
  const Snapshot s0 = snapshot_at(log, 59.0);
  const Snapshot s1 = snapshot_at(log, 100.0);
  const ItemDistribution target =
      item_distribution(s0, WeightVector::ones(log.n_items()));

  std::vector<double> final_d;
  for (const std::string& tok : {"2", "4", "all"}) {
    const fs::path wpath = dir / ("fit_p" + tok + "_weights.csv");
    const WeightVector w = WeightVector::load(wpath.string(), log);
    final_d.push_back(kl_divergence(target, s1, w));
  }
  CHECK(final_d[1] <= final_d[0] + 1e-6);  // wider active sets fit at least
  CHECK(final_d[2] <= final_d[1] + 1e-6);  // as well as narrow ones
}

TEST_CASE("evaluate writes the scores table with one row per cell") {
  const fs::path dir = fresh_dir("evaluate_basic");
  write_file(dir / "sim.cfg", kSimBody);
  REQUIRE(run(&cmd_simulate, dir / "sim.cfg", dir).code == 0);

  const fs::path cfg = write_file(dir / "eval.cfg",
                                  "[evaluate]\n"
                                  "log = events.csv\n"
                                  "times = 59, 99\n"
                                  "recommenders = pop=popular; cos=cosine\n"
                                  "k = 3\n"
                                  "mode = stochastic\n"
                                  "n_draws = 500\n"
                                  "seed = 4\n");
  const auto r = run(&cmd_evaluate, cfg, dir);
  CHECK(r.code == 0);

  const std::string body = slurp(dir / "scores.csv");
  CHECK(body.rfind("# offeval-scores v1\n", 0) == 0);
  CHECK(body.find("t,recommender,mode,p,score,ci_low,ci_high\n") !=
        std::string::npos);
  int rows = -2;  // discount the version and header lines
  for (char ch : body) rows += ch == '\n';
  CHECK(rows == 2 * 2);  // 2 times x 2 recommenders, single unweighted sweep
  CHECK(body.find("pop") != std::string::npos);
  CHECK(body.find("cos") != std::string::npos);
  CHECK(body.find("stochastic") != std::string::npos);
}

TEST_CASE("evaluate sweeps weighted variants and stays reproducible") {
  const fs::path dir = fresh_dir("evaluate_weighted");
  write_file(dir / "sim.cfg", kSimBody);
  REQUIRE(run(&cmd_simulate, dir / "sim.cfg", dir).code == 0);

  const std::string eval_body =
      "[evaluate]\n"
      "log = events.csv\n"
      "times = 99\n"
      "recommenders = pop=popular\n"
      "k = 3\n"
      "mode = exhaustive\n"
      "p = 3, all\n"
      "t0 = 59\n"
      "out = scores.csv\n";
  const fs::path cfg = write_file(dir / "eval.cfg", eval_body);
  const auto r = run(&cmd_evaluate, cfg, dir);
  CHECK(r.code == 0);

  const std::string body = slurp(dir / "scores.csv");
  int rows = -2;
  for (char ch : body) rows += ch == '\n';
  CHECK(rows == 3);  // unweighted plus p = 3 and p = all

  const fs::path dir2 = fresh_dir("evaluate_weighted_2");
  write_file(dir2 / "sim.cfg", kSimBody);
  REQUIRE(run(&cmd_simulate, dir2 / "sim.cfg", dir2).code == 0);
  write_file(dir2 / "eval.cfg", eval_body);
  REQUIRE(run(&cmd_evaluate, dir2 / "eval.cfg", dir2).code == 0);
  CHECK(slurp(dir2 / "scores.csv") == body);
}

TEST_CASE("evaluate validates its experiment setup") {
  const fs::path dir = fresh_dir("evaluate_errors");
  write_file(dir / "sim.cfg", kSimBody);
  REQUIRE(run(&cmd_simulate, dir / "sim.cfg", dir).code == 0);

  // weights must be fitted at or before the first evaluation time
  const fs::path bad_t0 = write_file(dir / "bad_t0.cfg",
                                     "[evaluate]\n"
                                     "log = events.csv\n"
                                     "times = 50\n"
                                     "recommenders = pop=popular\n"
                                     "p = all\n"
                                     "t0 = 80\n");
  CHECK(run(&cmd_evaluate, bad_t0, dir).code == 2);

  const fs::path bad_mode = write_file(dir / "bad_mode.cfg",
                                       "[evaluate]\n"
                                       "log = events.csv\n"
                                       "times = 50\n"
                                       "recommenders = pop=popular\n"
                                       "mode = psychic\n");
  CHECK(run(&cmd_evaluate, bad_mode, dir).code == 2);

  const fs::path bad_rec = write_file(dir / "bad_rec.cfg",
                                      "[evaluate]\n"
                                      "log = events.csv\n"
                                      "times = 50\n"
                                      "recommenders = x=mystery\n");
  CHECK(run(&cmd_evaluate, bad_rec, dir).code == 2);

  // a readable config pointing at missing data is a runtime failure
  const fs::path no_log = write_file(dir / "no_log.cfg",
                                     "[evaluate]\n"
                                     "log = absent.csv\n"
                                     "times = 50\n"
                                     "recommenders = pop=popular\n");
  CHECK(run(&cmd_evaluate, no_log, dir).code == 1);

  // evaluation before anyone has a profile is a runtime failure
  const fs::path too_early = write_file(dir / "early.cfg",
                                        "[evaluate]\n"
                                        "log = events.csv\n"
                                        "times = 0\n"
                                        "recommenders = pop=popular\n");
  const auto early = run(&cmd_evaluate, too_early, dir);
  CHECK(early.code == 1);
  CHECK(early.err.find("no user has a profile") != std::string::npos);
}

TEST_CASE("report merges csv outputs into one json document") {
  const fs::path dir = fresh_dir("report_basic");
  write_file(dir / "sim.cfg", kSimBody);
  REQUIRE(run(&cmd_simulate, dir / "sim.cfg", dir).code == 0);
  write_file(dir / "eval.cfg",
             "[evaluate]\n"
             "log = events.csv\n"
             "times = 99\n"
             "recommenders = pop=popular\n"
             "mode = exhaustive\n");
  REQUIRE(run(&cmd_evaluate, dir / "eval.cfg", dir).code == 0);

  const fs::path cfg = write_file(dir / "report.cfg",
                                  "[report]\n"
                                  "inputs = scores.csv\n"
                                  "out = report.json\n");
  const auto r = run(&cmd_report, cfg, dir);
  CHECK(r.code == 0);

  const auto doc = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(doc.at("schema") == "offeval-report v1");
  REQUIRE(doc.at("sources").size() == 1);
  const auto& src = doc.at("sources")[0];
  CHECK(src.at("path") == "scores.csv");
  CHECK(src.at("columns").size() == 7);
  CHECK(src.at("rows").size() == 1);

  const fs::path missing = write_file(dir / "report2.cfg",
                                      "[report]\n"
                                      "inputs = nothing.csv\n");
  CHECK(run(&cmd_report, missing, dir).code == 1);
}

TEST_CASE("the full pipeline round-trips quickly on a small setup") {
  const auto started = std::chrono::steady_clock::now();
  const fs::path dir = fresh_dir("pipeline");
  write_file(dir / "sim.cfg", kSimBody);
  write_file(dir / "debias.cfg",
             "[debias]\n"
             "log = events.csv\n"
             "t0 = 59\n"
             "t1 = 100\n"
             "p = all\n"
             "out_prefix = fit\n");
  write_file(dir / "eval.cfg",
             "[evaluate]\n"
             "log = events.csv\n"
             "times = 99\n"
             "recommenders = pop=popular; naive=naive\n"
             "mode = stochastic\n"
             "n_draws = 2000\n"
             "p = all\n"
             "t0 = 59\n");
  write_file(dir / "report.cfg",
             "[report]\n"
             "inputs = scores.csv\n");

  CHECK(run(&cmd_simulate, dir / "sim.cfg", dir).code == 0);
  CHECK(run(&cmd_debias, dir / "debias.cfg", dir).code == 0);
  CHECK(run(&cmd_evaluate, dir / "eval.cfg", dir).code == 0);
  CHECK(run(&cmd_report, dir / "report.cfg", dir).code == 0);
  CHECK(fs::exists(dir / "report.json"));

  const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  CHECK(elapsed < 60);
}

TEST_CASE("debias on the standard preset improves the emitted objective") {
  const fs::path dir = fresh_dir("preset_debias");
  const fs::path preset =
      fs::path(OFFEVAL_SOURCE_DIR) / "presets" / "standard.cfg";
  REQUIRE(run(&cmd_simulate, preset, dir).code == 0);
  REQUIRE(run(&cmd_debias, preset, dir).code == 0);

  // The trace carries the objective before the first step (iter 0) and after
  // the last accepted one; the fit must end strictly below where it started.
  std::istringstream trace(slurp(dir / "weights_p20_trace.csv"));
  std::string line, first_row, last_row;
  while (std::getline(trace, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("iter,", 0) == 0) continue;
    if (first_row.empty()) first_row = line;
    last_row = line;
  }
  REQUIRE_FALSE(first_row.empty());
  REQUIRE(first_row != last_row);
  const auto objective_of = [](const std::string& row) {
    const auto fields = text::split(row, ',');
    REQUIRE(fields.size() == 4);
    return text::parse_double(fields[1], "trace row");
  };
  const double initial = objective_of(first_row);
  const double final_d = objective_of(last_row);
  CHECK(initial > 0.0);
  CHECK(final_d < initial);
}
