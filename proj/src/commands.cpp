#include "offeval/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "offeval/protocol.hpp"
#include "offeval/recommender.hpp"
#include "offeval/snapshot.hpp"
#include "offeval/text.hpp"

namespace offeval {

namespace {

namespace fs = std::filesystem;

std::string resolve_out(const CliOptions& opts, const std::string& path) {
  fs::path p(path);
  if (opts.out_dir && p.is_relative()) p = fs::path(*opts.out_dir) / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p.string();
}

std::string resolve_in(const CliOptions& opts, const std::string& path) {
  fs::path p(path);
  if (opts.out_dir && p.is_relative()) p = fs::path(*opts.out_dir) / p;
  return p.string();
}

template <typename Body>
int run_command(const CliOptions& opts, std::ostream& err, Body body) {
  try {
    const Config cfg = Config::parse_file(opts.config_path);
    body(cfg);
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  return f;
}

// p-sweep tokens are positive integers or "all" (every deviating item).
int parse_p_token(const std::string& tok) {
  if (tok == "all") return 0;
  const long long p = text::parse_int(tok, "p");
  if (p <= 0)
    throw ConfigError("p values must be positive integers or 'all', got '" +
                      tok + "'");
  return static_cast<int>(p);
}

std::vector<Timestamp> parse_times(const Config& cfg,
                                   const std::string& section,
                                   const std::string& key) {
  std::vector<Timestamp> times;
  for (const std::string& tok : cfg.get_list(section, key))
    times.push_back(text::parse_double(tok, key));
  if (times.empty())
    throw ConfigError(cfg.origin() + ": key '" + section + "." + key +
                      "' needs at least one value");
  return times;
}

void write_trace(const std::string& path, std::span<const TraceRow> trace) {
  std::ofstream f = open_out(path);
  f << "# offeval-trace v1\n";
  f << "iter,D,grad_norm,step\n";
  for (const TraceRow& row : trace)
    f << row.iter << ',' << text::format_double(row.objective) << ','
      << text::format_double(row.grad_norm) << ','
      << text::format_double(row.step) << '\n';
  if (!f) throw std::runtime_error("error while writing " + path);
}

}  // namespace

SimulationConfig simulation_config_from(const Config& cfg) {
  const std::string S = "simulate";
  SimulationConfig sim;
  sim.n_users = static_cast<int>(cfg.get_int(S, "users"));
  sim.n_items = static_cast<int>(cfg.get_int(S, "items"));
  sim.zipf_exponent = cfg.get_double_or(S, "zipf_exponent", 1.0);
  sim.mean_profile_size = cfg.get_double_or(S, "mean_profile_size", 5.0);
  sim.organic_rate = cfg.get_double_or(S, "organic_rate", 0.0);
  sim.horizon = cfg.get_double(S, "horizon");
  sim.seed = cfg.get_u64_or(S, "seed", cfg.get_u64_or("", "seed", 1));

  std::set<int> ids;
  for (const auto& [key, value] : cfg.section_items(S)) {
    if (!text::starts_with(key, "campaign.")) continue;
    const std::string rest = key.substr(9);
    const std::size_t dot = rest.find('.');
    if (dot == std::string::npos)
      throw ConfigError(cfg.origin() + ": malformed campaign key '" + key +
                        "', expected campaign.<id>.<field>");
    try {
      ids.insert(static_cast<int>(text::parse_int(rest.substr(0, dot), "campaign id")));
    } catch (const std::exception& e) {
      throw ConfigError(cfg.origin() + ": key '" + key + "': " + e.what());
    }
  }
  for (int id : ids) {
    const std::string p = "campaign." + std::to_string(id) + ".";
    Campaign c;
    c.id = id;
    c.time = cfg.get_double(S, p + "time");
    c.recommender = cfg.get(S, p + "recommender");
    c.k = static_cast<int>(cfg.get_int_or(S, p + "k", 5));
    c.target_fraction = cfg.get_double_or(S, p + "target_fraction", 1.0);
    c.accept_prob = cfg.get_double_or(S, p + "accept_prob", 0.3);
    sim.campaigns.push_back(std::move(c));
  }
  try {
    sim.validate();
  } catch (const std::exception& e) {
    throw ConfigError(cfg.origin() + ": [simulate]: " + e.what());
  }
  return sim;
}

OptimizerConfig optimizer_config_from(const Config& cfg,
                                      const std::string& section) {
  OptimizerConfig oc;
  oc.max_iters = static_cast<int>(cfg.get_int_or(section, "max_iters", oc.max_iters));
  oc.step_init = cfg.get_double_or(section, "step_init", oc.step_init);
  oc.armijo_c = cfg.get_double_or(section, "armijo_c", oc.armijo_c);
  oc.backtrack = cfg.get_double_or(section, "backtrack", oc.backtrack);
  oc.max_backtracks = static_cast<int>(
      cfg.get_int_or(section, "max_backtracks", oc.max_backtracks));
  oc.grad_tol = cfg.get_double_or(section, "grad_tol", oc.grad_tol);
  oc.d_rel_tol = cfg.get_double_or(section, "d_rel_tol", oc.d_rel_tol);
  return oc;
}

int cmd_simulate(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return run_command(opts, err, [&](const Config& cfg) {
    SimulationConfig sim = simulation_config_from(cfg);
    if (opts.seed) sim.seed = *opts.seed;
    const InteractionLog log = run_timeline(sim);
    const std::string log_path =
        resolve_out(opts, cfg.get("simulate", "log_out"));
    save_log_file(log, log_path);
    std::int64_t organic = 0, campaign = 0;
    for (const Interaction& e : log.interactions())
      (e.source.is_campaign() ? campaign : organic)++;
    out << "simulate: wrote " << log.size() << " interactions (" << organic
        << " organic, " << campaign << " campaign) to " << log_path << '\n';

    const auto time_tokens = cfg.get_list("simulate", "probability_series_times");
    if (!time_tokens.empty()) {
      std::vector<Timestamp> times;
      for (const std::string& tok : time_tokens)
        times.push_back(text::parse_double(tok, "probability_series_times"));
      const ProbabilitySeries series = item_probability_series(log, times);
      const std::string series_path =
          resolve_out(opts, cfg.get("simulate", "probability_series_out"));
      std::ofstream f = open_out(series_path);
      f << "# offeval-series v1\n";
      f << "t,item_id,p\n";
      for (std::size_t ti = 0; ti < series.times.size(); ++ti)
        for (int i = 0; i < log.n_items(); ++i)
          f << text::format_double(series.times[ti]) << ','
            << log.item_label(i) << ','
            << text::format_double(series.distributions[ti][i]) << '\n';
      if (!f) throw std::runtime_error("error while writing " + series_path);
      out << "simulate: wrote probability series for " << series.times.size()
          << " times to " << series_path << '\n';
    }
  });
}

int cmd_debias(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return run_command(opts, err, [&](const Config& cfg) {
    const std::string S = "debias";
    const InteractionLog log =
        load_log_file(resolve_in(opts, cfg.get(S, "log")));
    const Timestamp t0 = cfg.get_double(S, "t0");
    const Timestamp t1 = cfg.get_double(S, "t1");
    std::vector<std::string> p_tokens = cfg.get_list(S, "p");
    if (p_tokens.empty()) p_tokens.push_back("all");
    const std::string prefix = cfg.get_or(S, "out_prefix", "debias");
    const OptimizerConfig base = optimizer_config_from(cfg, S);

    const Snapshot s0 = snapshot_at(log, t0);
    const Snapshot s1 = snapshot_at(log, t1);
    const ItemDistribution target =
        item_distribution(s0, WeightVector::ones(log.n_items()));
    for (const std::string& tok : p_tokens) {
      OptimizerConfig oc = base;
      oc.p = parse_p_token(tok);
      const OptimizeResult res = optimize_weights(target, s1, oc);
      const std::string wpath =
          resolve_out(opts, prefix + "_p" + tok + "_weights.csv");
      const std::string tpath =
          resolve_out(opts, prefix + "_p" + tok + "_trace.csv");
      res.weights.save(wpath, log);
      write_trace(tpath, res.trace);
      out << "debias p=" << tok << ": D "
          << text::format_double(res.initial_objective) << " -> "
          << text::format_double(res.final_objective) << " in "
          << res.trace.back().iter << " iterations, active="
          << res.active.size() << ", wrote " << wpath << '\n';
      if (res.floored_terms > 0)
        err << "warning: p=" << tok << ": " << res.floored_terms
            << " target items have (near) zero mass in the fitted"
               " distribution\n";
      if (!res.converged)
        err << "warning: p=" << tok
            << ": stopped before convergence; best iterate kept\n";
    }
  });
}

int cmd_evaluate(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return run_command(opts, err, [&](const Config& cfg) {
    const std::string S = "evaluate";
    const InteractionLog log =
        load_log_file(resolve_in(opts, cfg.get(S, "log")));
    const std::vector<Timestamp> times = parse_times(cfg, S, "times");
    const int k = static_cast<int>(cfg.get_int_or(S, "k", 5));
    const std::string mode = cfg.get_or(S, "mode", "stochastic");
    if (mode != "stochastic" && mode != "exhaustive")
      throw ConfigError(cfg.origin() + ": evaluate.mode must be 'stochastic'"
                        " or 'exhaustive'");
    const std::int64_t n_draws = cfg.get_int_or(S, "n_draws", 20000);
    const std::uint64_t seed =
        opts.seed ? *opts.seed
                  : cfg.get_u64_or(S, "seed", cfg.get_u64_or("", "seed", 1));

    std::vector<std::pair<std::string, std::unique_ptr<Recommender>>> recs;
    for (const std::string& tok :
         text::split(cfg.get(S, "recommenders"), ';')) {
      const std::string_view sv = text::trim(tok);
      if (sv.empty()) continue;
      const std::size_t eq = sv.find('=');
      const std::string label(
          text::trim(eq == std::string_view::npos ? sv : sv.substr(0, eq)));
      const std::string spec(
          text::trim(eq == std::string_view::npos ? sv : sv.substr(eq + 1)));
      try {
        recs.emplace_back(label, make_recommender(spec, log));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.origin() + ": evaluate.recommenders: " + e.what());
      }
    }
    if (recs.empty())
      throw ConfigError(cfg.origin() + ": evaluate.recommenders is empty");

    const std::vector<std::string> p_tokens = cfg.get_list(S, "p");
    std::optional<ItemDistribution> target;
    OptimizerConfig base = optimizer_config_from(cfg, "debias");
    if (!p_tokens.empty()) {
      const Timestamp t0 = cfg.get_double(S, "t0");
      if (t0 > *std::min_element(times.begin(), times.end()))
        throw ConfigError(cfg.origin() +
                          ": evaluate.t0 must not exceed the earliest"
                          " evaluation time");
      target = item_distribution(snapshot_at(log, t0),
                                 WeightVector::ones(log.n_items()));
    }

    const std::string scores_path =
        resolve_out(opts, cfg.get_or(S, "out", "scores.csv"));
    std::ofstream f = open_out(scores_path);
    f << "# offeval-scores v1\n";
    f << "t,recommender,mode,p,score,ci_low,ci_high\n";
    std::int64_t rows = 0;
    for (const Timestamp t : times) {
      const Snapshot snap = snapshot_at(log, t);
      if (snap.n_users() == 0)
        throw std::runtime_error("no user has a profile at t=" +
                                 text::format_double(t));
      // "0" marks the unweighted run; other tokens carry fitted weights.
      std::vector<std::pair<std::string, std::optional<WeightVector>>> sweeps;
      sweeps.emplace_back("0", std::nullopt);
      for (const std::string& tok : p_tokens) {
        OptimizerConfig oc = base;
        oc.p = parse_p_token(tok);
        OptimizeResult res = optimize_weights(*target, snap, oc);
        if (!res.converged)
          err << "warning: t=" << text::format_double(t) << " p=" << tok
              << ": weight fit stopped before convergence\n";
        sweeps.emplace_back(tok, std::move(res.weights));
      }
      for (const auto& [label, rec] : recs) {
        for (const auto& [ptok, weights] : sweeps) {
          const WeightVector* w = weights ? &*weights : nullptr;
          EvaluationResult r;
          if (mode == "exhaustive") {
            r = evaluate_exhaustive(*rec, snap, w, k);
          } else {
            SamplingConfig sc;
            sc.n_draws = n_draws;
            sc.weights = w;
            sc.seed = derive_seed(seed, "evaluate:" + label +
                                            ":t=" + text::format_double(t) +
                                            ":p=" + ptok);
            r = evaluate_stochastic(*rec, snap, sc, k);
          }
          f << text::format_double(t) << ',' << label << ',' << r.mode << ','
            << ptok << ',' << text::format_double(r.score) << ','
            << text::format_double(r.ci_low) << ','
            << text::format_double(r.ci_high) << '\n';
          ++rows;
        }
      }
    }
    if (!f) throw std::runtime_error("error while writing " + scores_path);
    out << "evaluate: wrote " << rows << " rows to " << scores_path << '\n';
  });
}

int cmd_report(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return run_command(opts, err, [&](const Config& cfg) {
    const std::vector<std::string> inputs = cfg.get_list("report", "inputs");
    if (inputs.empty())
      throw ConfigError(cfg.origin() + ": report.inputs is empty");
    nlohmann::ordered_json doc;
    doc["schema"] = "offeval-report v1";
    doc["sources"] = nlohmann::ordered_json::array();
    for (const std::string& input : inputs) {
      const std::string path = resolve_in(opts, input);
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open input file: " + path);
      nlohmann::ordered_json src;
      src["path"] = input;
      src["columns"] = nlohmann::ordered_json::array();
      src["rows"] = nlohmann::ordered_json::array();
      std::string line;
      bool saw_header = false;
      while (std::getline(in, line)) {
        const std::string_view sv = text::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto fields = text::split(sv, ',');
        for (std::string& field : fields) field = std::string(text::trim(field));
        if (!saw_header) {
          src["columns"] = fields;
          saw_header = true;
        } else {
          src["rows"].push_back(fields);
        }
      }
      doc["sources"].push_back(std::move(src));
    }
    const std::string out_path =
        resolve_out(opts, cfg.get_or("report", "out", "report.json"));
    std::ofstream f = open_out(out_path);
    f << doc.dump(2) << '\n';
    if (!f) throw std::runtime_error("error while writing " + out_path);
    out << "report: merged " << inputs.size() << " sources into " << out_path
        << '\n';
  });
}

}  // namespace offeval
