#include "offeval/debias.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offeval {

namespace {

void check_universe(const Snapshot& s, const WeightVector& w) {
  if (w.size() != s.n_item_slots())
    throw std::invalid_argument("weight vector does not match item universe");
}

void check_eligible(const Snapshot& s) {
  if (s.n_users() == 0)
    throw std::invalid_argument(
        "degenerate snapshot: no user with a non-empty profile");
}

// S_u = sum of weights over u's profile, indexed by user slot.
std::vector<double> profile_weight_sums(const Snapshot& s,
                                        const WeightVector& w) {
  std::vector<double> sums(s.n_user_slots(), 0.0);
  for (UserId u : s.users()) {
    double acc = 0.0;
    for (ItemId i : s.items_of(u)) acc += w[i];
    sums[u] = acc;
  }
  return sums;
}

std::vector<double> weighted_marginal(const Snapshot& s, const WeightVector& w,
                                      const std::vector<double>& sums) {
  std::vector<double> p(s.n_item_slots(), 0.0);
  const double inv_users = 1.0 / static_cast<double>(s.n_users());
  for (ItemId i : s.items()) {
    double acc = 0.0;
    for (UserId u : s.users_of(i)) acc += w[i] / sums[u];
    p[i] = acc * inv_users;
  }
  return p;
}

}  // namespace

ItemDistribution item_distribution(const Snapshot& s, const WeightVector& w) {
  check_universe(s, w);
  check_eligible(s);
  const auto sums = profile_weight_sums(s, w);
  return ItemDistribution(weighted_marginal(s, w, sums));
}

double pair_distribution(const Snapshot& s, const WeightVector& w, ItemId i,
                         ItemId k) {
  check_universe(s, w);
  check_eligible(s);
  // Walk the sparser column and test membership against the other item.
  auto walk = s.users_of(i);
  ItemId other = k;
  if (s.users_of(k).size() < walk.size()) {
    walk = s.users_of(k);
    other = i;
  }
  double acc = 0.0;
  for (UserId u : walk) {
    if (i != k && !s.has_edge(u, other)) continue;
    double su = 0.0;
    for (ItemId j : s.items_of(u)) su += w[j];
    acc += w[i] * w[k] / (su * su);
  }
  return acc / static_cast<double>(s.n_users());
}

double kl_divergence(const ItemDistribution& target, const Snapshot& s1,
                     const WeightVector& w, int* floored_terms) {
  check_universe(s1, w);
  check_eligible(s1);
  if (target.size() != s1.n_item_slots())
    throw std::invalid_argument("target distribution does not match item universe");
  const auto sums = profile_weight_sums(s1, w);
  const auto p1 = weighted_marginal(s1, w, sums);
  double d = 0.0;
  int floored = 0;
  for (int i = 0; i < target.size(); ++i) {
    const double p0 = target[i];
    if (p0 <= 0.0) continue;
    double q = p1[i];
    if (q < kProbFloor) {
      q = kProbFloor;
      ++floored;
    }
    d += p0 * (std::log(p0) - std::log(q));
  }
  if (floored_terms) *floored_terms = floored;
  return d;
}

std::vector<double> kl_gradient(const ItemDistribution& target,
                                const Snapshot& s1, const WeightVector& w,
                                std::span<const ItemId> active) {
  check_universe(s1, w);
  check_eligible(s1);
  if (target.size() != s1.n_item_slots())
    throw std::invalid_argument("target distribution does not match item universe");
  const auto sums = profile_weight_sums(s1, w);
  const auto p1 = weighted_marginal(s1, w, sums);
  // Ratio target/p1 per item; items floored in the objective contribute a
  // locally flat term, so their ratio is zeroed to stay consistent with
  // finite differences of kl_divergence.
  std::vector<double> ratio(p1.size(), 0.0);
  for (std::size_t i = 0; i < p1.size(); ++i)
    if (target[static_cast<ItemId>(i)] > 0.0 && p1[i] >= kProbFloor)
      ratio[i] = target[static_cast<ItemId>(i)] / p1[i];
  const double inv_users = 1.0 / static_cast<double>(s1.n_users());
  std::vector<double> grad;
  grad.reserve(active.size());
  for (ItemId k : active) {
    if (k < 0 || k >= s1.n_item_slots())
      throw std::out_of_range("active item outside universe");
    double acc = 0.0;
    // Walk k's co-ownership neighborhood; the inner profile sum is
    // recomputed per user on purpose, which keeps the per-coordinate cost
    // proportional to the size of that neighborhood.
    for (UserId u : s1.users_of(k)) {
      double inner = 0.0;
      for (ItemId i : s1.items_of(u)) inner += ratio[i] * w[i];
      acc += inner / (sums[u] * sums[u]);
    }
    double g = acc * inv_users;
    if (target[k] > 0.0 && p1[k] >= kProbFloor) g -= target[k] / w[k];
    grad.push_back(g);
  }
  return grad;
}

std::vector<ItemId> select_active_items(const ItemDistribution& p0,
                                        const ItemDistribution& p1, int p) {
  if (p0.size() != p1.size())
    throw std::invalid_argument("select_active_items: size mismatch");
  std::vector<std::pair<double, ItemId>> dev;
  for (int i = 0; i < p0.size(); ++i) {
    const double d = std::abs(p0[i] - p1[i]);
    if (d > 0.0) dev.emplace_back(d, i);
  }
  std::sort(dev.begin(), dev.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (p > 0 && dev.size() > static_cast<std::size_t>(p)) dev.resize(p);
  std::vector<ItemId> active;
  active.reserve(dev.size());
  for (const auto& [d, i] : dev) active.push_back(i);
  std::sort(active.begin(), active.end());
  return active;
}

namespace {

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// True when every item present in s1 belongs to `active` (sorted), i.e. no
// weight is pinned and the scale gauge is free.
bool covers_present_items(const Snapshot& s1, std::span<const ItemId> active) {
  for (ItemId i : s1.items())
    if (!std::binary_search(active.begin(), active.end(), i)) return false;
  return true;
}

}  // namespace

OptimizeResult optimize_weights(const ItemDistribution& target,
                                const Snapshot& s1,
                                const OptimizerConfig& config) {
  check_eligible(s1);
  if (target.size() != s1.n_item_slots())
    throw std::invalid_argument("target distribution does not match item universe");
  if (config.max_iters < 0 || config.step_init <= 0.0 ||
      config.backtrack <= 0.0 || config.backtrack >= 1.0 ||
      config.armijo_c <= 0.0 || config.armijo_c >= 1.0)
    throw std::invalid_argument("optimize_weights: bad optimizer parameters");

  OptimizeResult res{WeightVector(s1.n_item_slots()), {}, false, 0, 0.0, 0.0, {}};
  const ItemDistribution p1 = item_distribution(s1, res.weights);
  res.active = select_active_items(target, p1, config.p);

  double d = kl_divergence(target, s1, res.weights, &res.floored_terms);
  res.initial_objective = d;
  res.trace.push_back({0, d, 0.0, 0.0});
  if (res.active.empty()) {
    res.converged = true;
    res.final_objective = d;
    return res;
  }

  auto grad = kl_gradient(target, s1, res.weights, res.active);
  res.trace[0].grad_norm = l2_norm(grad);

  double step = config.step_init;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const double gnorm = l2_norm(grad);
    if (gnorm <= config.grad_tol) {
      res.converged = true;
      break;
    }
    // Steepest descent in log-weights: w <- w * exp(-eta * w * g). The
    // chain rule turns the gradient into w*g, and dir_sq is its squared
    // norm for the Armijo test.
    double dir_sq = 0.0;
    for (std::size_t j = 0; j < res.active.size(); ++j) {
      const double wg = res.weights[res.active[j]] * grad[j];
      dir_sq += wg * wg;
    }
    double eta = step;
    bool accepted = false;
    WeightVector trial = res.weights;
    double d_trial = 0.0;
    for (int bt = 0; bt <= config.max_backtracks; ++bt) {
      for (std::size_t j = 0; j < res.active.size(); ++j) {
        const ItemId k = res.active[j];
        const double expo =
            std::clamp(-eta * res.weights[k] * grad[j], -30.0, 30.0);
        trial.set(k, res.weights[k] * std::exp(expo));
      }
      d_trial = kl_divergence(target, s1, trial);
      if (d_trial <= d - config.armijo_c * eta * dir_sq) {
        accepted = true;
        break;
      }
      eta *= config.backtrack;
    }
    if (!accepted) break;  // no acceptable step along this direction
    const double prev = d;
    res.weights = trial;
    d = d_trial;
    res.trace.push_back({iter, d, gnorm, eta});
    // Warm start: grow from the last accepted step so flat directions (for
    // example a weight that has to be driven towards zero) keep geometric
    // progress; backtracking pulls the step back down when curvature bites.
    step = std::min(eta / config.backtrack, 1e12);
    if (prev - d <= config.d_rel_tol * std::max(std::abs(prev), 1e-30)) {
      res.converged = true;
      break;
    }
    grad = kl_gradient(target, s1, res.weights, res.active);
  }

  if (covers_present_items(s1, res.active)) {
    double log_sum = 0.0;
    for (ItemId k : res.active) log_sum += std::log(res.weights[k]);
    const double geo = std::exp(log_sum / static_cast<double>(res.active.size()));
    for (ItemId k : res.active) res.weights.set(k, res.weights[k] / geo);
  }
  res.final_objective =
      kl_divergence(target, s1, res.weights, &res.floored_terms);
  return res;
}

}  // namespace offeval
