#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "offeval/snapshot.hpp"
#include "offeval/types.hpp"
#include "offeval/weights.hpp"

namespace offeval {

// Probabilities below this floor are clamped inside the KL objective so
// items that vanished between the two snapshots cannot blow it up.
inline constexpr double kProbFloor = 1e-12;

// Weighted item marginal under uniform user choice:
//   P(i | w) = (1/#U) * sum over users u holding i of w_i / S_u,
// with S_u the weight sum of u's profile and #U the number of users with a
// non-empty profile. Throws if the snapshot has no such user.
ItemDistribution item_distribution(const Snapshot& s, const WeightVector& w);

// Joint marginal of drawing i and k in two independent draws from the same
// uniformly chosen user:
//   P(i, k | w) = (1/#U) * sum over users holding both of w_i * w_k / S_u^2.
double pair_distribution(const Snapshot& s, const WeightVector& w, ItemId i,
                         ItemId k);

// KL divergence D(target || P(.|w)) over the support of `target`, natural
// log, probabilities floored at kProbFloor. `floored_terms`, when given,
// receives the number of support items whose weighted probability hit the
// floor.
double kl_divergence(const ItemDistribution& target, const Snapshot& s1,
                     const WeightVector& w, int* floored_terms = nullptr);

// Analytic gradient of kl_divergence with respect to the weights of the
// items in `active`; entries align with `active`. Matches central finite
// differences of the floored objective.
std::vector<double> kl_gradient(const ItemDistribution& target,
                                const Snapshot& s1, const WeightVector& w,
                                std::span<const ItemId> active);

// The p items with the largest absolute deviation |p0(i) - p1(i)|, ties to
// the smaller id. p <= 0 or p >= support means every item with a non-zero
// deviation.
std::vector<ItemId> select_active_items(const ItemDistribution& p0,
                                        const ItemDistribution& p1, int p);

struct OptimizerConfig {
  int p = 0;  // active-set size; <= 0 selects every deviating item
  int max_iters = 200;
  double step_init = 1.0;  // first trial step; later iterations warm-start
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double grad_tol = 1e-7;    // stop when the active gradient norm falls below
  double d_rel_tol = 1e-10;  // stop when D improves less than this, relatively
};

struct TraceRow {
  int iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct OptimizeResult {
  WeightVector weights;
  std::vector<TraceRow> trace;
  bool converged = false;
  int floored_terms = 0;      // at the returned weights
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<ItemId> active;
};

// Minimizes the KL objective over the weights of the selected active items,
// every other weight pinned at 1. Multiplicative updates (steepest descent
// in log-weights) with Armijo backtracking keep weights positive; the
// objective is scale-invariant, so when the active set covers every item
// present in s1 the result is renormalized to geometric mean 1 over the
// active set. Deterministic: no randomness, fixed iteration order.
OptimizeResult optimize_weights(const ItemDistribution& target,
                                const Snapshot& s1,
                                const OptimizerConfig& config = {});

}  // namespace offeval
