#pragma once

#include <span>
#include <string>
#include <vector>

#include "offeval/interaction_log.hpp"
#include "offeval/types.hpp"

namespace offeval {

// One strictly positive finite weight per item slot. Defaults to all ones,
// which reproduces unweighted behaviour everywhere it is accepted.
class WeightVector {
 public:
  explicit WeightVector(int n_item_slots);
  static WeightVector ones(int n_item_slots) { return WeightVector(n_item_slots); }

  double operator[](ItemId i) const { return values_[check(i)]; }
  void set(ItemId i, double w);
  int size() const { return static_cast<int>(values_.size()); }
  std::span<const double> values() const { return values_; }
  bool all_ones() const;

  // CSV `item_id,weight` with external labels from `log`.
  void save(const std::string& path, const InteractionLog& log) const;
  static WeightVector load(const std::string& path, const InteractionLog& log);

 private:
  std::size_t check(ItemId i) const;
  std::vector<double> values_;
};

// Probability mass over item slots. Entries are non-negative and sum to 1
// (tolerance 1e-9); the empty distribution (all zeros) is allowed and stands
// for "no data".
class ItemDistribution {
 public:
  explicit ItemDistribution(std::vector<double> probs);

  double operator[](ItemId i) const { return probs_[check(i)]; }
  int size() const { return static_cast<int>(probs_.size()); }
  double sum() const;
  std::span<const double> probs() const { return probs_; }

 private:
  std::size_t check(ItemId i) const;
  std::vector<double> probs_;
};

}  // namespace offeval
