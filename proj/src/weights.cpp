#include "offeval/weights.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "offeval/text.hpp"

namespace offeval {

WeightVector::WeightVector(int n_item_slots) {
  if (n_item_slots < 0)
    throw std::invalid_argument("WeightVector: negative size");
  values_.assign(n_item_slots, 1.0);
}

void WeightVector::set(ItemId i, double w) {
  if (!std::isfinite(w) || w <= 0.0)
    throw std::invalid_argument("WeightVector: weight must be positive and finite");
  values_[check(i)] = w;
}

bool WeightVector::all_ones() const {
  for (double v : values_)
    if (v != 1.0) return false;
  return true;
}

std::size_t WeightVector::check(ItemId i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= values_.size())
    throw std::out_of_range("WeightVector: item id " + std::to_string(i) +
                            " out of range");
  return static_cast<std::size_t>(i);
}

void WeightVector::save(const std::string& path,
                        const InteractionLog& log) const {
  if (log.n_items() != size())
    throw std::invalid_argument("WeightVector::save: log universe mismatch");
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open weights file for write: " + path);
  out << "# offeval-weights v1\n";
  out << "item_id,weight\n";
  for (int i = 0; i < size(); ++i)
    out << log.item_label(i) << ',' << text::format_double(values_[i]) << '\n';
  if (!out) throw std::runtime_error("error while writing weights");
}

WeightVector WeightVector::load(const std::string& path,
                                const InteractionLog& log) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weights file: " + path);
  WeightVector w(log.n_items());
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = text::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (!saw_header) {
      if (sv != "item_id,weight")
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected 'item_id,weight' header");
      saw_header = true;
      continue;
    }
    auto fields = text::split(sv, ',');
    if (fields.size() != 2)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 2 fields");
    auto id = log.find_item(std::string(text::trim(fields[0])));
    if (!id)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown item id '" + fields[0] + "'");
    w.set(*id, text::parse_double(fields[1], "weight"));
  }
  if (!saw_header)
    throw std::runtime_error(path + ": missing 'item_id,weight' header");
  return w;
}

ItemDistribution::ItemDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0)
      throw std::invalid_argument(
          "ItemDistribution: entries must be non-negative and finite");
    total += p;
  }
  if (total != 0.0 && std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("ItemDistribution: entries sum to " +
                                text::format_double(total) + ", expected 1");
}

double ItemDistribution::sum() const {
  return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

std::size_t ItemDistribution::check(ItemId i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= probs_.size())
    throw std::out_of_range("ItemDistribution: item id " + std::to_string(i) +
                            " out of range");
  return static_cast<std::size_t>(i);
}

}  // namespace offeval
