#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toxic/split.hpp"

namespace toxic {

// Parameter name -> candidate values, in declaration order.
struct GridSpec {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  void add(std::string name, std::vector<double> candidates);
  std::size_t size() const;  // number of configurations

  // `{"filters": [32, 64], "lr": [0.001]}`; key order is preserved.
  static GridSpec from_json(std::string_view text);
};

using GridConfig = std::vector<std::pair<std::string, double>>;

// Value of a named parameter, or `fallback` when the grid does not set it.
double config_value(const GridConfig& config, std::string_view name, double fallback);

// Trains on `split.train`, scores on `split.validation`; higher is better.
using FoldEvaluator = std::function<double(const GridConfig&, const Split&)>;

struct GridRow {
  std::size_t config_id = 0;  // enumeration index
  GridConfig config;
  std::vector<double> fold_metrics;
  double metric = 0.0;  // mean over folds
  std::size_t rank = 0;  // 1 = best; ties keep enumeration order
};

struct GridResult {
  std::vector<std::string> names;
  std::vector<GridRow> rows;  // enumeration order

  const GridRow& best() const;
  // Header `config_id,<names...>,metric,rank`, LF line endings.
  void write_csv(std::ostream& out) const;
};

// Enumerates the Cartesian product (last parameter varies fastest).
// folds >= 2 runs k-fold cross-validation; folds == 1 a single holdout with
// `holdout_fraction` held out.
GridResult grid_search(const GridSpec& spec, std::size_t n_examples, const FoldEvaluator& evaluate,
                       std::size_t folds = 3, std::uint64_t seed = 42, double holdout_fraction = 0.2);

// Shortest round-trip decimal text of a double.
std::string format_number(double v);

}  // namespace toxic
