#include "toxic/grid_search.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "toxic/error.hpp"

namespace toxic {

void GridSpec::add(std::string name, std::vector<double> candidates) {
  if (candidates.empty()) throw SpecError("grid parameter '" + name + "' has no values");
  if (std::find(names.begin(), names.end(), name) != names.end()) {
    throw SpecError("grid parameter '" + name + "' is listed twice");
  }
  names.push_back(std::move(name));
  values.push_back(std::move(candidates));
}

std::size_t GridSpec::size() const {
  if (names.empty()) return 0;
  std::size_t n = 1;
  for (const auto& v : values) n *= v.size();
  return n;
}

GridSpec GridSpec::from_json(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(std::string("grid file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpecError("grid file must be a JSON object of parameter -> array");
  GridSpec spec;
  for (const auto& [name, list] : doc.items()) {
    if (!list.is_array()) throw SpecError("grid parameter '" + name + "' must map to an array");
    std::vector<double> values;
    for (const auto& v : list) {
      if (!v.is_number()) throw SpecError("grid parameter '" + name + "' has a non-numeric value");
      values.push_back(v.get<double>());
    }
    spec.add(name, std::move(values));
  }
  if (spec.names.empty()) throw SpecError("grid is empty");
  return spec;
}

double config_value(const GridConfig& config, std::string_view name, double fallback) {
  for (const auto& [k, v] : config) {
    if (k == name) return v;
  }
  return fallback;
}

const GridRow& GridResult::best() const {
  for (const auto& r : rows) {
    if (r.rank == 1) return r;
  }
  throw SpecError("grid result is empty");
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void GridResult::write_csv(std::ostream& out) const {
  out << "config_id";
  for (const auto& n : names) out << ',' << n;
  out << ",metric,rank\n";
  for (const auto& r : rows) {
    out << r.config_id;
    for (const auto& [name, v] : r.config) out << ',' << format_number(v);
    out << ',' << format_number(r.metric) << ',' << r.rank << '\n';
  }
}

GridResult grid_search(const GridSpec& spec, std::size_t n_examples, const FoldEvaluator& evaluate,
                       std::size_t folds, std::uint64_t seed, double holdout_fraction) {
  if (spec.names.empty()) throw SpecError("grid is empty");
  for (std::size_t p = 0; p < spec.names.size(); ++p) {
    if (spec.values[p].empty()) throw SpecError("grid parameter '" + spec.names[p] + "' has no values");
  }
  if (folds == 0) throw SpecError("folds must be at least 1");

  const std::vector<Split> splits =
      folds == 1 ? std::vector<Split>{holdout_split(n_examples, holdout_fraction, seed)}
                 : kfold_splits(n_examples, folds, seed);

  GridResult result;
  result.names = spec.names;
  const std::size_t total = spec.size();
  std::vector<std::size_t> digit(spec.names.size(), 0);
  for (std::size_t id = 0; id < total; ++id) {
    GridRow row;
    row.config_id = id;
    for (std::size_t p = 0; p < spec.names.size(); ++p) row.config.emplace_back(spec.names[p], spec.values[p][digit[p]]);
    for (const auto& s : splits) row.fold_metrics.push_back(evaluate(row.config, s));
    row.metric = std::accumulate(row.fold_metrics.begin(), row.fold_metrics.end(), 0.0) /
                 static_cast<double>(row.fold_metrics.size());
    result.rows.push_back(std::move(row));

    // Odometer increment, last parameter fastest.
    for (std::size_t p = spec.names.size(); p-- > 0;) {
      if (++digit[p] < spec.values[p].size()) break;
      digit[p] = 0;
    }
  }

  std::vector<std::size_t> order(result.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double x = result.rows[a].metric;
                     const double y = result.rows[b].metric;
                     return !std::isnan(x) && (std::isnan(y) || x > y);
                   });
  for (std::size_t r = 0; r < order.size(); ++r) result.rows[order[r]].rank = r + 1;
  return result;
}

}  // namespace toxic
