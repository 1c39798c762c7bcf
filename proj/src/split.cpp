#include "toxic/split.hpp"

#include <cmath>
#include <numeric>

#include "toxic/error.hpp"
#include "toxic/random.hpp"

namespace toxic {
namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(mix_seed(seed));
  rng.shuffle(idx);
  return idx;
}

}  // namespace

Split holdout_split(std::size_t n, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
  const auto n_val = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * validation_fraction - 1e-9));
  if (n_val == 0 || n_val >= n) {
    throw ConfigError("holdout split of " + std::to_string(n) + " examples leaves an empty side");
  }
  auto idx = shuffled_indices(n, seed);
  Split s;
  s.train.assign(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(n_val));
  s.validation.assign(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
  return s;
}

std::vector<Split> kfold_splits(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("k-fold needs at least 2 folds");
  if (n < folds) throw ConfigError("cannot split " + std::to_string(n) + " examples into " + std::to_string(folds) + " folds");
  const auto idx = shuffled_indices(n, seed);
  std::vector<Split> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * n / folds;
    const std::size_t hi = (f + 1) * n / folds;
    for (std::size_t i = 0; i < n; ++i) {
      (i >= lo && i < hi ? out[f].validation : out[f].train).push_back(idx[i]);
    }
  }
  return out;
}

}  // namespace toxic
