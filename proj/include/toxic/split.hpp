#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace toxic {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded shuffle of 0..n-1; the last ceil(n * fraction) indices are held out.
// Throws ConfigError when either side would be empty.
Split holdout_split(std::size_t n, double validation_fraction, std::uint64_t seed);

// Seeded shuffle, then `folds` contiguous validation blocks.
std::vector<Split> kfold_splits(std::size_t n, std::size_t folds, std::uint64_t seed);

}  // namespace toxic
