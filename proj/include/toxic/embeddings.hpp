#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "toxic/text.hpp"

namespace toxic {

enum class EmbeddingFormat { glove, fasttext_vec };

// Pretrained word vectors, one row per word in file order.
class EmbeddingTable {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> words, Matrix vectors);

  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const Matrix& vectors() const { return vectors_; }

  // Null when absent.
  const double* find(const std::string& word) const;
  Eigen::Map<const Eigen::RowVectorXd> vector(std::size_t row) const {
    return {vectors_.row(static_cast<Eigen::Index>(row)).data(), vectors_.cols()};
  }

 private:
  std::vector<std::string> words_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingTable read_embeddings(std::istream& in, EmbeddingFormat format);
EmbeddingTable load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);

// GloVe-style text: word followed by space-separated values, full precision.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);

struct EmbeddingMatrix {
  EmbeddingTable::Matrix values;  // V x d, row-aligned with the vocabulary
  std::size_t found = 0;
  std::size_t missing = 0;

  double coverage() const {
    const auto total = found + missing;
    return total == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(total);
  }
};

inline constexpr double kEmbeddingInitRange = 0.05;

// Row 0 (PAD) is zero. Rows for tokens in the table are copied; every other
// row, OOV included, is uniform(-0.05, 0.05) from a stream keyed by (seed, row).
EmbeddingMatrix build_matrix(const Vocabulary& vocab, const EmbeddingTable& table, std::uint64_t seed);

// Same as build_matrix with an empty table of the given width.
EmbeddingMatrix random_matrix(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed);

}  // namespace toxic
