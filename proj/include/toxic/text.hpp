#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "toxic/labels.hpp"

namespace toxic {

struct LabeledComment {
  std::string id;
  std::string text;
  std::optional<LabelVector> labels;  // absent for unlabeled rows
};

// Reads a Jigsaw-style CSV (RFC 4180, header row required). Columns are
// located by name; `id` and `comment_text` are always required, the six label
// columns only when `expect_labels` is set.
std::vector<LabeledComment> load_dataset(const std::filesystem::path& path,
                                         bool expect_labels);
std::vector<LabeledComment> read_dataset(std::istream& in, bool expect_labels);

// Writes the same schema back out. Labels are written when every row has them.
void write_dataset(std::ostream& out, const std::vector<LabeledComment>& rows);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<LabeledComment>& rows);

// Lowercases, drops URLs and @-mentions, undoes digit-for-letter substitutions
// inside words, and reduces everything else to [a-z0-9'] tokens separated by
// single spaces.
std::string normalize(std::string_view text);

std::vector<std::string> tokenize(std::string_view normalized);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kOov = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kOovToken = "<oov>";

  Vocabulary();

  // Rebuilds from an ordered token list (indices 2..) with their frequencies.
  static Vocabulary from_tokens(std::vector<std::string> tokens,
                                std::vector<std::uint64_t> frequencies);

  std::int32_t index_of(std::string_view token) const;
  const std::string& token(std::int32_t index) const { return tokens_.at(index); }
  std::uint64_t frequency(std::int32_t index) const { return frequencies_.at(index); }
  std::size_t size() const { return tokens_.size(); }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& frequencies() const { return frequencies_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.frequencies_ == b.frequencies_;
  }

 private:
  void push(std::string token, std::uint64_t frequency);

  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> frequencies_;
  std::unordered_map<std::string, std::int32_t> index_;
};

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus,
                            std::size_t max_size, std::uint64_t min_count = 1);

std::vector<std::int32_t> encode(const std::vector<std::string>& tokens,
                                 const Vocabulary& vocab);

// Fixed-length token indices; PAD only as a leading run.
using EncodedSequence = std::vector<std::int32_t>;

// Pre-pads with PAD or keeps the trailing `maxlen` ids.
EncodedSequence pad(const std::vector<std::int32_t>& ids, std::size_t maxlen);

// normalize -> tokenize -> encode -> pad under a fitted vocabulary.
struct TextEncoder {
  Vocabulary vocab;
  std::size_t maxlen = 200;

  EncodedSequence operator()(std::string_view raw) const;
};

}  // namespace toxic
