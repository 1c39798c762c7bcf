#include "toxic/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "toxic/error.hpp"
#include "toxic/random.hpp"

namespace toxic {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
  double value = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": invalid number '" + std::string(s) + "'");
  }
  return value;
}

std::size_t parse_count(std::string_view s, const char* what) {
  std::size_t value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(std::string("header ") + what + " '" + std::string(s) + "' is not an integer");
  }
  return value;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Matrix vectors)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows()) {
    throw FormatError("embedding word count does not match vector rows");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

const double* EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? nullptr : vectors_.row(static_cast<Eigen::Index>(it->second)).data();
}

EmbeddingTable read_embeddings(std::istream& in, EmbeddingFormat format) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::size_t declared_count = 0;
  bool have_header = false;

  if (format == EmbeddingFormat::fasttext_vec) {
    if (!std::getline(in, line)) throw FormatError("missing '<count> <dim>' header line");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw FormatError("header line must be '<count> <dim>'");
    declared_count = parse_count(fields[0], "count");
    dim = parse_count(fields[1], "dim");
    if (dim == 0) throw FormatError("header declares zero dimensions");
    have_header = true;
  }

  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_map<std::string, bool> seen;
  std::size_t data_lines = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    ++data_lines;
    if (have_header && data_lines == 1 && fields.size() != dim + 1) {
      throw FormatError("header declares dim " + std::to_string(dim) + " but line " + std::to_string(line_no) +
                        " has " + std::to_string(fields.size() - 1) + " values");
    }
    if (dim == 0) {
      if (fields.size() < 2) throw ParseError("line " + std::to_string(line_no) + ": no vector values");
      dim = fields.size() - 1;
    }
    if (fields.size() != dim + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " values, found " + std::to_string(fields.size() - 1));
    }
    std::string word(fields[0]);
    // Values are validated even for duplicates; the first occurrence wins.
    std::vector<double> row(dim);
    for (std::size_t k = 0; k < dim; ++k) row[k] = parse_double(fields[k + 1], line_no);
    if (!seen.emplace(word, true).second) continue;
    words.push_back(std::move(word));
    values.insert(values.end(), row.begin(), row.end());
  }

  if (have_header && data_lines != declared_count) {
    throw FormatError("header declares " + std::to_string(declared_count) + " vectors, file has " +
                      std::to_string(data_lines));
  }

  EmbeddingTable::Matrix vectors(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(dim));
  if (!words.empty()) {
    vectors = Eigen::Map<EmbeddingTable::Matrix>(values.data(), vectors.rows(), vectors.cols());
  }
  return EmbeddingTable(std::move(words), std::move(vectors));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_embeddings(in, format);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  std::array<char, 32> buf{};
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i];
    for (double v : table.vector(i)) {
      auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
      out << ' ' << std::string_view(buf.data(), static_cast<std::size_t>(ptr - buf.data()));
    }
    out << '\n';
  }
}

EmbeddingMatrix build_matrix(const Vocabulary& vocab, const EmbeddingTable& table, std::uint64_t seed) {
  if (table.dim() == 0) throw ParamError("embedding dimension must be positive");
  const auto V = static_cast<Eigen::Index>(vocab.size());
  const auto d = static_cast<Eigen::Index>(table.dim());

  EmbeddingMatrix m;
  m.values = EmbeddingTable::Matrix::Zero(V, d);
  for (Eigen::Index r = 0; r < V; ++r) {
    if (r == Vocabulary::kPad) {
      ++m.missing;
      continue;
    }
    const double* found = r == Vocabulary::kOov ? nullptr : table.find(vocab.token(static_cast<std::int32_t>(r)));
    if (found != nullptr) {
      m.values.row(r) = Eigen::Map<const Eigen::RowVectorXd>(found, d);
      ++m.found;
    } else {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
      for (Eigen::Index k = 0; k < d; ++k) m.values(r, k) = rng.uniform(-kEmbeddingInitRange, kEmbeddingInitRange);
      ++m.missing;
    }
  }
  return m;
}

EmbeddingMatrix random_matrix(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed) {
  return build_matrix(vocab, EmbeddingTable({}, EmbeddingTable::Matrix(0, static_cast<Eigen::Index>(dim))), seed);
}

}  // namespace toxic
