#include "toxic/text.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "toxic/error.hpp"

namespace toxic {
namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

// RFC 4180 reader. Accepts LF or CRLF record separators; quoted fields keep
// embedded separators and line breaks verbatim.
std::vector<CsvRecord> parse_csv(std::string_view data) {
  std::vector<CsvRecord> records;
  if (data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);

  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = data.size();
  while (i < n) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool end_of_record = false;
    while (!end_of_record) {
      field.clear();
      if (i < n && data[i] == '"') {
        ++i;
        for (;;) {
          if (i >= n) {
            throw ParseError("unterminated quoted field starting on line " +
                             std::to_string(rec.line));
          }
          const char c = data[i++];
          if (c == '"') {
            if (i < n && data[i] == '"') {
              field.push_back('"');
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
          }
        }
        if (i < n && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
          throw ParseError("unexpected character after closing quote on line " +
                           std::to_string(line));
        }
      } else {
        while (i < n && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
          field.push_back(data[i++]);
        }
      }
      rec.fields.push_back(field);
      if (i >= n) {
        end_of_record = true;
      } else if (data[i] == ',') {
        ++i;
      } else {
        if (data[i] == '\r') ++i;
        if (i < n && data[i] == '\n') ++i;
        ++line;
        end_of_record = true;
      }
    }
    // A blank line yields a single empty field; skip it.
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

bool needs_quoting(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

constexpr bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
constexpr bool is_digit(char c) { return c >= '0' && c <= '9'; }
constexpr bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char unleet(char c) {
  switch (c) {
    case '0': return 'o';
    case '1': return 'i';
    case '3': return 'e';
    case '4': return 'a';
    case '5': return 's';
    case '7': return 't';
    default: return c;
  }
}

// Replaces [begin, end) with a single space.
void blank(std::string& s, std::size_t begin, std::size_t end) {
  s.replace(begin, end - begin, " ");
}

}  // namespace

std::vector<LabeledComment> read_dataset(std::istream& in, bool expect_labels) {
  const std::string data{std::istreambuf_iterator<char>(in), {}};
  auto records = parse_csv(data);
  if (records.empty()) throw SchemaError("missing header row");

  const auto& header = records.front().fields;
  auto column = [&](std::string_view name, bool required) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw SchemaError("missing required column '" + std::string(name) + "'");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t id_col = *column("id", true);
  const std::size_t text_col = *column("comment_text", true);
  std::array<std::size_t, kNumLabels> label_cols{};
  if (expect_labels) {
    for (std::size_t k = 0; k < kNumLabels; ++k) label_cols[k] = *column(kLabelNames[k], true);
  }

  std::vector<LabeledComment> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "data row " + std::to_string(r) + " (line " + std::to_string(rec.line) + ")";
    if (rec.fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(rec.fields.size()));
    }
    LabeledComment row;
    row.id = rec.fields[id_col];
    if (row.id.empty()) throw DataError(where + ": empty id");
    row.text = rec.fields[text_col];
    if (expect_labels) {
      LabelVector labels{};
      for (std::size_t k = 0; k < kNumLabels; ++k) {
        const auto& v = rec.fields[label_cols[k]];
        if (v == "0") {
          labels[k] = 0;
        } else if (v == "1") {
          labels[k] = 1;
        } else {
          throw DataError(where + ": label '" + std::string(kLabelNames[k]) + "' has value '" + v +
                          "', expected 0 or 1");
        }
      }
      row.labels = labels;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LabeledComment> load_dataset(const std::filesystem::path& path, bool expect_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_dataset(in, expect_labels);
}

void write_dataset(std::ostream& out, const std::vector<LabeledComment>& rows) {
  const bool with_labels =
      !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.labels.has_value(); });
  out << "id,comment_text";
  if (with_labels) {
    for (auto name : kLabelNames) out << ',' << name;
  }
  out << '\n';
  for (const auto& row : rows) {
    write_field(out, row.id);
    out << ',';
    write_field(out, row.text);
    if (with_labels) {
      for (auto v : *row.labels) out << ',' << static_cast<int>(v);
    }
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const std::vector<LabeledComment>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_dataset(out, rows);
}

std::string normalize(std::string_view text) {
  std::string s(text);
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }

  // URLs run from their prefix to the next whitespace; mentions are '@'
  // followed by word characters.
  for (std::size_t i = 0; i < s.size();) {
    const std::string_view rest(s.data() + i, s.size() - i);
    std::size_t span = 0;
    const bool boundary = i == 0 || !(is_lower(s[i - 1]) || is_digit(s[i - 1]));
    if (boundary && (rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www."))) {
      while (span < rest.size() && !is_space(rest[span])) ++span;
    } else if (rest[0] == '@') {
      span = 1;
      while (span < rest.size() && (is_lower(rest[span]) || is_digit(rest[span]) || rest[span] == '_')) ++span;
      if (span == 1) span = 0;
    }
    if (span > 0) blank(s, i, i + span);
    ++i;
  }

  for (std::size_t i = 0; i < s.size();) {
    if (is_space(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool has_alpha = false;
    while (j < s.size() && !is_space(s[j])) has_alpha |= is_lower(s[j++]);
    if (has_alpha) {
      for (std::size_t k = i; k < j; ++k) s[k] = unleet(s[k]);
    }
    i = j;
  }

  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_lower(c) || is_digit(c) || c == '\'') {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < normalized.size()) {
    while (i < normalized.size() && is_space(normalized[i])) ++i;
    std::size_t j = i;
    while (j < normalized.size() && !is_space(normalized[j])) ++j;
    if (j > i) tokens.emplace_back(normalized.substr(i, j - i));
    i = j;
  }
  return tokens;
}

Vocabulary::Vocabulary() {
  push(std::string(kPadToken), 0);
  push(std::string(kOovToken), 0);
}

void Vocabulary::push(std::string token, std::uint64_t frequency) {
  index_.emplace(token, static_cast<std::int32_t>(tokens_.size()));
  tokens_.push_back(std::move(token));
  frequencies_.push_back(frequency);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::vector<std::uint64_t> frequencies) {
  if (tokens.size() != frequencies.size()) {
    throw FormatError("vocabulary token and frequency lists differ in length");
  }
  Vocabulary v;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == kPadToken || tokens[i] == kOovToken || v.index_.contains(tokens[i])) {
      throw FormatError("vocabulary token '" + tokens[i] + "' is reserved or duplicated");
    }
    v.push(std::move(tokens[i]), frequencies[i]);
  }
  return v;
}

std::int32_t Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end() || it->second < 2) return kOov;
  return it->second;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus, std::size_t max_size,
                            std::uint64_t min_count) {
  if (max_size < 2) throw ParamError("vocabulary max_size must be at least 2");

  struct Entry {
    std::uint64_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Entry> counts;
  std::vector<std::string> order;
  for (const auto& doc : corpus) {
    for (const auto& tok : doc) {
      if (tok == Vocabulary::kPadToken || tok == Vocabulary::kOovToken) continue;
      auto [it, inserted] = counts.try_emplace(tok, Entry{0, order.size()});
      if (inserted) order.push_back(tok);
      ++it->second.count;
    }
  }

  std::vector<const std::string*> ranked;
  for (const auto& tok : order) {
    if (counts[tok].count >= min_count) ranked.push_back(&tok);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string* a, const std::string* b) {
    return counts[*a].count > counts[*b].count;
  });
  ranked.resize(std::min(ranked.size(), max_size - 2));

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> freqs;
  for (const auto* tok : ranked) {
    tokens.push_back(*tok);
    freqs.push_back(counts[*tok].count);
  }
  return Vocabulary::from_tokens(std::move(tokens), std::move(freqs));
}

std::vector<std::int32_t> encode(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.index_of(t));
  return ids;
}

EncodedSequence pad(const std::vector<std::int32_t>& ids, std::size_t maxlen) {
  if (maxlen < 1) throw ParamError("maxlen must be at least 1");
  EncodedSequence out(maxlen, Vocabulary::kPad);
  if (ids.size() >= maxlen) {
    std::copy(ids.end() - static_cast<std::ptrdiff_t>(maxlen), ids.end(), out.begin());
  } else {
    std::copy(ids.begin(), ids.end(), out.end() - static_cast<std::ptrdiff_t>(ids.size()));
  }
  return out;
}

EncodedSequence TextEncoder::operator()(std::string_view raw) const {
  return pad(encode(tokenize(normalize(raw)), vocab), maxlen);
}

}  // namespace toxic
