#include "toxic/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string_view>

#include <json.hpp>

#include "toxic/error.hpp"

namespace toxic {
namespace {

using json = nlohmann::json;

constexpr std::string_view kModelMagic{"TXMODEL\0", 8};
constexpr std::string_view kCorpusMagic{"TXCORPUS", 8};

// Little-endian primitives.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

  template <typename T>
  void uint(T v) {
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, sizeof(T));
  }

  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void i32(std::int32_t v) { uint(static_cast<std::uint32_t>(v)); }

  void string(std::string_view s) {
    uint(static_cast<std::uint64_t>(s.size()));
    bytes(s);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  std::string_view bytes(std::size_t n) {
    if (n > data_.size() - pos_) throw IntegrityError("file is truncated");
    std::string_view s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  template <typename T>
  T uint() {
    const auto b = bytes(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  std::int32_t i32() { return static_cast<std::int32_t>(uint<std::uint32_t>()); }

  std::string string() {
    const auto n = uint<std::uint64_t>();
    if (n > data_.size() - pos_) throw IntegrityError("file is truncated");
    return std::string(bytes(static_cast<std::size_t>(n)));
  }

  std::size_t remaining() const { return data_.size() - pos_; }

  void expect_end() const {
    if (pos_ != data_.size()) throw IntegrityError("unexpected trailing bytes");
  }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

std::string slurp(std::istream& in) { return std::string{std::istreambuf_iterator<char>(in), {}}; }

void check_header(Reader& r, std::string_view magic, std::uint32_t version, const char* what) {
  std::string_view got;
  try {
    got = r.bytes(magic.size());
  } catch (const IntegrityError&) {
    throw FormatError(std::string("not a ") + what + " file");
  }
  if (got != magic) throw FormatError(std::string("not a ") + what + " file");
  const auto v = r.uint<std::uint32_t>();
  if (v != version) {
    throw FormatError(std::string("unsupported ") + what + " format version " + std::to_string(v) + " (expected " +
                      std::to_string(version) + ")");
  }
}

json parse_metadata(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("metadata is not valid JSON: ") + e.what());
  }
}

json vocab_json(const Vocabulary& v) {
  return {{"tokens", std::vector<std::string>(v.tokens().begin() + 2, v.tokens().end())},
          {"frequencies", std::vector<std::uint64_t>(v.frequencies().begin() + 2, v.frequencies().end())}};
}

Vocabulary vocab_from_json(const json& j) {
  return Vocabulary::from_tokens(j.at("tokens").get<std::vector<std::string>>(),
                                 j.at("frequencies").get<std::vector<std::uint64_t>>());
}

json model_config_json(const ModelConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"maxlen", c.maxlen},
          {"vocab_size", c.vocab_size},
          {"embedding_dim", c.embedding_dim},
          {"filters", c.filters},
          {"kernel", c.kernel},
          {"dense_units", c.dense_units},
          {"hidden", c.hidden},
          {"seed", c.seed},
          {"embedding", to_string(c.embedding)},
          {"trainable_embedding", c.trainable_embedding},
          {"nb",
           {{"ngram_range", {c.nb.ngrams.lo, c.nb.ngrams.hi}},
            {"max_features", c.nb.max_features},
            {"alpha", c.nb.alpha}}}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.kind = parse_model_kind(j.at("kind").get<std::string>());
  c.maxlen = j.at("maxlen").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.filters = j.at("filters").get<std::size_t>();
  c.kernel = j.at("kernel").get<std::size_t>();
  c.dense_units = j.at("dense_units").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.embedding = parse_embedding_source(j.at("embedding").get<std::string>());
  c.trainable_embedding = j.at("trainable_embedding").get<bool>();
  const auto& nb = j.at("nb");
  c.nb.ngrams = {nb.at("ngram_range").at(0).get<std::size_t>(), nb.at("ngram_range").at(1).get<std::size_t>()};
  c.nb.max_features = nb.at("max_features").get<std::size_t>();
  c.nb.alpha = nb.at("alpha").get<double>();
  return c;
}

json train_config_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"validation_fraction", t.validation_fraction},
          {"shuffle_seed", t.shuffle_seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig t;
  t.epochs = j.at("epochs").get<std::size_t>();
  t.batch_size = j.at("batch_size").get<std::size_t>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.validation_fraction = j.at("validation_fraction").get<double>();
  t.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
  return t;
}

struct Array {
  std::string name;
  std::vector<std::uint64_t> shape;
  const float* data = nullptr;  // for writing
  std::vector<float> values;    // for reading
};

template <typename Derived>
Array view(std::string name, std::vector<std::uint64_t> shape, const Eigen::DenseBase<Derived>& m) {
  static_assert(std::is_same_v<typename Derived::Scalar, float>);
  static_assert(Derived::IsRowMajor || Derived::ColsAtCompileTime == 1 || Derived::RowsAtCompileTime == 1);
  return Array{std::move(name), std::move(shape), m.derived().data(), {}};
}

std::vector<Array> arrays_of(const TextModel& model) {
  std::vector<Array> out;
  std::visit(
      [&](const auto& clf) {
        using T = std::decay_t<decltype(clf)>;
        if constexpr (std::is_same_v<T, NbPipeline>) {
          const auto F = static_cast<std::uint64_t>(clf.model.dim());
          out.push_back(view("nb.log_prior", {kNumLabels, 2}, clf.model.log_prior));
          out.push_back(view("nb.feature_log_prob", {kNumLabels, 2, F}, clf.model.feature_log_prob));
        } else {
          for (const auto& p : clf.params()) {
            out.push_back(view(p.name,
                               {static_cast<std::uint64_t>(p.value.rows()), static_cast<std::uint64_t>(p.value.cols())},
                               p.value));
          }
        }
      },
      model.classifier);
  return out;
}

std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > (std::uint64_t{1} << 40) / d) throw IntegrityError("array shape is implausibly large");
    n *= d;
  }
  return n;
}

nn::Mat<float> to_matrix(const Array& a, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) != a.values.size()) {
    throw IntegrityError("array '" + a.name + "' has the wrong element count");
  }
  return Eigen::Map<const nn::Mat<float>>(a.values.data(), rows, cols);
}

}  // namespace

void save_model(const TextModel& model, std::ostream& out) {
  const auto arrays = arrays_of(model);
  json meta;
  meta["format_version"] = kModelFormatVersion;
  meta["kind"] = to_string(model.kind());
  meta["labels"] = std::vector<std::string>(kLabelNames.begin(), kLabelNames.end());
  meta["model_config"] = model_config_json(model.model_config);
  meta["train_config"] = train_config_json(model.train_config);
  meta["preprocess"] = {{"maxlen", model.encoder.maxlen}, {"vocabulary", vocab_json(model.encoder.vocab)}};
  meta["embedding_coverage"] = {{"found", model.embedding_found}, {"missing", model.embedding_missing}};
  if (const auto* nb = std::get_if<NbPipeline>(&model.classifier)) {
    meta["tfidf"] = {{"ngram_range", {nb->vectorizer.ngram_range().lo, nb->vectorizer.ngram_range().hi}},
                     {"features", nb->vectorizer.features()},
                     {"idf", std::vector<double>(nb->vectorizer.idf().begin(), nb->vectorizer.idf().end())}};
    meta["nb"] = {{"alpha", nb->model.alpha}};
  }
  json listing = json::array();
  for (const auto& a : arrays) listing.push_back({{"name", a.name}, {"shape", a.shape}});
  meta["arrays"] = listing;

  Writer w(out);
  w.bytes(kModelMagic);
  w.uint(kModelFormatVersion);
  w.string(meta.dump());
  w.uint(static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    w.uint(static_cast<std::uint32_t>(a.name.size()));
    w.bytes(a.name);
    w.uint(static_cast<std::uint32_t>(a.shape.size()));
    for (auto d : a.shape) w.uint(d);
    const auto n = element_count(a.shape);
    for (std::uint64_t i = 0; i < n; ++i) w.f32(a.data[i]);
  }
  if (!out) throw DataError("failed to write model");
}

void save_model(const TextModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save_model(model, out);
}

TextModel load_model(std::istream& in) {
  Reader r(slurp(in));
  check_header(r, kModelMagic, kModelFormatVersion, "model");
  const json meta = parse_metadata(r.string());

  std::vector<Array> arrays(r.uint<std::uint32_t>());
  for (auto& a : arrays) {
    a.name = std::string(r.bytes(r.uint<std::uint32_t>()));
    const auto rank = r.uint<std::uint32_t>();
    if (rank == 0 || rank > 3) throw IntegrityError("array '" + a.name + "' has rank " + std::to_string(rank));
    for (std::uint32_t k = 0; k < rank; ++k) a.shape.push_back(r.uint<std::uint64_t>());
    const auto n = element_count(a.shape);
    if (n > r.remaining() / sizeof(float)) throw IntegrityError("array '" + a.name + "' is truncated");
    a.values.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < n; ++i) a.values.push_back(r.f32());
  }
  r.expect_end();

  try {
    if (meta.at("format_version").get<std::uint32_t>() != kModelFormatVersion) {
      throw FormatError("metadata format version mismatch");
    }
    const auto labels = meta.at("labels").get<std::vector<std::string>>();
    if (!std::equal(labels.begin(), labels.end(), kLabelNames.begin(), kLabelNames.end())) {
      throw IntegrityError("label order differs from the canonical order");
    }
    const auto& listing = meta.at("arrays");
    if (listing.size() != arrays.size()) throw IntegrityError("payload array count does not match metadata");
    for (std::size_t i = 0; i < arrays.size(); ++i) {
      if (listing[i].at("name").get<std::string>() != arrays[i].name ||
          listing[i].at("shape").get<std::vector<std::uint64_t>>() != arrays[i].shape) {
        throw IntegrityError("payload array '" + arrays[i].name + "' does not match metadata");
      }
    }

    TextModel model;
    model.model_config = model_config_from_json(meta.at("model_config"));
    model.train_config = train_config_from_json(meta.at("train_config"));
    model.encoder.maxlen = meta.at("preprocess").at("maxlen").get<std::size_t>();
    model.encoder.vocab = vocab_from_json(meta.at("preprocess").at("vocabulary"));
    model.embedding_found = meta.at("embedding_coverage").at("found").get<std::size_t>();
    model.embedding_missing = meta.at("embedding_coverage").at("missing").get<std::size_t>();
    if (meta.at("kind").get<std::string>() != to_string(model.kind())) {
      throw IntegrityError("model kind disagrees with its config");
    }

    if (model.kind() == ModelKind::nb) {
      const auto& t = meta.at("tfidf");
      const auto idf = t.at("idf").get<std::vector<double>>();
      NgramRange range{t.at("ngram_range").at(0).get<std::size_t>(), t.at("ngram_range").at(1).get<std::size_t>()};
      TfIdfVectorizer vectorizer(range, t.at("features").get<std::vector<std::string>>(),
                                 Eigen::Map<const Eigen::VectorXd>(idf.data(), static_cast<Eigen::Index>(idf.size())));
      if (arrays.size() != 2 || arrays[0].name != "nb.log_prior" || arrays[1].name != "nb.feature_log_prob" ||
          arrays[0].shape != std::vector<std::uint64_t>{kNumLabels, 2} ||
          arrays[1].shape != std::vector<std::uint64_t>{kNumLabels, 2, vectorizer.dim()}) {
        throw IntegrityError("Naive Bayes payload does not match its vectorizer");
      }
      NaiveBayesModel<float> nb;
      nb.alpha = meta.at("nb").at("alpha").get<double>();
      nb.log_prior = to_matrix(arrays[0], kNumLabels, 2);
      nb.feature_log_prob = to_matrix(arrays[1], 2 * kNumLabels, static_cast<Eigen::Index>(vectorizer.dim()));
      model.classifier = NbPipeline{std::move(vectorizer), std::move(nb)};
    } else {
      if (model.model_config.vocab_size != model.encoder.vocab.size()) {
        throw IntegrityError("embedding rows do not match the vocabulary");
      }
      const auto layout = parameter_layout(model.model_config);
      if (layout.size() != arrays.size()) throw IntegrityError("parameter count does not match the model config");
      nn::ParameterSet<float> params;
      for (std::size_t i = 0; i < layout.size(); ++i) {
        if (arrays[i].shape != std::vector<std::uint64_t>{static_cast<std::uint64_t>(layout[i].rows),
                                                          static_cast<std::uint64_t>(layout[i].cols)} ||
            arrays[i].name != layout[i].name) {
          throw IntegrityError("parameter '" + arrays[i].name + "' does not match the model config");
        }
        params.add(arrays[i].name, to_matrix(arrays[i], layout[i].rows, layout[i].cols));
      }
      if (model.kind() == ModelKind::cnn) {
        model.classifier = CnnClassifier<float>(model.model_config, std::move(params));
      } else {
        model.classifier = LstmClassifier<float>(model.model_config, std::move(params));
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed metadata: ") + e.what());
  }
}

TextModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load_model(in);
}

void save_corpus(const Corpus& corpus, std::ostream& out) {
  json meta;
  meta["format_version"] = kCorpusFormatVersion;
  meta["maxlen"] = corpus.maxlen;
  meta["count"] = corpus.size();
  meta["has_labels"] = corpus.labels.has_value();
  meta["vocabulary"] = vocab_json(corpus.vocab);
  meta["ids"] = corpus.ids;
  meta["texts"] = corpus.texts;

  Writer w(out);
  w.bytes(kCorpusMagic);
  w.uint(kCorpusFormatVersion);
  w.string(meta.dump());
  for (const auto& seq : corpus.sequences) {
    for (auto id : seq) w.i32(id);
  }
  if (corpus.labels) {
    for (const auto& y : *corpus.labels) w.bytes(std::string_view(reinterpret_cast<const char*>(y.data()), y.size()));
  }
  if (!out) throw DataError("failed to write corpus");
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save_corpus(corpus, out);
}

Corpus load_corpus(std::istream& in) {
  Reader r(slurp(in));
  check_header(r, kCorpusMagic, kCorpusFormatVersion, "corpus");
  const json meta = parse_metadata(r.string());
  Corpus c;
  try {
    c.maxlen = meta.at("maxlen").get<std::size_t>();
    c.vocab = vocab_from_json(meta.at("vocabulary"));
    c.ids = meta.at("ids").get<std::vector<std::string>>();
    c.texts = meta.at("texts").get<std::vector<std::string>>();
    const auto count = meta.at("count").get<std::size_t>();
    if (c.ids.size() != count || c.texts.size() != count) throw IntegrityError("corpus row count mismatch");
    const auto V = static_cast<std::int32_t>(c.vocab.size());
    c.sequences.resize(count, EncodedSequence(c.maxlen));
    for (auto& seq : c.sequences) {
      for (auto& id : seq) {
        id = r.i32();
        if (id < 0 || id >= V) throw IntegrityError("corpus token index out of range");
      }
    }
    if (meta.at("has_labels").get<bool>()) {
      c.labels.emplace(count);
      for (auto& y : *c.labels) {
        const auto b = r.bytes(kNumLabels);
        for (std::size_t l = 0; l < kNumLabels; ++l) {
          if (b[l] != 0 && b[l] != 1) throw IntegrityError("corpus label byte is not 0 or 1");
          y[l] = static_cast<std::uint8_t>(b[l]);
        }
      }
    }
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed corpus metadata: ") + e.what());
  }
  r.expect_end();
  return c;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load_corpus(in);
}

}  // namespace toxic
