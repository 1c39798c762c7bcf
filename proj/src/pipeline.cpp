#include "toxic/pipeline.hpp"

#include <cmath>

#include "toxic/error.hpp"

namespace toxic {

std::vector<Example> Corpus::examples() const {
  const auto& y = require_labels();
  std::vector<Example> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back({sequences[i], y[i]});
  return out;
}

const std::vector<LabelVector>& Corpus::require_labels() const {
  if (!labels) throw DataError("corpus has no labels");
  return *labels;
}

Corpus preprocess(const std::vector<LabeledComment>& rows, const PreprocessConfig& cfg) {
  Corpus c;
  c.maxlen = cfg.maxlen;
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(rows.size());
  const bool labeled = !rows.empty() && rows.front().labels.has_value();
  if (labeled) c.labels.emplace();
  for (const auto& row : rows) {
    if (row.labels.has_value() != labeled) throw DataError("row '" + row.id + "' disagrees on having labels");
    c.ids.push_back(row.id);
    c.texts.push_back(normalize(row.text));
    tokens.push_back(tokenize(c.texts.back()));
    if (labeled) c.labels->push_back(*row.labels);
  }
  c.vocab = build_vocabulary(tokens, cfg.vocab_size, cfg.min_count);
  for (const auto& t : tokens) c.sequences.push_back(pad(encode(t, c.vocab), cfg.maxlen));
  return c;
}

Probabilities TextModel::predict(std::string_view raw) const {
  return std::visit(
      [&](const auto& clf) -> Probabilities {
        using T = std::decay_t<decltype(clf)>;
        if constexpr (std::is_same_v<T, NbPipeline>) {
          return clf.predict_normalized(normalize(raw));
        } else {
          return toxic::predict(clf, encoder(raw));
        }
      },
      classifier);
}

std::vector<Probabilities> TextModel::predict_normalized(const std::vector<std::string>& normalized,
                                                         std::size_t workers) const {
  std::vector<Probabilities> out(normalized.size());
  std::visit(
      [&](const auto& clf) {
        using T = std::decay_t<decltype(clf)>;
        parallel_for(normalized.size(), workers, [&](std::size_t i) {
          if constexpr (std::is_same_v<T, NbPipeline>) {
            out[i] = clf.predict_normalized(normalized[i]);
          } else {
            out[i] = toxic::predict(clf, pad(encode(tokenize(normalized[i]), encoder.vocab), encoder.maxlen));
          }
        });
      },
      classifier);
  return out;
}

namespace {

template <typename T>
std::vector<T> select(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

EmbeddingMatrix embedding_for(const Corpus& corpus, const ModelConfig& cfg, const EmbeddingTable* pretrained) {
  if (cfg.embedding == EmbeddingSource::random) {
    return random_matrix(corpus.vocab, cfg.embedding_dim, cfg.seed);
  }
  if (pretrained == nullptr) throw UsageError("pretrained embeddings requested but no embedding file was loaded");
  return build_matrix(corpus.vocab, *pretrained, cfg.seed);
}

}  // namespace

TrainResult train_text_model(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& train_config,
                             const Split& split, const EmbeddingTable* pretrained, const EpochCallback& on_epoch) {
  const auto& labels = corpus.require_labels();
  if (split.train.empty()) throw ConfigError("empty training split");

  TrainResult result{
      TextModel{model_config, train_config, TextEncoder{corpus.vocab, corpus.maxlen}, NbPipeline{}, 0, 0}, {}};
  auto& cfg = result.model.model_config;

  if (cfg.kind == ModelKind::nb) {
    auto vectorizer = fit_tfidf(select(corpus.texts, split.train), cfg.nb.ngrams, cfg.nb.max_features);
    std::vector<SparseVector> X;
    X.reserve(split.train.size());
    for (auto i : split.train) X.push_back(vectorizer.transform(corpus.texts[i]));
    auto nb = nb_fit(X, select(labels, split.train), cfg.nb.alpha).cast<float>();
    result.model.classifier = NbPipeline{std::move(vectorizer), std::move(nb)};
    return result;
  }

  if (cfg.embedding != EmbeddingSource::random && pretrained != nullptr) {
    cfg.embedding_dim = pretrained->dim();
  }
  const auto emb = embedding_for(corpus, cfg, pretrained);
  cfg.vocab_size = corpus.vocab.size();
  result.model.embedding_found = emb.found;
  result.model.embedding_missing = emb.missing;
  cfg.maxlen = corpus.maxlen;

  const auto data = corpus.examples();
  if (cfg.kind == ModelKind::cnn) {
    CnnClassifier<float> model(cfg, emb);
    result.history = train_on_split(model, data, split, train_config, on_epoch);
    result.model.classifier = std::move(model);
  } else {
    LstmClassifier<float> model(cfg, emb);
    result.history = train_on_split(model, data, split, train_config, on_epoch);
    result.model.classifier = std::move(model);
  }
  return result;
}

TrainResult train_text_model(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& train_config,
                             const EmbeddingTable* pretrained, const EpochCallback& on_epoch) {
  return train_text_model(corpus, model_config, train_config,
                          holdout_split(corpus.size(), train_config.validation_fraction, train_config.shuffle_seed),
                          pretrained, on_epoch);
}

MetricReport evaluate_model(const TextModel& model, const Corpus& corpus, const std::vector<std::size_t>& subset,
                            std::size_t workers) {
  const auto& labels = corpus.require_labels();
  const auto probs = model.predict_normalized(select(corpus.texts, subset), workers);
  return evaluate(to_matrix(probs), to_matrix(select(labels, subset)));
}

MetricReport evaluate_model(const TextModel& model, const Corpus& corpus, std::size_t workers) {
  std::vector<std::size_t> all(corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return evaluate_model(model, corpus, all, workers);
}

namespace {

std::size_t as_count(double v, std::string_view name) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw SpecError("grid parameter '" + std::string(name) + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

void apply_grid_config(const GridConfig& config, ModelConfig& m, TrainConfig& t) {
  for (const auto& [name, v] : config) {
    const bool nb = m.kind == ModelKind::nb;
    const bool cnn = m.kind == ModelKind::cnn;
    const bool lstm = m.kind == ModelKind::lstm;
    if (nb && name == "alpha") {
      if (!(v > 0.0)) throw SpecError("alpha must be positive");
      m.nb.alpha = v;
    } else if (nb && name == "max_features") {
      m.nb.max_features = as_count(v, name);
    } else if (nb && name == "ngram_min") {
      m.nb.ngrams.lo = as_count(v, name);
    } else if (nb && name == "ngram_max") {
      m.nb.ngrams.hi = as_count(v, name);
    } else if (cnn && name == "filters") {
      m.filters = as_count(v, name);
    } else if (cnn && name == "dense_units") {
      m.dense_units = as_count(v, name);
    } else if (cnn && name == "kernel") {
      m.kernel = as_count(v, name);
    } else if (lstm && name == "hidden") {
      m.hidden = as_count(v, name);
    } else if (!nb && name == "embedding_dim") {
      m.embedding_dim = as_count(v, name);
    } else if (!nb && name == "epochs") {
      t.epochs = as_count(v, name);
    } else if (!nb && name == "batch_size") {
      t.batch_size = as_count(v, name);
    } else if (!nb && name == "learning_rate") {
      if (!(v > 0.0)) throw SpecError("learning_rate must be positive");
      t.learning_rate = v;
    } else {
      throw SpecError("grid parameter '" + name + "' does not apply to model '" + std::string(to_string(m.kind)) + "'");
    }
  }
  if (m.nb.ngrams.hi < m.nb.ngrams.lo) throw SpecError("ngram_max is below ngram_min");
}

FoldEvaluator make_fold_evaluator(const Corpus& corpus, const ModelConfig& model_config,
                                  const TrainConfig& train_config, const EmbeddingTable* pretrained,
                                  GridMetric metric) {
  return [&corpus, model_config, train_config, pretrained, metric](const GridConfig& config, const Split& split) {
    ModelConfig m = model_config;
    TrainConfig t = train_config;
    apply_grid_config(config, m, t);
    const auto trained = train_text_model(corpus, m, t, split, pretrained);
    const auto report = evaluate_model(trained.model, corpus, split.validation, t.workers);
    if (metric == GridMetric::accuracy) return report.accuracy.mean;
    if (!report.auc.mean) throw MetricError("validation fold has a single class in every label column");
    return *report.auc.mean;
  };
}

}  // namespace toxic
