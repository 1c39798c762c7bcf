#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "toxic/classifiers.hpp"
#include "toxic/embeddings.hpp"
#include "toxic/grid_search.hpp"
#include "toxic/metrics.hpp"
#include "toxic/naive_bayes.hpp"
#include "toxic/text.hpp"
#include "toxic/tfidf.hpp"

namespace toxic {

// A preprocessed dataset: normalized text for the TF-IDF path and padded
// index sequences for the neural path, produced by one vocabulary.
struct Corpus {
  std::size_t maxlen = 200;
  Vocabulary vocab;
  std::vector<std::string> ids;
  std::vector<std::string> texts;  // normalized
  std::vector<EncodedSequence> sequences;
  std::optional<std::vector<LabelVector>> labels;

  std::size_t size() const { return ids.size(); }
  std::vector<Example> examples() const;  // requires labels
  const std::vector<LabelVector>& require_labels() const;
};

struct PreprocessConfig {
  std::size_t maxlen = 200;
  std::size_t vocab_size = 20000;
  std::uint64_t min_count = 1;
};

Corpus preprocess(const std::vector<LabeledComment>& rows, const PreprocessConfig& cfg = {});

struct NbPipeline {
  TfIdfVectorizer vectorizer;
  NaiveBayesModel<float> model;

  Probabilities predict_normalized(std::string_view normalized) const {
    return model.predict(vectorizer.transform(normalized));
  }
};

using Classifier = std::variant<NbPipeline, CnnClassifier<float>, LstmClassifier<float>>;

// A trained classifier with everything needed to score raw text.
struct TextModel {
  ModelConfig model_config;
  TrainConfig train_config;
  TextEncoder encoder;
  Classifier classifier;
  std::size_t embedding_found = 0;
  std::size_t embedding_missing = 0;

  ModelKind kind() const { return model_config.kind; }

  // normalize -> tokenize -> (TF-IDF | encode -> pad) -> forward.
  Probabilities predict(std::string_view raw) const;
  std::vector<Probabilities> predict_normalized(const std::vector<std::string>& normalized,
                                                std::size_t workers = 1) const;
};

// Fits on `split.train` of the corpus. Neural models use `pretrained` when
// given, random vectors otherwise; `on_epoch` is forwarded to the trainer.
struct TrainResult {
  TextModel model;
  TrainHistory history;
};

TrainResult train_text_model(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& train_config,
                             const Split& split, const EmbeddingTable* pretrained = nullptr,
                             const EpochCallback& on_epoch = {});

// Uses the seeded holdout split from train_config.
TrainResult train_text_model(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& train_config,
                             const EmbeddingTable* pretrained = nullptr, const EpochCallback& on_epoch = {});

MetricReport evaluate_model(const TextModel& model, const Corpus& corpus, std::size_t workers = 1);
MetricReport evaluate_model(const TextModel& model, const Corpus& corpus, const std::vector<std::size_t>& subset,
                            std::size_t workers = 1);

enum class GridMetric { accuracy, auc };

// Grid parameter names understood per model kind:
//   nb:   alpha, max_features, ngram_min, ngram_max
//   cnn:  filters, dense_units, kernel, embedding_dim, epochs, batch_size, learning_rate
//   lstm: hidden, embedding_dim, epochs, batch_size, learning_rate
void apply_grid_config(const GridConfig& config, ModelConfig& model_config, TrainConfig& train_config);

FoldEvaluator make_fold_evaluator(const Corpus& corpus, const ModelConfig& model_config,
                                  const TrainConfig& train_config, const EmbeddingTable* pretrained,
                                  GridMetric metric);

}  // namespace toxic
