#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "toxic/embeddings.hpp"
#include "toxic/error.hpp"
#include "toxic/labels.hpp"
#include "toxic/metrics.hpp"
#include "toxic/neural/adam.hpp"
#include "toxic/neural/layers.hpp"
#include "toxic/neural/loss.hpp"
#include "toxic/neural/parameters.hpp"
#include "toxic/parallel.hpp"
#include "toxic/split.hpp"
#include "toxic/text.hpp"
#include "toxic/tfidf.hpp"

namespace toxic {

enum class ModelKind { nb, cnn, lstm };
enum class EmbeddingSource { random, glove, fasttext_vec };

std::string_view to_string(ModelKind kind);
std::string_view to_string(EmbeddingSource source);
ModelKind parse_model_kind(std::string_view text);
EmbeddingSource parse_embedding_source(std::string_view text);

struct NbConfig {
  NgramRange ngrams{1, 2};
  std::size_t max_features = 50000;
  double alpha = 1.0;
};

struct ModelConfig {
  ModelKind kind = ModelKind::cnn;
  std::size_t maxlen = 200;
  std::size_t vocab_size = 0;  // rows of the embedding matrix
  std::size_t embedding_dim = 50;
  std::size_t filters = 64;
  std::size_t kernel = 3;
  std::size_t dense_units = 32;
  std::size_t hidden = 64;
  std::uint64_t seed = 42;
  EmbeddingSource embedding = EmbeddingSource::random;
  bool trainable_embedding = true;
  NbConfig nb;
};

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double validation_fraction = 0.2;
  std::uint64_t shuffle_seed = 42;
  std::size_t workers = 1;  // results do not depend on this
};

struct Example {
  EncodedSequence ids;
  LabelVector labels{};
};

struct EpochRecord {
  double train_loss = 0.0;
  double validation_loss = 0.0;
  std::array<double, kNumLabels> validation_accuracy{};
  double mean_validation_accuracy = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

// Called after every epoch; returning false stops training.
using EpochCallback = std::function<bool(std::size_t epoch, const EpochRecord& record)>;

struct ParamShape {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

// Parameter names and shapes in storage order for a neural config.
std::vector<ParamShape> parameter_layout(const ModelConfig& cfg);

namespace detail {

inline void validate_neural_config(const ModelConfig& cfg) {
  if (cfg.vocab_size < 2) throw ConfigError("vocabulary must hold at least PAD and OOV");
  if (cfg.embedding_dim < 1) throw ConfigError("embedding dimension must be positive");
  if (cfg.maxlen < 1) throw ConfigError("maxlen must be positive");
  if (cfg.kind == ModelKind::cnn) {
    if (cfg.filters < 1 || cfg.dense_units < 1 || cfg.kernel < 1) throw ConfigError("CNN sizes must be positive");
    if (cfg.maxlen < cfg.kernel) throw ConfigError("maxlen is shorter than the convolution kernel");
  } else if (cfg.kind == ModelKind::lstm) {
    if (cfg.hidden < 1) throw ConfigError("LSTM hidden size must be positive");
  } else {
    throw ConfigError("not a neural model kind");
  }
}

// Fills vocab_size from the embedding matrix when the config leaves it at 0.
inline ModelConfig resolve(ModelConfig cfg, const EmbeddingMatrix& emb) {
  if (cfg.vocab_size == 0) cfg.vocab_size = static_cast<std::size_t>(emb.values.rows());
  return cfg;
}

template <typename Scalar>
nn::ParameterSet<Scalar> init_parameters(const ModelConfig& cfg, const EmbeddingMatrix& emb) {
  validate_neural_config(cfg);
  if (static_cast<std::size_t>(emb.values.rows()) != cfg.vocab_size ||
      static_cast<std::size_t>(emb.values.cols()) != cfg.embedding_dim) {
    throw ConfigError("embedding matrix is " + nn::shape_string(emb.values.rows(), emb.values.cols()) +
                      " but the config expects " +
                      nn::shape_string(static_cast<Eigen::Index>(cfg.vocab_size),
                                       static_cast<Eigen::Index>(cfg.embedding_dim)));
  }
  Rng rng(mix_seed(cfg.seed, 0x5eed));
  nn::ParameterSet<Scalar> params;
  const auto d = static_cast<double>(cfg.embedding_dim);
  params.add("embedding", emb.values.cast<Scalar>());
  if (cfg.kind == ModelKind::cnn) {
    const auto F = static_cast<Eigen::Index>(cfg.filters);
    const auto U = static_cast<Eigen::Index>(cfg.dense_units);
    const auto k = static_cast<Eigen::Index>(cfg.kernel);
    params.add("conv.kernels", nn::glorot_uniform<Scalar>(k * emb.values.cols(), F, static_cast<double>(k) * d,
                                                          static_cast<double>(k * F), rng));
    params.add("conv.bias", nn::Mat<Scalar>::Zero(1, F));
    params.add("hidden.weight", nn::glorot_uniform<Scalar>(F, U, static_cast<double>(F), static_cast<double>(U), rng));
    params.add("hidden.bias", nn::Mat<Scalar>::Zero(1, U));
    params.add("output.weight", nn::Mat<Scalar>::Zero(U, static_cast<Eigen::Index>(kNumLabels)));
  } else {
    const auto H = static_cast<Eigen::Index>(cfg.hidden);
    params.add("lstm.W", nn::glorot_uniform<Scalar>(emb.values.cols(), 4 * H, d, static_cast<double>(4 * H), rng));
    params.add("lstm.U", nn::glorot_uniform<Scalar>(H, 4 * H, static_cast<double>(H), static_cast<double>(4 * H), rng));
    nn::Mat<Scalar> b = nn::Mat<Scalar>::Zero(1, 4 * H);
    b.block(0, H, 1, H).setOnes();  // forget gate starts open
    params.add("lstm.b", std::move(b));
    params.add("output.weight", nn::Mat<Scalar>::Zero(H, static_cast<Eigen::Index>(kNumLabels)));
  }
  params.add("output.bias", nn::Mat<Scalar>::Zero(1, static_cast<Eigen::Index>(kNumLabels)));
  return params;
}

template <typename Scalar>
void configure_embedding(nn::ParameterSet<Scalar>& params, const ModelConfig& cfg) {
  auto& e = params[0];
  e.row_sparse = true;
  e.trainable = cfg.trainable_embedding;
  e.frozen_rows = {Vocabulary::kPad};
}

template <typename Scalar>
void check_layout(const nn::ParameterSet<Scalar>& params, const ModelConfig& cfg) {
  const auto layout = parameter_layout(cfg);
  if (layout.size() != params.size()) throw IntegrityError("parameter count does not match the model config");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& p = params[i];
    if (p.name != layout[i].name || p.value.rows() != layout[i].rows || p.value.cols() != layout[i].cols) {
      throw IntegrityError("parameter '" + p.name + "' " + nn::shape_string(p.value.rows(), p.value.cols()) +
                           " does not match expected '" + layout[i].name + "' " +
                           nn::shape_string(layout[i].rows, layout[i].cols));
    }
  }
}

template <typename Scalar>
nn::Mat<Scalar> lookup(const nn::Mat<Scalar>& table, std::span<const std::int32_t> ids) {
  nn::Mat<Scalar> x(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || ids[t] >= table.rows()) {
      throw ShapeError("token index " + std::to_string(ids[t]) + " outside vocabulary of " +
                       std::to_string(table.rows()));
    }
    x.row(static_cast<Eigen::Index>(t)) = table.row(ids[t]);
  }
  return x;
}

template <typename Scalar>
Probabilities to_probabilities(const nn::Row<Scalar>& p) {
  Probabilities out{};
  for (std::size_t l = 0; l < kNumLabels; ++l) out[l] = static_cast<double>(p[static_cast<Eigen::Index>(l)]);
  return out;
}

}  // namespace detail

// embedding -> conv1d(F, k, relu) -> global max pool -> dense(U, relu)
// -> dense(6, sigmoid)
template <typename Scalar>
class CnnClassifier {
 public:
  using scalar_type = Scalar;
  enum Slot : std::size_t { kEmbedding, kConvKernels, kConvBias, kHiddenW, kHiddenB, kOutputW, kOutputB };

  CnnClassifier(const ModelConfig& cfg, const EmbeddingMatrix& emb)
      : config_(detail::resolve(with_kind(cfg), emb)), params_(detail::init_parameters<Scalar>(config_, emb)) {
    detail::configure_embedding(params_, config_);
  }

  CnnClassifier(const ModelConfig& cfg, nn::ParameterSet<Scalar> params) : config_(with_kind(cfg)), params_(std::move(params)) {
    detail::validate_neural_config(config_);
    detail::check_layout(params_, config_);
    detail::configure_embedding(params_, config_);
  }

  const ModelConfig& config() const { return config_; }
  nn::ParameterSet<Scalar>& params() { return params_; }
  const nn::ParameterSet<Scalar>& params() const { return params_; }

  nn::Row<Scalar> forward(std::span<const std::int32_t> ids) const {
    const auto x = detail::lookup(value(kEmbedding), ids);
    const auto conv = nn::conv1d(x, value(kConvKernels), value(kConvBias), kernel());
    const auto pooled = nn::global_max_pool(conv);
    const auto hidden = nn::dense(pooled, value(kHiddenW), value(kHiddenB), nn::Activation::relu);
    return nn::dense(hidden, value(kOutputW), value(kOutputB), nn::Activation::sigmoid);
  }

  // Writes this example's gradient into `g` and returns its loss.
  Scalar gradient(std::span<const std::int32_t> ids, const LabelVector& y, nn::GradientBuffer<Scalar>& g) const {
    g.reset(params_);
    nn::Conv1dCache<Scalar> conv_cache;
    nn::MaxPoolCache pool_cache;
    nn::DenseCache<Scalar> hidden_cache, output_cache;

    const auto x = detail::lookup(value(kEmbedding), ids);
    const auto conv = nn::conv1d(x, value(kConvKernels), value(kConvBias), kernel(), &conv_cache);
    const auto pooled = nn::global_max_pool(conv, &pool_cache);
    const auto hidden = nn::dense(pooled, value(kHiddenW), value(kHiddenB), nn::Activation::relu, &hidden_cache);
    const auto p = nn::dense(hidden, value(kOutputW), value(kOutputB), nn::Activation::none, &output_cache);
    const nn::Row<Scalar> prob = nn::sigmoid(p);

    auto d_hidden = nn::dense_backward(nn::bce_logit_grad(prob, y), value(kOutputW), output_cache, g.dense[kOutputW],
                                       g.dense[kOutputB]);
    auto d_pooled = nn::dense_backward(d_hidden, value(kHiddenW), hidden_cache, g.dense[kHiddenW], g.dense[kHiddenB]);
    auto d_conv = nn::global_max_pool_backward(d_pooled, pool_cache);
    g.row_grads = nn::conv1d_backward(d_conv, value(kConvKernels), conv_cache, g.dense[kConvKernels], g.dense[kConvBias]);
    g.rows.assign(ids.begin(), ids.end());
    g.loss = nn::bce_loss(prob, y);
    return g.loss;
  }

 private:
  static ModelConfig with_kind(ModelConfig cfg) {
    cfg.kind = ModelKind::cnn;
    return cfg;
  }
  const nn::Mat<Scalar>& value(Slot s) const { return params_[s].value; }
  Eigen::Index kernel() const { return static_cast<Eigen::Index>(config_.kernel); }

  ModelConfig config_;
  nn::ParameterSet<Scalar> params_;
};

// embedding -> LSTM(H), final hidden state -> dense(6, sigmoid)
template <typename Scalar>
class LstmClassifier {
 public:
  using scalar_type = Scalar;
  enum Slot : std::size_t { kEmbedding, kW, kU, kB, kOutputW, kOutputB };

  LstmClassifier(const ModelConfig& cfg, const EmbeddingMatrix& emb)
      : config_(detail::resolve(with_kind(cfg), emb)), params_(detail::init_parameters<Scalar>(config_, emb)) {
    detail::configure_embedding(params_, config_);
  }

  LstmClassifier(const ModelConfig& cfg, nn::ParameterSet<Scalar> params)
      : config_(with_kind(cfg)), params_(std::move(params)) {
    detail::validate_neural_config(config_);
    detail::check_layout(params_, config_);
    detail::configure_embedding(params_, config_);
  }

  const ModelConfig& config() const { return config_; }
  nn::ParameterSet<Scalar>& params() { return params_; }
  const nn::ParameterSet<Scalar>& params() const { return params_; }

  nn::Row<Scalar> forward(std::span<const std::int32_t> ids) const {
    if (ids.empty()) throw ShapeError("lstm: empty sequence");
    const auto x = detail::lookup(value(kEmbedding), ids);
    const auto h = nn::lstm_forward(x, value(kW), value(kU), value(kB));
    return nn::dense(h, value(kOutputW), value(kOutputB), nn::Activation::sigmoid);
  }

  Scalar gradient(std::span<const std::int32_t> ids, const LabelVector& y, nn::GradientBuffer<Scalar>& g) const {
    if (ids.empty()) throw ShapeError("lstm: empty sequence");
    g.reset(params_);
    nn::LstmSequenceCache<Scalar> lstm_cache;
    nn::DenseCache<Scalar> output_cache;

    const auto x = detail::lookup(value(kEmbedding), ids);
    const auto h = nn::lstm_forward(x, value(kW), value(kU), value(kB), &lstm_cache);
    const auto logits = nn::dense(h, value(kOutputW), value(kOutputB), nn::Activation::none, &output_cache);
    const nn::Row<Scalar> prob = nn::sigmoid(logits);

    auto dh = nn::dense_backward(nn::bce_logit_grad(prob, y), value(kOutputW), output_cache, g.dense[kOutputW],
                                 g.dense[kOutputB]);
    g.row_grads = nn::lstm_backward(dh, value(kW), value(kU), lstm_cache, g.dense[kW], g.dense[kU], g.dense[kB]);
    g.rows.assign(ids.begin(), ids.end());
    g.loss = nn::bce_loss(prob, y);
    return g.loss;
  }

 private:
  static ModelConfig with_kind(ModelConfig cfg) {
    cfg.kind = ModelKind::lstm;
    return cfg;
  }
  const nn::Mat<Scalar>& value(Slot s) const { return params_[s].value; }

  ModelConfig config_;
  nn::ParameterSet<Scalar> params_;
};

template <typename Scalar>
CnnClassifier<Scalar> build_cnn(const ModelConfig& cfg, const EmbeddingMatrix& emb) {
  return CnnClassifier<Scalar>(cfg, emb);
}

template <typename Scalar>
LstmClassifier<Scalar> build_lstm(const ModelConfig& cfg, const EmbeddingMatrix& emb) {
  return LstmClassifier<Scalar>(cfg, emb);
}

template <typename Model>
Probabilities predict(const Model& model, std::span<const std::int32_t> ids) {
  return detail::to_probabilities(model.forward(ids));
}

template <typename Model>
std::vector<Probabilities> predict_batch(const Model& model, const std::vector<EncodedSequence>& seqs,
                                         std::size_t workers = 1) {
  std::vector<Probabilities> out(seqs.size());
  parallel_for(seqs.size(), workers, [&](std::size_t i) { out[i] = predict(model, seqs[i]); });
  return out;
}

template <typename Model>
Probabilities predict_proba(const Model& model, const TextEncoder& encoder, std::string_view raw) {
  return predict(model, encoder(raw));
}

// Minibatch Adam on the mean BCE. Each batch's example gradients are computed
// independently (possibly in parallel) and summed in batch order, so results
// do not depend on the worker count.
template <typename Model>
TrainHistory train_on_split(Model& model, const std::vector<Example>& data, const Split& split, const TrainConfig& tc,
                            const EpochCallback& on_epoch = {}) {
  using Scalar = typename Model::scalar_type;
  if (tc.batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (split.train.empty() || split.validation.empty()) throw ConfigError("train and validation sets must be nonempty");

  auto& params = model.params();
  nn::AdamState<Scalar> adam(params, nn::AdamConfig{tc.learning_rate});
  std::vector<nn::GradientBuffer<Scalar>> buffers(std::min(tc.batch_size, split.train.size()));
  TrainHistory history;

  std::vector<std::size_t> order = split.train;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    Rng rng(mix_seed(tc.shuffle_seed, 1000 + epoch));
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t count = std::min(tc.batch_size, order.size() - start);
      parallel_for(count, tc.workers, [&](std::size_t b) {
        const auto& ex = data[order[start + b]];
        model.gradient(ex.ids, ex.labels, buffers[b]);
      });
      params.zero_grad();
      const auto scale = static_cast<Scalar>(1.0 / static_cast<double>(count));
      for (std::size_t b = 0; b < count; ++b) {
        nn::accumulate(params, buffers[b], scale);
        loss_sum += static_cast<double>(buffers[b].loss);
      }
      nn::adam_step(params, adam);
    }

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    std::vector<Probabilities> probs(split.validation.size());
    std::vector<double> losses(split.validation.size());
    parallel_for(split.validation.size(), tc.workers, [&](std::size_t i) {
      const auto& ex = data[split.validation[i]];
      const auto p = model.forward(ex.ids);
      probs[i] = detail::to_probabilities(p);
      losses[i] = static_cast<double>(nn::bce_loss(p, ex.labels));
    });
    double val_loss = 0.0;
    std::vector<LabelVector> labels;
    for (std::size_t i = 0; i < losses.size(); ++i) {
      val_loss += losses[i];
      labels.push_back(data[split.validation[i]].labels);
    }
    rec.validation_loss = val_loss / static_cast<double>(losses.size());
    const auto acc = accuracy(to_matrix(probs), to_matrix(labels));
    rec.validation_accuracy = acc.per_label;
    rec.mean_validation_accuracy = acc.mean;
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.validation_loss)) {
      throw NumericError("training diverged in epoch " + std::to_string(epoch + 1));
    }
    history.push_back(rec);
    if (on_epoch && !on_epoch(epoch, rec)) break;
  }
  return history;
}

template <typename Model>
TrainHistory train(Model& model, const std::vector<Example>& data, const TrainConfig& tc,
                   const EpochCallback& on_epoch = {}) {
  if (data.empty()) throw ConfigError("no training data");
  return train_on_split(model, data, holdout_split(data.size(), tc.validation_fraction, tc.shuffle_seed), tc, on_epoch);
}

}  // namespace toxic
