#pragma once

// Finite-difference checks shared by the unit and acceptance tests. Each
// check builds a random instance from a seed, computes the analytic gradient
// of L = sum(r * layer(x)) for random r, and returns the largest relative
// error against central differences over every input and parameter.

#include <algorithm>
#include <span>
#include <vector>

#include "toxic/classifiers.hpp"
#include "toxic/neural/grad_check.hpp"
#include "toxic/neural/layers.hpp"
#include "toxic/neural/loss.hpp"
#include "toxic/random.hpp"

namespace harness {

using toxic::Rng;
using toxic::nn::Mat;
using toxic::nn::Row;

template <typename S>
Mat<S> random_mat(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Mat<S> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(rng.uniform(-scale, scale));
  return m;
}

template <typename S>
Row<S> random_row(Rng& rng, Eigen::Index cols, double scale = 1.0) {
  return random_mat<S>(rng, 1, cols, scale);
}

// Reference finite differences run in extended precision so that round-off
// stays far below the tolerance even for gradient entries near 1e-8.
using Wide = long double;

template <typename A, typename B>
Wide weighted_sum(const A& r, const B& y) {
  Wide total = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += static_cast<Wide>(r.data()[i]) * static_cast<Wide>(y.data()[i]);
  return total;
}

template <typename M>
Mat<Wide> wide(const M& m) {
  return m.template cast<Wide>();
}

// The analytic gradient may be computed at any precision; the numeric one is
// taken at the same (rounded) point in the precision of `value`, h = 1e-5.
template <typename N, typename M>
double check_tensor(const std::function<N()>& loss, Mat<N>& value, const M& analytic) {
  const Mat<N> a = analytic.template cast<N>();
  return toxic::nn::grad_check<N>(loss, std::span<N>(value.data(), static_cast<std::size_t>(value.size())),
                                  std::span<const N>(a.data(), static_cast<std::size_t>(a.size())), N(1e-5));
}

template <typename S>
double check_dense(std::uint64_t seed, toxic::nn::Activation act) {
  Rng rng(seed);
  const Eigen::Index n = 4, m = 3;
  const Row<S> x = random_row<S>(rng, n);
  const Mat<S> W = random_mat<S>(rng, n, m);
  const Mat<S> b = random_mat<S>(rng, 1, m);
  const Row<S> r = random_row<S>(rng, m);

  toxic::nn::DenseCache<S> cache;
  toxic::nn::dense(x, W, b, act, &cache);
  Mat<S> dW = Mat<S>::Zero(n, m), db = Mat<S>::Zero(1, m);
  const Row<S> dx = toxic::nn::dense_backward(r, W, cache, dW, db);

  Mat<Wide> xd = wide(x), Wd = wide(W), bd = wide(b);
  const std::function<Wide()> loss = [&] {
    return weighted_sum(r, toxic::nn::dense<Wide>(xd, Wd, bd, act));
  };
  return std::max({check_tensor(loss, xd, dx), check_tensor(loss, Wd, dW), check_tensor(loss, bd, db)});
}

template <typename S>
double check_conv(std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index L = 7, d = 3, k = 3, F = 4;
  const Mat<S> x = random_mat<S>(rng, L, d);
  const Mat<S> K = random_mat<S>(rng, k * d, F);
  const Mat<S> b = random_mat<S>(rng, 1, F, 0.3);
  const Mat<S> r = random_mat<S>(rng, L - k + 1, F);

  toxic::nn::Conv1dCache<S> cache;
  toxic::nn::conv1d(x, K, b, k, &cache);
  Mat<S> dK = Mat<S>::Zero(k * d, F), db = Mat<S>::Zero(1, F);
  const Mat<S> dx = toxic::nn::conv1d_backward(r, K, cache, dK, db);

  Mat<Wide> xd = wide(x), Kd = wide(K), bd = wide(b);
  const std::function<Wide()> loss = [&] { return weighted_sum(r, toxic::nn::conv1d(xd, Kd, bd, k)); };
  return std::max({check_tensor(loss, xd, dx), check_tensor(loss, Kd, dK), check_tensor(loss, bd, db)});
}

template <typename S>
double check_max_pool(std::uint64_t seed) {
  Rng rng(seed);
  const Mat<S> x = random_mat<S>(rng, 6, 4);
  const Row<S> r = random_row<S>(rng, 4);
  toxic::nn::MaxPoolCache cache;
  toxic::nn::global_max_pool(x, &cache);
  const Mat<S> dx = toxic::nn::global_max_pool_backward(r, cache);
  Mat<Wide> xd = wide(x);
  const std::function<Wide()> loss = [&] { return weighted_sum(r, toxic::nn::global_max_pool(xd)); };
  return check_tensor(loss, xd, dx);
}

template <typename S>
double check_lstm_step(std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index d = 3, H = 4;
  const Row<S> x = random_row<S>(rng, d), h = random_row<S>(rng, H), c = random_row<S>(rng, H);
  const Mat<S> W = random_mat<S>(rng, d, 4 * H), U = random_mat<S>(rng, H, 4 * H), b = random_mat<S>(rng, 1, 4 * H);
  const Row<S> rh = random_row<S>(rng, H), rc = random_row<S>(rng, H);

  toxic::nn::LstmStepCache<S> cache;
  toxic::nn::lstm_step(x, h, c, W, U, b, &cache);
  Mat<S> dW = Mat<S>::Zero(d, 4 * H), dU = Mat<S>::Zero(H, 4 * H), db = Mat<S>::Zero(1, 4 * H);
  const auto [dx, dh, dc] = toxic::nn::lstm_step_backward(rh, rc, W, U, cache, dW, dU, db);

  Mat<Wide> xd = wide(x), hd = wide(h), cd = wide(c), Wd = wide(W), Ud = wide(U), bd = wide(b);
  const std::function<Wide()> loss = [&] {
    const auto [h2, c2] = toxic::nn::lstm_step<Wide>(xd, hd, cd, Wd, Ud, bd);
    return weighted_sum(rh, h2) + weighted_sum(rc, c2);
  };
  return std::max({check_tensor(loss, xd, dx), check_tensor(loss, hd, dh), check_tensor(loss, cd, dc),
                   check_tensor(loss, Wd, dW), check_tensor(loss, Ud, dU), check_tensor(loss, bd, db)});
}

template <typename S>
double check_lstm_sequence(std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index T = 3, d = 3, H = 4;
  const Mat<S> x = random_mat<S>(rng, T, d);
  const Mat<S> W = random_mat<S>(rng, d, 4 * H), U = random_mat<S>(rng, H, 4 * H), b = random_mat<S>(rng, 1, 4 * H);
  const Row<S> r = random_row<S>(rng, H);

  toxic::nn::LstmSequenceCache<S> cache;
  toxic::nn::lstm_forward(x, W, U, b, &cache);
  Mat<S> dW = Mat<S>::Zero(d, 4 * H), dU = Mat<S>::Zero(H, 4 * H), db = Mat<S>::Zero(1, 4 * H);
  const Mat<S> dx = toxic::nn::lstm_backward(r, W, U, cache, dW, dU, db);

  Mat<Wide> xd = wide(x), Wd = wide(W), Ud = wide(U), bd = wide(b);
  const std::function<Wide()> loss = [&] { return weighted_sum(r, toxic::nn::lstm_forward(xd, Wd, Ud, bd)); };
  return std::max({check_tensor(loss, xd, dx), check_tensor(loss, Wd, dW), check_tensor(loss, Ud, dU),
                   check_tensor(loss, bd, db)});
}

// BCE composed with sigmoid: checks the fused logit gradient.
template <typename S>
double check_bce_logits(std::uint64_t seed) {
  Rng rng(seed);
  const Row<S> z = random_row<S>(rng, static_cast<Eigen::Index>(toxic::kNumLabels), 3.0);
  toxic::LabelVector y{};
  for (auto& v : y) v = static_cast<std::uint8_t>(rng.below(2));
  const Row<S> dz = toxic::nn::bce_logit_grad<S>(toxic::nn::sigmoid(z), y);
  Mat<Wide> zd = wide(z);
  const std::function<Wide()> loss = [&] {
    return static_cast<Wide>(toxic::nn::bce_loss<Wide>(toxic::nn::sigmoid(Row<Wide>(zd)), y));
  };
  return check_tensor(loss, zd, dz);
}

template <typename S>
double check_all_layers(std::uint64_t seed) {
  using toxic::nn::Activation;
  return std::max({check_dense<S>(seed, Activation::none), check_dense<S>(seed, Activation::relu),
                   check_dense<S>(seed, Activation::sigmoid), check_conv<S>(seed), check_max_pool<S>(seed),
                   check_lstm_step<S>(seed), check_lstm_sequence<S>(seed), check_bce_logits<S>(seed)});
}

// Small 64-bit full model: maxlen 6, d 5, F = U = H = 4, two examples, every
// parameter (output layer included) randomized so no gradient is trivially 0.
inline toxic::ModelConfig tiny_config(toxic::ModelKind kind, std::uint64_t seed) {
  toxic::ModelConfig cfg;
  cfg.kind = kind;
  cfg.maxlen = 6;
  cfg.vocab_size = 9;
  cfg.embedding_dim = 5;
  cfg.filters = 4;
  cfg.dense_units = 4;
  cfg.hidden = 4;
  cfg.kernel = 3;
  cfg.seed = seed;
  return cfg;
}

template <typename Model>
double check_model(Model& model, std::uint64_t seed) {
  using S = typename Model::scalar_type;
  Rng rng(toxic::mix_seed(seed, 77));
  auto& params = model.params();
  for (auto& p : params) {
    p.value = random_mat<S>(rng, p.value.rows(), p.value.cols(), 0.5);
  }
  const auto V = static_cast<std::uint64_t>(model.config().vocab_size);
  std::vector<toxic::EncodedSequence> seqs(2, toxic::EncodedSequence(model.config().maxlen));
  std::vector<toxic::LabelVector> labels(2);
  for (std::size_t e = 0; e < 2; ++e) {
    for (auto& id : seqs[e]) id = static_cast<std::int32_t>(rng.below(V));
    for (auto& v : labels[e]) v = static_cast<std::uint8_t>(rng.below(2));
  }

  params.zero_grad();
  toxic::nn::GradientBuffer<S> g;
  for (std::size_t e = 0; e < 2; ++e) {
    model.gradient(seqs[e], labels[e], g);
    toxic::nn::accumulate(params, g, S(0.5));
  }
  const std::function<double()> loss = [&] {
    double total = 0.0;
    for (std::size_t e = 0; e < 2; ++e) total += static_cast<double>(toxic::nn::bce_loss(model.forward(seqs[e]), labels[e]));
    return total / 2.0;
  };
  double worst = 0.0;
  for (auto& p : params) {
    const Mat<S> analytic = p.grad;
    worst = std::max(worst, check_tensor(loss, p.value, analytic));
  }
  return worst;
}

inline double check_model_kind(toxic::ModelKind kind, std::uint64_t seed) {
  using S = double;
  auto cfg = tiny_config(kind, seed);
  const auto emb = toxic::random_matrix(toxic::Vocabulary::from_tokens({"a", "b", "c", "d", "e", "f", "g"},
                                                                       {7, 6, 5, 4, 3, 2, 1}),
                                        cfg.embedding_dim, seed);
  if (kind == toxic::ModelKind::cnn) {
    toxic::CnnClassifier<S> model(cfg, emb);
    return check_model(model, seed);
  }
  toxic::LstmClassifier<S> model(cfg, emb);
  return check_model(model, seed);
}

}  // namespace harness
