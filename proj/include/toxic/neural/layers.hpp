#pragma once

#include <cmath>
#include <concepts>
#include <tuple>
#include <utility>
#include <vector>

#include "toxic/neural/tensor.hpp"

namespace toxic::nn {

enum class Activation { none, relu, sigmoid };

template <std::floating_point Scalar>
Scalar sigmoid(Scalar z) {
  // Split on sign so exp never overflows.
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([](Scalar v) { return sigmoid(v); });
}

template <typename Scalar>
void apply_activation(Row<Scalar>& z, Activation act) {
  switch (act) {
    case Activation::none: break;
    case Activation::relu: z = z.cwiseMax(Scalar(0)); break;
    case Activation::sigmoid: z = sigmoid(z); break;
  }
}

// ---------------------------------------------------------------------------
// Dense: y = act(x W + b), x is 1 x n, W is n x m.

template <typename Scalar>
struct DenseCache {
  Row<Scalar> x;
  Row<Scalar> y;
  Activation act = Activation::none;
};

template <typename Scalar>
Row<Scalar> dense(const Row<Scalar>& x, const Mat<Scalar>& W, const Mat<Scalar>& b, Activation act,
                  DenseCache<Scalar>* cache = nullptr) {
  require_shape(W, x.cols(), W.cols(), "dense weight");
  require_shape(b, 1, W.cols(), "dense bias");
  Row<Scalar> y = x * W + b;
  apply_activation(y, act);
  require_finite(y, "dense");
  if (cache != nullptr) *cache = {x, y, act};
  return y;
}

// Returns dx and accumulates dW, db.
template <typename Scalar>
Row<Scalar> dense_backward(const Row<Scalar>& dy, const Mat<Scalar>& W, const DenseCache<Scalar>& cache,
                           Mat<Scalar>& dW, Mat<Scalar>& db) {
  require_shape(dy, 1, W.cols(), "dense upstream gradient");
  Row<Scalar> dz = dy;
  switch (cache.act) {
    case Activation::none: break;
    case Activation::relu: dz = (cache.y.array() > Scalar(0)).select(dy, Scalar(0)); break;
    case Activation::sigmoid: dz = (dy.array() * cache.y.array() * (Scalar(1) - cache.y.array())).matrix(); break;
  }
  dW.noalias() += cache.x.transpose() * dz;
  db += dz;
  return dz * W.transpose();
}

// ---------------------------------------------------------------------------
// Conv1d over a (L x d) sequence with F kernels of k rows each, valid padding,
// ReLU. Kernels are stored as a (k*d) x F matrix: row j*d + e holds tap j,
// channel e. out[t, f] = relu(sum_j x[t + j] . kernel_f[j] + b_f).

template <typename Scalar>
struct Conv1dCache {
  Mat<Scalar> x;
  Mat<Scalar> y;
  Eigen::Index kernel = 0;
};

// Overlapping (L - k + 1) x (k*d) view: in row-major storage window t is the
// contiguous run starting at row t.
template <typename Scalar>
auto conv_windows(const Mat<Scalar>& x, Eigen::Index kernel) {
  using Map = Eigen::Map<const Mat<Scalar>, Eigen::Unaligned, Eigen::OuterStride<>>;
  return Map(x.data(), x.rows() - kernel + 1, kernel * x.cols(), Eigen::OuterStride<>(x.cols()));
}

template <typename Scalar>
Mat<Scalar> conv1d(const Mat<Scalar>& x, const Mat<Scalar>& kernels, const Mat<Scalar>& b, Eigen::Index kernel,
                   Conv1dCache<Scalar>* cache = nullptr) {
  if (kernel < 1) throw ShapeError("conv1d: kernel size must be positive");
  if (x.rows() < kernel) {
    throw ShapeError("conv1d: sequence length " + std::to_string(x.rows()) + " is shorter than kernel " +
                     std::to_string(kernel));
  }
  require_shape(kernels, kernel * x.cols(), kernels.cols(), "conv1d kernels");
  require_shape(b, 1, kernels.cols(), "conv1d bias");
  Mat<Scalar> y = conv_windows(x, kernel) * kernels;
  y.rowwise() += b.row(0);
  y = y.cwiseMax(Scalar(0));
  require_finite(y, "conv1d");
  if (cache != nullptr) *cache = {x, y, kernel};
  return y;
}

// Returns dx and accumulates dkernels, db.
template <typename Scalar>
Mat<Scalar> conv1d_backward(const Mat<Scalar>& dy, const Mat<Scalar>& kernels, const Conv1dCache<Scalar>& cache,
                            Mat<Scalar>& dkernels, Mat<Scalar>& db) {
  require_shape(dy, cache.y.rows(), cache.y.cols(), "conv1d upstream gradient");
  const Mat<Scalar> dz = (cache.y.array() > Scalar(0)).select(dy, Scalar(0));
  const auto windows = conv_windows(cache.x, cache.kernel);
  dkernels.noalias() += windows.transpose() * dz;
  db += dz.colwise().sum();

  const Mat<Scalar> dwindows = dz * kernels.transpose();
  Mat<Scalar> dx = Mat<Scalar>::Zero(cache.x.rows(), cache.x.cols());
  const Eigen::Index width = dwindows.cols();
  for (Eigen::Index t = 0; t < dwindows.rows(); ++t) {
    Eigen::Map<Row<Scalar>>(dx.data() + t * cache.x.cols(), width) += dwindows.row(t);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Global max pooling over time. Ties go to the earliest position.

struct MaxPoolCache {
  std::vector<Eigen::Index> argmax;
  Eigen::Index steps = 0;
};

template <typename Scalar>
Row<Scalar> global_max_pool(const Mat<Scalar>& x, MaxPoolCache* cache = nullptr) {
  if (x.rows() == 0) throw ShapeError("global_max_pool: empty time axis");
  Row<Scalar> y(x.cols());
  std::vector<Eigen::Index> argmax(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < x.rows(); ++t) {
      if (x(t, f) > x(best, f)) best = t;
    }
    y[f] = x(best, f);
    argmax[static_cast<std::size_t>(f)] = best;
  }
  if (cache != nullptr) *cache = {std::move(argmax), x.rows()};
  return y;
}

template <typename Scalar>
Mat<Scalar> global_max_pool_backward(const Row<Scalar>& dy, const MaxPoolCache& cache) {
  Mat<Scalar> dx = Mat<Scalar>::Zero(cache.steps, dy.cols());
  for (Eigen::Index f = 0; f < dy.cols(); ++f) dx(cache.argmax[static_cast<std::size_t>(f)], f) = dy[f];
  return dx;
}

// ---------------------------------------------------------------------------
// LSTM. W is d x 4H, U is H x 4H, b is 1 x 4H; gate blocks are ordered
// [input | forget | output | candidate].
//
//   i = s(xW_i + hU_i + b_i)   f = s(xW_f + hU_f + b_f)
//   o = s(xW_o + hU_o + b_o)   g = tanh(xW_g + hU_g + b_g)
//   c' = f*c + i*g             h' = o*tanh(c')

template <typename Scalar>
struct LstmStepCache {
  Row<Scalar> x, h_prev, c_prev;
  Row<Scalar> i, f, o, g;
  Row<Scalar> tanh_c;
};

namespace detail {

template <typename Scalar>
void lstm_check(const Mat<Scalar>& W, const Mat<Scalar>& U, const Mat<Scalar>& b) {
  const Eigen::Index H = U.rows();
  require_shape(W, W.rows(), 4 * H, "lstm input weights");
  require_shape(U, H, 4 * H, "lstm recurrent weights");
  require_shape(b, 1, 4 * H, "lstm bias");
}

// One cell update given the precomputed input projection xW (1 x 4H).
template <typename Scalar>
std::pair<Row<Scalar>, Row<Scalar>> lstm_cell(const Row<Scalar>& xw, const Row<Scalar>& h, const Row<Scalar>& c,
                                              const Mat<Scalar>& U, const Mat<Scalar>& b,
                                              LstmStepCache<Scalar>& cache) {
  const Eigen::Index H = U.rows();
  Row<Scalar> a = xw + h * U + b;
  cache.h_prev = h;
  cache.c_prev = c;
  cache.i = sigmoid(a.segment(0, H));
  cache.f = sigmoid(a.segment(H, H));
  cache.o = sigmoid(a.segment(2 * H, H));
  cache.g = a.segment(3 * H, H).array().tanh().matrix();
  Row<Scalar> c_next = (cache.f.array() * c.array() + cache.i.array() * cache.g.array()).matrix();
  cache.tanh_c = c_next.array().tanh().matrix();
  Row<Scalar> h_next = (cache.o.array() * cache.tanh_c.array()).matrix();
  return {std::move(h_next), std::move(c_next)};
}

// Gradient w.r.t. the gate pre-activations, plus dc_prev.
template <typename Scalar>
Row<Scalar> lstm_cell_backward(const Row<Scalar>& dh, const Row<Scalar>& dc, const LstmStepCache<Scalar>& k,
                               Row<Scalar>& dc_prev) {
  const Eigen::Index H = dh.cols();
  const auto one = Scalar(1);
  const auto dc_total = (dc.array() + dh.array() * k.o.array() * (one - k.tanh_c.array().square())).eval();
  Row<Scalar> da(4 * H);
  da.segment(0, H) = (dc_total * k.g.array() * k.i.array() * (one - k.i.array())).matrix();
  da.segment(H, H) = (dc_total * k.c_prev.array() * k.f.array() * (one - k.f.array())).matrix();
  da.segment(2 * H, H) = (dh.array() * k.tanh_c.array() * k.o.array() * (one - k.o.array())).matrix();
  da.segment(3 * H, H) = (dc_total * k.i.array() * (one - k.g.array().square())).matrix();
  dc_prev = (dc_total * k.f.array()).matrix();
  return da;
}

}  // namespace detail

template <typename Scalar>
std::pair<Row<Scalar>, Row<Scalar>> lstm_step(const Row<Scalar>& x, const Row<Scalar>& h, const Row<Scalar>& c,
                                              const Mat<Scalar>& W, const Mat<Scalar>& U, const Mat<Scalar>& b,
                                              LstmStepCache<Scalar>* cache = nullptr) {
  detail::lstm_check(W, U, b);
  require_shape(x, 1, W.rows(), "lstm input");
  require_shape(h, 1, U.rows(), "lstm hidden state");
  require_shape(c, 1, U.rows(), "lstm cell state");
  LstmStepCache<Scalar> local;
  auto& k = cache != nullptr ? *cache : local;
  k.x = x;
  auto out = detail::lstm_cell<Scalar>(x * W, h, c, U, b, k);
  require_finite(out.first, "lstm_step");
  require_finite(out.second, "lstm_step");
  return out;
}

// Backward through one step: accumulates dW, dU, db and returns
// (dx, dh_prev, dc_prev).
template <typename Scalar>
std::tuple<Row<Scalar>, Row<Scalar>, Row<Scalar>> lstm_step_backward(const Row<Scalar>& dh, const Row<Scalar>& dc,
                                                                     const Mat<Scalar>& W, const Mat<Scalar>& U,
                                                                     const LstmStepCache<Scalar>& cache,
                                                                     Mat<Scalar>& dW, Mat<Scalar>& dU,
                                                                     Mat<Scalar>& db) {
  Row<Scalar> dc_prev;
  const Row<Scalar> da = detail::lstm_cell_backward(dh, dc, cache, dc_prev);
  dW.noalias() += cache.x.transpose() * da;
  dU.noalias() += cache.h_prev.transpose() * da;
  db += da;
  return {da * W.transpose(), da * U.transpose(), std::move(dc_prev)};
}

template <typename Scalar>
struct LstmSequenceCache {
  Mat<Scalar> x;
  std::vector<LstmStepCache<Scalar>> steps;
};

// Runs the cell over every row of x from a zero state; returns the final h.
template <typename Scalar>
Row<Scalar> lstm_forward(const Mat<Scalar>& x, const Mat<Scalar>& W, const Mat<Scalar>& U, const Mat<Scalar>& b,
                         LstmSequenceCache<Scalar>* cache = nullptr) {
  detail::lstm_check(W, U, b);
  require_shape(x, x.rows(), W.rows(), "lstm input sequence");
  const Eigen::Index H = U.rows();
  const Mat<Scalar> xw = x * W;
  Row<Scalar> h = Row<Scalar>::Zero(H);
  Row<Scalar> c = Row<Scalar>::Zero(H);
  std::vector<LstmStepCache<Scalar>> steps(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    auto [h_next, c_next] = detail::lstm_cell<Scalar>(xw.row(t), h, c, U, b, steps[static_cast<std::size_t>(t)]);
    h = std::move(h_next);
    c = std::move(c_next);
  }
  require_finite(h, "lstm");
  require_finite(c, "lstm");
  if (cache != nullptr) {
    cache->x = x;
    cache->steps = std::move(steps);
  }
  return h;
}

// Backpropagation through time from a gradient on the final hidden state.
// Accumulates dW, dU, db and returns dx (T x d).
template <typename Scalar>
Mat<Scalar> lstm_backward(const Row<Scalar>& dh_last, const Mat<Scalar>& W, const Mat<Scalar>& U,
                          const LstmSequenceCache<Scalar>& cache, Mat<Scalar>& dW, Mat<Scalar>& dU, Mat<Scalar>& db) {
  const Eigen::Index T = cache.x.rows();
  const Eigen::Index H = U.rows();
  Mat<Scalar> da(T, 4 * H);
  Mat<Scalar> h_prev(T, H);
  Row<Scalar> dh = dh_last;
  Row<Scalar> dc = Row<Scalar>::Zero(H);
  Row<Scalar> dc_prev;
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto& step = cache.steps[static_cast<std::size_t>(t)];
    da.row(t) = detail::lstm_cell_backward(dh, dc, step, dc_prev);
    h_prev.row(t) = step.h_prev;
    dh = da.row(t) * U.transpose();
    dc = dc_prev;
  }
  dW.noalias() += cache.x.transpose() * da;
  dU.noalias() += h_prev.transpose() * da;
  db += da.colwise().sum();
  return da * W.transpose();
}

}  // namespace toxic::nn
