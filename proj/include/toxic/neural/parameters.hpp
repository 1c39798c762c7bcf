#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "toxic/neural/tensor.hpp"
#include "toxic/random.hpp"

namespace toxic::nn {

template <typename Scalar>
struct Parameter {
  std::string name;
  Mat<Scalar> value;
  Mat<Scalar> grad;
  bool trainable = true;
  // Rows never touched by the optimizer (the PAD embedding row).
  std::vector<Eigen::Index> frozen_rows;
  // Gradients arrive as scattered rows (embedding lookups) rather than dense.
  bool row_sparse = false;
};

template <typename Scalar>
class ParameterSet {
 public:
  std::size_t add(std::string name, Mat<Scalar> value) {
    Parameter<Scalar> p;
    p.name = std::move(name);
    p.grad = Mat<Scalar>::Zero(value.rows(), value.cols());
    p.value = std::move(value);
    params_.push_back(std::move(p));
    return params_.size() - 1;
  }

  Parameter<Scalar>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<Scalar>& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  const Parameter<Scalar>* find(std::string_view name) const {
    for (const auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  std::size_t count(bool trainable_only = false) const {
    std::size_t n = 0;
    for (const auto& p : params_) {
      if (!trainable_only || p.trainable) n += static_cast<std::size_t>(p.value.size());
    }
    return n;
  }

 private:
  std::vector<Parameter<Scalar>> params_;
};

// One example's gradient. Dense slots mirror the parameter set; a row-sparse
// parameter gets an empty dense slot and its rows are listed in `rows`.
template <typename Scalar>
struct GradientBuffer {
  std::vector<Mat<Scalar>> dense;
  std::size_t sparse_param = 0;
  std::vector<std::int32_t> rows;
  Mat<Scalar> row_grads;
  Scalar loss = 0;

  void reset(const ParameterSet<Scalar>& params) {
    dense.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i].row_sparse) {
        sparse_param = i;
        dense[i].resize(0, 0);
      } else {
        dense[i].setZero(params[i].value.rows(), params[i].value.cols());
      }
    }
    rows.clear();
    row_grads.resize(0, 0);
    loss = 0;
  }
};

// Adds one example's gradient into the parameter gradients, scaled.
template <typename Scalar>
void accumulate(ParameterSet<Scalar>& params, const GradientBuffer<Scalar>& g, Scalar scale = Scalar(1)) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (g.dense[i].size() > 0) params[i].grad.noalias() += scale * g.dense[i];
  }
  if (!g.rows.empty()) {
    auto& grad = params[g.sparse_param].grad;
    for (std::size_t t = 0; t < g.rows.size(); ++t) {
      grad.row(g.rows[t]) += scale * g.row_grads.row(static_cast<Eigen::Index>(t));
    }
  }
}

// Glorot/Xavier uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename Scalar>
Mat<Scalar> glorot_uniform(Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  Mat<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(rng.uniform(-limit, limit));
  return m;
}

}  // namespace toxic::nn
