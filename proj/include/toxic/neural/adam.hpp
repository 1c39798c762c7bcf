#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "toxic/neural/parameters.hpp"

namespace toxic::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  AdamConfig config;
  std::vector<Mat<Scalar>> m;
  std::vector<Mat<Scalar>> v;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(const ParameterSet<Scalar>& params, AdamConfig cfg) : config(cfg) {
    for (const auto& p : params) {
      m.push_back(Mat<Scalar>::Zero(p.value.rows(), p.value.cols()));
      v.push_back(Mat<Scalar>::Zero(p.value.rows(), p.value.cols()));
    }
  }
};

// One bias-corrected Adam update over every trainable parameter. Frozen rows
// have their gradient cleared first so their moments stay zero.
template <typename Scalar>
void adam_step(ParameterSet<Scalar>& params, AdamState<Scalar>& state) {
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const auto m_scale = static_cast<Scalar>(1.0 / (1.0 - std::pow(c.beta1, t)));
  const auto v_scale = static_cast<Scalar>(1.0 / (1.0 - std::pow(c.beta2, t)));
  const auto b1 = static_cast<Scalar>(c.beta1);
  const auto b2 = static_cast<Scalar>(c.beta2);
  const auto lr = static_cast<Scalar>(c.learning_rate);
  const auto eps = static_cast<Scalar>(c.epsilon);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (!p.trainable) continue;
    for (auto r : p.frozen_rows) p.grad.row(r).setZero();
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = b1 * m + (Scalar(1) - b1) * p.grad;
    v = b2 * v + (Scalar(1) - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (m.array() * m_scale) / ((v.array() * v_scale).sqrt() + eps);
  }
}

}  // namespace toxic::nn
