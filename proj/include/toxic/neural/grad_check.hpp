#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

namespace toxic::nn {

// Relative error |a - n| / max(|a|, |n|, 1e-8).
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

// Compares an analytic gradient against central differences
// (f(theta + h) - f(theta - h)) / 2h, one coordinate at a time. `params` is
// perturbed in place and restored. Returns the largest relative error.
template <typename Scalar>
double grad_check(const std::function<Scalar()>& loss, std::span<Scalar> params, std::span<const Scalar> analytic,
                  Scalar h = Scalar(1e-5)) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Scalar saved = params[i];
    params[i] = saved + h;
    const Scalar up = loss();
    params[i] = saved - h;
    const Scalar down = loss();
    params[i] = saved;
    const double numeric = static_cast<double>((up - down) / (Scalar(2) * h));
    worst = std::max(worst, relative_error(static_cast<double>(analytic[i]), numeric));
  }
  return worst;
}

}  // namespace toxic::nn
