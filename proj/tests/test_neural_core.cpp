#include <doctest.h>

#include <cmath>

#include "grad_harness.hpp"
#include "toxic/neural/adam.hpp"
#include "toxic/neural/layers.hpp"
#include "toxic/neural/loss.hpp"

using namespace toxic;
using namespace toxic::nn;

TEST_CASE("dense examples") {
  Mat<double> I = Mat<double>::Identity(3, 3);
  Mat<double> zero_b = Mat<double>::Zero(1, 3);
  Row<double> x(3);
  x << 1.5, -2.0, 0.25;
  CHECK(dense(x, I, zero_b, Activation::none) == x);

  Mat<double> W(2, 2);
  W << 1, 2, 3, 4;
  Mat<double> b(1, 2);
  b << -1, 1;
  CHECK(dense<double>(Row<double>::Zero(2), W, b, Activation::relu) == (Row<double>(2) << 0, 1).finished());
  CHECK(dense<double>(Row<double>::Zero(2), W, b, Activation::sigmoid)[0] == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));

  CHECK_THROWS_AS(dense<double>(Row<double>::Zero(3), W, b, Activation::none), ShapeError);
}

TEST_CASE("sigmoid is stable at extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(std::isfinite(sigmoid(-100.0f)));
}

TEST_CASE("conv1d examples") {
  SUBCASE("output length is L - k + 1") {
    const auto y = conv1d<double>(Mat<double>::Ones(5, 2), Mat<double>::Ones(6, 4), Mat<double>::Zero(1, 4), 3);
    CHECK(y.rows() == 3);
    CHECK(y.cols() == 4);
    CHECK(y(0, 0) == 6.0);
  }
  SUBCASE("sum kernel over one window") {
    Mat<double> x(3, 1);
    x << 1, 2, 3;
    const auto y = conv1d<double>(x, Mat<double>::Ones(3, 1), Mat<double>::Zero(1, 1), 3);
    REQUIRE(y.rows() == 1);
    CHECK(y(0, 0) == 6.0);
  }
  SUBCASE("tap order follows time") {
    Mat<double> x(4, 1);
    x << 1, 10, 100, 1000;
    Mat<double> k(2, 1);
    k << 1, 2;  // tap 0 weight 1, tap 1 weight 2
    const auto y = conv1d<double>(x, k, Mat<double>::Zero(1, 1), 2);
    CHECK(y(0, 0) == 21.0);
    CHECK(y(2, 0) == 2100.0);
  }
  SUBCASE("zero input gives relu of the bias") {
    Mat<double> b(1, 3);
    b << -0.5, 0.0, 0.75;
    const auto y = conv1d<double>(Mat<double>::Zero(4, 2), Mat<double>::Ones(4, 3), b, 2);
    for (Eigen::Index t = 0; t < y.rows(); ++t) {
      CHECK(y(t, 0) == 0.0);
      CHECK(y(t, 1) == 0.0);
      CHECK(y(t, 2) == 0.75);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(conv1d<double>(Mat<double>::Ones(2, 1), Mat<double>::Ones(3, 1), Mat<double>::Zero(1, 1), 3),
                    ShapeError);
    CHECK_THROWS_AS(conv1d<double>(Mat<double>::Ones(5, 2), Mat<double>::Ones(5, 1), Mat<double>::Zero(1, 1), 3),
                    ShapeError);
  }
}

TEST_CASE("global max pool examples") {
  Mat<double> x(2, 2);
  x << 1, 5, 3, 2;
  MaxPoolCache cache;
  CHECK(global_max_pool(x, &cache) == (Row<double>(2) << 3, 5).finished());
  CHECK(cache.argmax == std::vector<Eigen::Index>{1, 0});

  Mat<double> tie(3, 1);
  tie << 4, 4, 1;
  global_max_pool(tie, &cache);
  CHECK(cache.argmax[0] == 0);
  const auto dx = global_max_pool_backward<double>((Row<double>(1) << 2.5).finished(), cache);
  CHECK(dx(0, 0) == 2.5);
  CHECK(dx(1, 0) == 0.0);
}

TEST_CASE("lstm step examples") {
  const Eigen::Index d = 3, H = 2;
  Rng rng(1);
  const auto W = harness::random_mat<double>(rng, d, 4 * H);
  const auto U = harness::random_mat<double>(rng, H, 4 * H);

  SUBCASE("zero everything stays zero") {
    const auto [h, c] = lstm_step<double>(Row<double>::Zero(d), Row<double>::Zero(H), Row<double>::Zero(H), W, U,
                                          Mat<double>::Zero(1, 4 * H));
    CHECK(h.isZero(0));
    CHECK(c.isZero(0));
  }
  SUBCASE("bias 10 matches the gate formulas directly") {
    const auto [h, c] = lstm_step<double>(Row<double>::Zero(d), Row<double>::Zero(H), Row<double>::Zero(H), W, U,
                                          Mat<double>::Constant(1, 4 * H, 10.0));
    const double s = 1.0 / (1.0 + std::exp(-10.0));
    const double c_expected = s * std::tanh(10.0);
    for (Eigen::Index j = 0; j < H; ++j) {
      CHECK(std::abs(c[j] - c_expected) < 1e-15);
      CHECK(std::abs(h[j] - s * std::tanh(c_expected)) < 1e-15);
    }
  }
  SUBCASE("gate order is input, forget, output, candidate") {
    // Only the forget gate open: c' = c, i = 0 removes the candidate.
    Mat<double> b = Mat<double>::Constant(1, 4 * H, -50.0);
    b.block(0, H, 1, H).setConstant(50.0);
    Row<double> c0(H);
    c0 << 0.3, -0.7;
    const auto [h, c] = lstm_step<double>(Row<double>::Zero(d), Row<double>::Zero(H), c0, Mat<double>::Zero(d, 4 * H),
                                          Mat<double>::Zero(H, 4 * H), b);
    CHECK((c - c0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(h.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(lstm_step<double>(Row<double>::Zero(d + 1), Row<double>::Zero(H), Row<double>::Zero(H), W, U,
                                      Mat<double>::Zero(1, 4 * H)),
                    ShapeError);
    CHECK_THROWS_AS(lstm_step<double>(Row<double>::Zero(d), Row<double>::Zero(H), Row<double>::Zero(H), W, U,
                                      Mat<double>::Zero(1, 3 * H)),
                    ShapeError);
  }
}

TEST_CASE("lstm state bounds hold for random inputs") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(4)), H = 1 + static_cast<Eigen::Index>(rng.below(5));
    const auto x = harness::random_row<double>(rng, d, 5.0);
    const auto h = harness::random_row<double>(rng, H);
    const auto c = harness::random_row<double>(rng, H, 10.0);
    const auto [h2, c2] = lstm_step<double>(x, h, c, harness::random_mat<double>(rng, d, 4 * H, 3.0),
                                            harness::random_mat<double>(rng, H, 4 * H, 3.0),
                                            harness::random_mat<double>(rng, 1, 4 * H, 3.0));
    for (Eigen::Index j = 0; j < H; ++j) {
      CHECK(std::abs(h2[j]) <= 1.0);
      CHECK(std::abs(c2[j]) <= std::abs(c[j]) + 1.0);
    }
  }
}

TEST_CASE("lstm_forward equals repeated lstm_step from zero state") {
  Rng rng(4);
  const auto x = harness::random_mat<double>(rng, 5, 3);
  const auto W = harness::random_mat<double>(rng, 3, 8);
  const auto U = harness::random_mat<double>(rng, 2, 8);
  const auto b = harness::random_mat<double>(rng, 1, 8);
  Row<double> h = Row<double>::Zero(2), c = Row<double>::Zero(2);
  for (Eigen::Index t = 0; t < 5; ++t) std::tie(h, c) = lstm_step<double>(x.row(t), h, c, W, U, b);
  CHECK((lstm_forward(x, W, U, b) - h).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("binary cross-entropy") {
  Row<double> half = Row<double>::Constant(6, 0.5);
  CHECK(std::abs(bce_loss(half, LabelVector{1, 0, 1, 0, 1, 0}) - std::log(2.0)) < 1e-12);

  Row<double> right(6);
  right << 1, 0, 1, 0, 0, 0;
  CHECK(bce_loss(right, LabelVector{1, 0, 1, 0, 0, 0}) <= 1e-6);
  CHECK(std::isfinite(bce_loss(right, LabelVector{0, 1, 0, 1, 1, 1})));

  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    Row<double> p(6);
    for (auto& v : p) v = rng.uniform();
    LabelVector y{};
    for (auto& v : y) v = static_cast<std::uint8_t>(rng.below(2));
    CHECK(bce_loss(p, y) >= 0.0);
  }
  CHECK_THROWS_AS(bce_loss<double>(Row<double>::Constant(5, 0.5), LabelVector{}), ShapeError);
}

TEST_CASE("bce_grad matches finite differences away from the clip") {
  Rng rng(2);
  Row<double> p(6);
  for (auto& v : p) v = rng.uniform(0.05, 0.95);
  const LabelVector y{1, 0, 0, 1, 1, 0};
  const Row<double> g = bce_grad(p, y);
  const std::function<double()> loss = [&] { return bce_loss(p, y); };
  CHECK(grad_check<double>(loss, std::span<double>(p.data(), 6), std::span<const double>(g.data(), 6), 1e-7) < 1e-6);
}

TEST_CASE("64-bit layer gradients agree with finite differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    CHECK(harness::check_dense<double>(seed, Activation::none) < 1e-5);
    CHECK(harness::check_dense<double>(seed, Activation::relu) < 1e-5);
    CHECK(harness::check_dense<double>(seed, Activation::sigmoid) < 1e-5);
    CHECK(harness::check_conv<double>(seed) < 1e-5);
    CHECK(harness::check_max_pool<double>(seed) < 1e-5);
    CHECK(harness::check_lstm_step<double>(seed) < 1e-5);
    CHECK(harness::check_lstm_sequence<double>(seed) < 1e-5);
    CHECK(harness::check_bce_logits<double>(seed) < 1e-5);
  }
}

TEST_CASE("32-bit layer gradients agree with finite differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    CHECK(harness::check_all_layers<float>(seed) < 1e-2);
  }
}

TEST_CASE("adam") {
  ParameterSet<double> params;
  Mat<double> start(3, 2);
  start << 1, 2, 3, 4, 5, 6;
  params.add("w", start);
  AdamState<double> state(params, AdamConfig{});

  SUBCASE("zero gradient leaves parameters unchanged") {
    adam_step(params, state);
    CHECK(params[0].value == start);
  }
  SUBCASE("first step moves by about lr against the gradient sign") {
    params[0].grad << 0.5, -2, 1e-3, -1e-3, 7, -7;
    adam_step(params, state);
    const Mat<double> delta = params[0].value - start;
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
      CHECK(std::abs(std::abs(delta.data()[i]) - 1e-3) < 1e-7);
      CHECK(delta.data()[i] * params[0].grad.data()[i] < 0);
    }
  }
  SUBCASE("frozen rows and frozen parameters do not move") {
    params[0].frozen_rows = {1};
    params[0].grad.setOnes();
    adam_step(params, state);
    CHECK(params[0].value.row(1) == start.row(1));
    CHECK(params[0].value.row(0) != start.row(0));

    const Mat<double> now = params[0].value;
    params[0].trainable = false;
    params[0].grad.setOnes();
    adam_step(params, state);
    CHECK(params[0].value == now);
  }
  SUBCASE("deterministic") {
    ParameterSet<double> other;
    other.add("w", start);
    AdamState<double> other_state(other, AdamConfig{});
    for (int step = 0; step < 5; ++step) {
      params[0].grad.setConstant(0.1 * step - 0.2);
      other[0].grad.setConstant(0.1 * step - 0.2);
      adam_step(params, state);
      adam_step(other, other_state);
    }
    CHECK(params[0].value == other[0].value);
  }
}

TEST_CASE("glorot uniform respects its bound") {
  Rng rng(11);
  const auto m = glorot_uniform<double>(20, 30, 20, 30, rng);
  CHECK(m.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 50.0));
  CHECK(std::abs(m.mean()) < 0.02);
}

TEST_CASE("relative error") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == 0.5);
  CHECK(relative_error(0.0, 1e-12) == doctest::Approx(1e-4));
}
