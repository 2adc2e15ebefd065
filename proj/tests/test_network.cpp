#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>

#include "simplicity/network.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

using namespace simplicity;

namespace {

const std::vector<ActivationKind> kAllActivations = {
    ActivationKind::relu(), ActivationKind::tanh(), ActivationKind::sigmoid(),
    ActivationKind::leaky_relu(0.01)};

Mlp zero_network(std::vector<std::size_t> hidden, ActivationKind act = ActivationKind::relu()) {
  Prng rng(0);
  Mlp m = build_mlp(hidden, act, rng);
  for (auto& l : m.layers) {
    for (double& v : l.weights.values()) v = 0.0;
  }
  return m;
}

// Per-element forward pass written independently of the Matrix kernels.
std::vector<double> oracle_forward(const Mlp& m, std::span<const double> x) {
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const Layer& l = m.layers[li];
    std::vector<double> next(l.out());
    for (std::size_t o = 0; o < l.out(); ++o) {
      double z = l.bias(o, 0);
      for (std::size_t i = 0; i < l.in(); ++i) z += l.weights(o, i) * current[i];
      next[o] = li + 1 < m.layers.size() ? activate(z, m.activation) : z;
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace

TEST_CASE("build_mlp layer shapes") {
  Prng rng(1);
  const Mlp two = build_mlp(std::vector<std::size_t>{64, 64}, ActivationKind::relu(), rng);
  REQUIRE(two.layers.size() == 3);
  CHECK(two.layers[0].weights.shape() == "64x784");
  CHECK(two.layers[1].weights.shape() == "64x64");
  CHECK(two.layers[2].weights.shape() == "10x64");
  CHECK(two.layers[2].bias.shape() == "10x1");
  for (const auto& l : two.layers) {
    for (double b : l.bias.values()) REQUIRE(b == 0.0);
  }
  CHECK_NOTHROW(validate(two));

  const Mlp flat = build_mlp(std::vector<std::size_t>{}, ActivationKind::relu(), rng);
  REQUIRE(flat.layers.size() == 1);
  CHECK(flat.layers[0].weights.shape() == "10x784");

  const Mlp deep = build_mlp(std::vector<std::size_t>{64, 64, 128}, ActivationKind::relu(), rng);
  REQUIRE(deep.layers.size() == 4);
  CHECK(deep.layers[3].weights.shape() == "10x128");

  CHECK_THROWS_AS(build_mlp(std::vector<std::size_t>{64, 0}, ActivationKind::relu(), rng),
                  std::invalid_argument);
}

TEST_CASE("validate catches broken chains") {
  Prng rng(2);
  Mlp m = build_mlp(std::vector<std::size_t>{8}, ActivationKind::tanh(), rng);
  m.layers[1].weights = Matrix(10, 7);
  CHECK_THROWS_AS(validate(m), std::invalid_argument);
}

TEST_CASE("activation values and derivative conventions") {
  CHECK(activate(-1, ActivationKind::relu()) == 0.0);
  CHECK(activate(2, ActivationKind::relu()) == 2.0);
  CHECK(activate(-2, ActivationKind::leaky_relu(0.01)) == doctest::Approx(-0.02));
  CHECK(activate(0, ActivationKind::sigmoid()) == 0.5);
  CHECK(activate(0, ActivationKind::tanh()) == 0.0);

  CHECK(activate_grad(0, ActivationKind::relu()) == 0.0);
  CHECK(activate_grad(0, ActivationKind::leaky_relu(0.2)) == 0.2);
  CHECK(activate_grad(0, ActivationKind::sigmoid()) == 0.25);
  CHECK(activate_grad(0, ActivationKind::tanh()) == 1.0);

  CHECK_THROWS_AS(ActivationKind::leaky_relu(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ActivationKind::leaky_relu(1.0), std::invalid_argument);
  CHECK(parse_activation("leaky_relu", 0.05).slope == 0.05);
  CHECK_THROWS_AS(parse_activation("gelu"), std::invalid_argument);
}

TEST_CASE("forward special cases") {
  Prng rng(3);
  const Matrix x = testing::random_matrix(rng, 4, kImagePixels);

  const Matrix zeros = forward(zero_network({16, 8}), x);
  CHECK(zeros.shape() == "4x10");
  for (double v : zeros.values()) REQUIRE(v == 0.0);

  Mlp linear = zero_network({});
  for (std::size_t i = 0; i < 10; ++i) linear.layers[0].weights(i, i) = 1.0;
  const Matrix logits = forward(linear, x);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 10; ++c) REQUIRE(logits(r, c) == x(r, c));
  }

  CHECK_THROWS_AS(forward(linear, Matrix(2, 783)), std::invalid_argument);
}

TEST_CASE("forward agrees with the per-element oracle and is batch consistent") {
  for (const auto& act : kAllActivations) {
    Prng rng(17);
    Mlp m = build_mlp(std::vector<std::size_t>{12, 9}, act, rng);
    for (auto& l : m.layers) {
      for (double& b : l.bias.values()) b = rng.uniform(-0.5, 0.5);
    }
    const Matrix x = testing::random_matrix(rng, 7, kImagePixels);
    const Matrix batch = forward(m, x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto expected = oracle_forward(m, x.row(r));
      const Matrix single = forward(m, gather_rows(x, std::vector<std::size_t>{r}));
      for (std::size_t c = 0; c < 10; ++c) {
        REQUIRE(std::abs(batch(r, c) - expected[c]) < 1e-12);
        REQUIRE(std::abs(batch(r, c) - single(0, c)) < 1e-12);
      }
    }
  }
}

TEST_CASE("softmax cross-entropy anchors") {
  const std::vector<std::uint8_t> label = {4};
  const auto uniform = softmax_cross_entropy(Matrix(1, 10), label);
  CHECK(uniform.loss == doctest::Approx(std::log(10.0)).epsilon(1e-15));
  CHECK(uniform.loss == doctest::Approx(2.302585).epsilon(1e-6));

  Matrix confident(1, 10);
  confident(0, 0) = 1000.0;
  const auto sharp = softmax_cross_entropy(confident, std::vector<std::uint8_t>{0});
  CHECK(std::isfinite(sharp.loss));
  CHECK(sharp.loss >= 0.0);
  CHECK(sharp.loss < 1e-12);
  for (double v : sharp.dlogits.values()) REQUIRE(std::isfinite(v));
}

TEST_CASE("softmax cross-entropy matches a 50-digit oracle") {
  using Big = boost::multiprecision::cpp_dec_float_50;
  Prng rng(8);
  const Matrix logits = testing::random_matrix(rng, 5, 10, 8.0);
  const std::vector<std::uint8_t> labels = {0, 9, 4, 4, 2};

  Big total = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    Big denom = 0;
    for (std::size_t c = 0; c < 10; ++c) denom += boost::multiprecision::exp(Big(logits(r, c)));
    total += boost::multiprecision::log(denom) - Big(logits(r, labels[r]));
  }
  const double expected = static_cast<double>(total / 5);
  CHECK(std::abs(softmax_cross_entropy(logits, labels).loss - expected) < 1e-10);
}

TEST_CASE("softmax rows sum to one and loss is non-negative") {
  Prng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix logits = testing::random_matrix(rng, 8, 10, 30.0);
    const Matrix p = softmax(logits);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0.0;
      for (double v : p.row(r)) s += v;
      REQUIRE(std::abs(s - 1.0) < 1e-12);
    }
    std::vector<std::uint8_t> labels(8);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.below(10));
    REQUIRE(softmax_cross_entropy(logits, labels).loss >= 0.0);
  }
}

TEST_CASE("backward trivial cases") {
  Prng rng(21);
  const Mlp m = build_mlp(std::vector<std::size_t>{6, 5}, ActivationKind::tanh(), rng);
  const Matrix x = testing::random_matrix(rng, 3, kImagePixels);
  const ForwardTrace t = forward_trace(m, x);

  const Gradients zero = backward(m, t, Matrix(3, 10));
  for (const auto& l : zero.layers) {
    for (double v : l.weights.values()) REQUIRE(v == 0.0);
    for (double v : l.bias.values()) REQUIRE(v == 0.0);
  }

  // Mean loss over two copies of a sample equals the single-sample loss.
  const Matrix one = gather_rows(x, std::vector<std::size_t>{0});
  const Matrix two = gather_rows(x, std::vector<std::size_t>{0, 0});
  const std::vector<std::uint8_t> l1 = {3}, l2 = {3, 3};
  const ForwardTrace t1 = forward_trace(m, one), t2 = forward_trace(m, two);
  const Gradients g1 = backward(m, t1, softmax_cross_entropy(t1.logits(), l1).dlogits);
  const Gradients g2 = backward(m, t2, softmax_cross_entropy(t2.logits(), l2).dlogits);
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    for (std::size_t k = 0; k < g1.layers[li].weights.size(); ++k) {
      REQUIRE(g2.layers[li].weights.values()[k] ==
              doctest::Approx(g1.layers[li].weights.values()[k]).epsilon(1e-14));
    }
  }

  CHECK_THROWS_AS(backward(m, t, Matrix(2, 10)), std::invalid_argument);
  ForwardTrace shallow = t;
  shallow.pre.pop_back();
  CHECK_THROWS_AS(backward(m, shallow, Matrix(3, 10)), std::invalid_argument);
}

TEST_CASE("backward matches central differences for every activation") {
  for (const auto& act : kAllActivations) {
    CAPTURE(to_string(act));
    CHECK(testing::max_gradient_rel_error(act, 2024) < 1e-4);
  }
}

TEST_CASE("predict tie-break and argmax oracle") {
  CHECK(argmax_rows(Matrix(1, 10)) == std::vector<std::uint8_t>{0});
  Matrix row(1, 10);
  row(0, 7) = 3.0;
  CHECK(argmax_rows(row) == std::vector<std::uint8_t>{7});

  Prng rng(31);
  const Matrix logits = testing::random_matrix(rng, 1000, 10);
  const auto got = argmax_rows(logits);
  Matrix shifted = logits;
  for (std::size_t r = 0; r < 1000; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < 10; ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    REQUIRE(got[r] == best);
    const double shift = rng.uniform(-5.0, 5.0);
    for (double& v : shifted.row(r)) v += shift;
  }
  CHECK(argmax_rows(shifted) == got);
}

TEST_CASE("accuracy") {
  // Sample k lights pixel k; an identity-slice network classifies perfectly.
  Matrix raw(3, kImagePixels);
  std::vector<std::uint8_t> labels = {0, 1, 2};
  for (std::size_t k = 0; k < 3; ++k) raw(k, k) = 255.0;
  const Dataset toy = make_dataset(raw, labels);
  Mlp m = zero_network({});
  for (std::size_t i = 0; i < 10; ++i) m.layers[0].weights(i, i) = 1.0;
  CHECK(accuracy(m, toy) == 1.0);

  const Dataset empty{Matrix(0, kImagePixels), {}};
  CHECK_THROWS_AS(accuracy(m, empty), std::invalid_argument);
}

TEST_CASE("zero network on the MNIST test set predicts class 0 everywhere" *
          doctest::skip(!testing::mnist_dir().has_value())) {
  const auto dir = *testing::mnist_dir();
  const Dataset test = load_dataset(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  std::size_t zeros = 0;
  for (auto l : test.labels) zeros += l == 0;
  const double expected = double(zeros) / double(test.size());
  CHECK(accuracy(zero_network({64, 64}), test) == expected);
  CHECK(expected == doctest::Approx(0.098).epsilon(0.01));
}
