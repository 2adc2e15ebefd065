#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simplicity/mnist_io.hpp"
#include "simplicity/numeric.hpp"

namespace simplicity {

enum class Activation { kReLU, kTanh, kSigmoid, kLeakyReLU };

struct ActivationKind {
  Activation tag = Activation::kReLU;
  double slope = 0.01;  // LeakyReLU only; must lie in (0, 1)

  static ActivationKind relu() { return {Activation::kReLU}; }
  static ActivationKind tanh() { return {Activation::kTanh}; }
  static ActivationKind sigmoid() { return {Activation::kSigmoid}; }
  static ActivationKind leaky_relu(double slope = 0.01);

  friend bool operator==(const ActivationKind&, const ActivationKind&) = default;
};

std::string to_string(const ActivationKind& k);
/// Accepts "relu", "tanh", "sigmoid", "leaky_relu".
ActivationKind parse_activation(const std::string& name, double slope = 0.01);

double activate(double z, const ActivationKind& k);
/// d activate / dz. At z == 0, ReLU gives 0 and LeakyReLU gives the slope.
double activate_grad(double z, const ActivationKind& k);

struct Layer {
  Matrix weights;  // out x in
  Matrix bias;     // out x 1

  std::size_t in() const { return weights.cols(); }
  std::size_t out() const { return weights.rows(); }
};

/// Fully connected classifier: hidden layers use `activation`, the final
/// layer emits raw logits.
struct Mlp {
  std::vector<Layer> layers;
  ActivationKind activation;

  std::size_t input_dim() const { return layers.front().in(); }
  std::size_t output_dim() const { return layers.back().out(); }
  std::size_t parameter_count() const;
};

Mlp build_mlp(std::span<const std::size_t> hidden, const ActivationKind& act, Prng& rng);

/// Throws std::invalid_argument unless shapes chain from 784 to 10.
void validate(const Mlp& m);

struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> pre;   // z per layer
  std::vector<Matrix> post;  // activation per layer; the last entry is the logits

  const Matrix& logits() const { return post.back(); }
};

struct Gradients {
  std::vector<Layer> layers;  // dW, db mirroring the Mlp
};

Matrix forward(const Mlp& m, const Matrix& x);
ForwardTrace forward_trace(const Mlp& m, const Matrix& x);

Matrix softmax(const Matrix& logits);

struct LossResult {
  double loss = 0.0;
  Matrix dlogits;
};

/// Mean cross-entropy of softmax(logits) against `labels`, and its gradient
/// (softmax - onehot) / batch.
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const std::uint8_t> labels);

Gradients backward(const Mlp& m, const ForwardTrace& t, const Matrix& dlogits);

/// Row-wise argmax; the lowest index wins ties.
std::vector<std::uint8_t> argmax_rows(const Matrix& logits);
std::vector<std::uint8_t> predict(const Mlp& m, const Matrix& x);

/// Fraction of correctly classified samples. Evaluated in chunks so the full
/// test set never materialises as one activation matrix.
double accuracy(const Mlp& m, const Dataset& d);

}  // namespace simplicity
