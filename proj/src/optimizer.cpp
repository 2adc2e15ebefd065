#include "simplicity/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace simplicity {
namespace {

Gradients zeros_like(const Mlp& m) {
  Gradients g;
  g.layers.reserve(m.layers.size());
  for (const Layer& l : m.layers) {
    g.layers.push_back({Matrix(l.weights.rows(), l.weights.cols()),
                        Matrix(l.bias.rows(), l.bias.cols())});
  }
  return g;
}

bool same_shape(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

void update(std::span<double> param, std::span<const double> grad, std::span<double> m,
            std::span<double> v, const AdamState& s, double correct1, double correct2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correct1;
    const double v_hat = v[i] / correct2;
    param[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

}  // namespace

AdamState adam_init(const Mlp& m, double lr) {
  if (!(lr > 0.0)) {
    throw std::invalid_argument("Adam learning rate must be positive, got " + std::to_string(lr));
  }
  AdamState s;
  s.first = zeros_like(m);
  s.second = zeros_like(m);
  s.lr = lr;
  return s;
}

void adam_step(Mlp& m, const Gradients& g, AdamState& s) {
  const std::size_t depth = m.layers.size();
  if (g.layers.size() != depth || s.first.layers.size() != depth ||
      s.second.layers.size() != depth) {
    throw std::invalid_argument("adam_step: gradient depth does not match network depth " +
                                std::to_string(depth));
  }
  for (std::size_t i = 0; i < depth; ++i) {
    const Layer& p = m.layers[i];
    const Layer& d = g.layers[i];
    if (!same_shape(p.weights, d.weights) || !same_shape(p.bias, d.bias) ||
        !same_shape(p.weights, s.first.layers[i].weights) ||
        !same_shape(p.weights, s.second.layers[i].weights)) {
      throw std::invalid_argument("adam_step: layer " + std::to_string(i) + " shape mismatch (" +
                                  p.weights.shape() + " vs gradient " + d.weights.shape() + ")");
    }
    for (const Matrix* mat : {&d.weights, &d.bias}) {
      for (double x : mat->values()) {
        if (std::isnan(x)) {
          throw std::domain_error("NaN gradient in layer " + std::to_string(i) +
                                  (mat == &d.weights ? " weights" : " bias"));
        }
      }
    }
  }

  ++s.step;
  const double t = static_cast<double>(s.step);
  const double correct1 = 1.0 - std::pow(s.beta1, t);
  const double correct2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t i = 0; i < depth; ++i) {
    update(m.layers[i].weights.values(), g.layers[i].weights.values(),
           s.first.layers[i].weights.values(), s.second.layers[i].weights.values(), s, correct1,
           correct2);
    update(m.layers[i].bias.values(), g.layers[i].bias.values(), s.first.layers[i].bias.values(),
           s.second.layers[i].bias.values(), s, correct1, correct2);
  }
}

}  // namespace simplicity
