#include "simplicity/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace simplicity {
namespace {

constexpr std::size_t kEvalChunk = 1000;

void add_bias(Matrix& z, const Matrix& bias) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias(c, 0);
  }
}

Matrix apply(const Matrix& z, const ActivationKind& k) {
  Matrix a = z;
  for (double& v : a.values()) v = activate(v, k);
  return a;
}

}  // namespace

ActivationKind ActivationKind::leaky_relu(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw std::invalid_argument("LeakyReLU slope must lie in (0, 1), got " + std::to_string(slope));
  }
  return {Activation::kLeakyReLU, slope};
}

std::string to_string(const ActivationKind& k) {
  switch (k.tag) {
    case Activation::kReLU: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kLeakyReLU: return "leaky_relu";
  }
  return "unknown";
}

ActivationKind parse_activation(const std::string& name, double slope) {
  if (name == "relu") return ActivationKind::relu();
  if (name == "tanh") return ActivationKind::tanh();
  if (name == "sigmoid") return ActivationKind::sigmoid();
  if (name == "leaky_relu") return ActivationKind::leaky_relu(slope);
  throw std::invalid_argument("unknown activation '" + name + "'");
}

double activate(double z, const ActivationKind& k) {
  switch (k.tag) {
    case Activation::kReLU: return z > 0.0 ? z : 0.0;
    case Activation::kLeakyReLU: return z > 0.0 ? z : k.slope * z;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

double activate_grad(double z, const ActivationKind& k) {
  switch (k.tag) {
    case Activation::kReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyReLU: return z > 0.0 ? 1.0 : k.slope;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

Mlp build_mlp(std::span<const std::size_t> hidden, const ActivationKind& act, Prng& rng) {
  Mlp m{{}, act};
  std::size_t fan_in = kImagePixels;
  auto add_layer = [&](std::size_t fan_out) {
    m.layers.push_back({glorot_init(rng, fan_in, fan_out), Matrix(fan_out, 1)});
    fan_in = fan_out;
  };
  for (std::size_t width : hidden) {
    if (width == 0) throw std::invalid_argument("hidden layer width must be >= 1");
    add_layer(width);
  }
  add_layer(kNumClasses);
  return m;
}

void validate(const Mlp& m) {
  if (m.layers.empty()) throw std::invalid_argument("network has no layers");
  if (m.input_dim() != kImagePixels) {
    throw std::invalid_argument("first layer must take 784 inputs, takes " +
                                std::to_string(m.input_dim()));
  }
  if (m.output_dim() != kNumClasses) {
    throw std::invalid_argument("last layer must emit 10 logits, emits " +
                                std::to_string(m.output_dim()));
  }
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const Layer& l = m.layers[i];
    if (l.bias.rows() != l.out() || l.bias.cols() != 1) {
      throw std::invalid_argument("layer " + std::to_string(i) + " bias is " + l.bias.shape() +
                                  ", weights " + l.weights.shape());
    }
    if (i + 1 < m.layers.size() && m.layers[i + 1].in() != l.out()) {
      throw std::invalid_argument("layer " + std::to_string(i) + " emits " +
                                  std::to_string(l.out()) + " but layer " + std::to_string(i + 1) +
                                  " takes " + std::to_string(m.layers[i + 1].in()));
    }
  }
}

ForwardTrace forward_trace(const Mlp& m, const Matrix& x) {
  if (m.layers.empty() || x.cols() != m.input_dim()) {
    throw std::invalid_argument("forward: input " + x.shape() + " does not fit network input " +
                                std::to_string(m.layers.empty() ? 0 : m.input_dim()));
  }
  ForwardTrace t;
  t.input = x;
  const Matrix* current = &t.input;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const Layer& l = m.layers[i];
    Matrix z = matmul_transposed(*current, l.weights);
    add_bias(z, l.bias);
    const bool last = i + 1 == m.layers.size();
    t.post.push_back(last ? z : apply(z, m.activation));
    t.pre.push_back(std::move(z));
    current = &t.post.back();
  }
  return t;
}

Matrix forward(const Mlp& m, const Matrix& x) {
  if (m.layers.empty() || x.cols() != m.input_dim()) {
    throw std::invalid_argument("forward: input " + x.shape() + " does not fit network input " +
                                std::to_string(m.layers.empty() ? 0 : m.input_dim()));
  }
  Matrix current = x;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    Matrix z = matmul_transposed(current, m.layers[i].weights);
    add_bias(z, m.layers[i].bias);
    if (i + 1 < m.layers.size()) {
      for (double& v : z.values()) v = activate(v, m.activation);
    }
    current = std::move(z);
  }
  return current;
}

Matrix softmax(const Matrix& logits) {
  Matrix p = logits;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto row = p.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) total += (v = std::exp(v - peak));
    for (double& v : row) v /= total;
  }
  return p;
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const std::uint8_t> labels) {
  if (logits.rows() == 0 || logits.rows() != labels.size()) {
    throw std::invalid_argument("softmax_cross_entropy: logits " + logits.shape() + " vs " +
                                std::to_string(labels.size()) + " labels");
  }
  const double batch = static_cast<double>(logits.rows());
  LossResult out{0.0, Matrix(logits.rows(), logits.cols())};
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (labels[r] >= logits.cols()) {
      throw std::invalid_argument("label " + std::to_string(labels[r]) + " outside logit width " +
                                  std::to_string(logits.cols()));
    }
    auto row = logits.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - peak);
    const double log_total = std::log(total);
    out.loss += log_total - (row[labels[r]] - peak);
    auto grad = out.dlogits.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      grad[c] = std::exp(row[c] - peak - log_total) / batch;
    }
    grad[labels[r]] -= 1.0 / batch;
  }
  out.loss /= batch;
  return out;
}

Gradients backward(const Mlp& m, const ForwardTrace& t, const Matrix& dlogits) {
  if (t.pre.size() != m.layers.size() || t.post.size() != m.layers.size()) {
    throw std::invalid_argument("backward: trace depth " + std::to_string(t.pre.size()) +
                                " does not match " + std::to_string(m.layers.size()) + " layers");
  }
  if (dlogits.rows() != t.input.rows() || dlogits.cols() != m.output_dim()) {
    throw std::invalid_argument("backward: dlogits " + dlogits.shape() + " vs batch " +
                                std::to_string(t.input.rows()) + " x " +
                                std::to_string(m.output_dim()));
  }
  Gradients g;
  g.layers.resize(m.layers.size());
  Matrix delta = dlogits;  // dL/dz for the current layer
  for (std::size_t i = m.layers.size(); i-- > 0;) {
    const Layer& l = m.layers[i];
    const Matrix& below = i == 0 ? t.input : t.post[i - 1];
    if (t.pre[i].rows() != delta.rows() || t.pre[i].cols() != l.out() ||
        below.cols() != l.in()) {
      throw std::invalid_argument("backward: stale trace at layer " + std::to_string(i));
    }
    g.layers[i].weights = matmul(transpose(delta), below);
    Matrix db(l.out(), 1);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) db(c, 0) += row[c];
    }
    g.layers[i].bias = std::move(db);
    if (i == 0) break;
    Matrix upstream = matmul(delta, l.weights);
    const Matrix& z = t.pre[i - 1];
    auto up = upstream.values();
    auto zv = z.values();
    for (std::size_t k = 0; k < up.size(); ++k) up[k] *= activate_grad(zv[k], m.activation);
    delta = std::move(upstream);
  }
  return g;
}

std::vector<std::uint8_t> argmax_rows(const Matrix& logits) {
  std::vector<std::uint8_t> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    out[r] = static_cast<std::uint8_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<std::uint8_t> predict(const Mlp& m, const Matrix& x) {
  return argmax_rows(forward(m, x));
}

double accuracy(const Mlp& m, const Dataset& d) {
  if (d.size() == 0) throw std::invalid_argument("accuracy of an empty dataset is undefined");
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < d.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(d.size(), begin + kEvalChunk);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const auto labels = predict(m, gather_rows(d.images, idx));
    for (std::size_t i = 0; i < labels.size(); ++i) correct += labels[i] == d.labels[begin + i];
  }
  return static_cast<double>(correct) / static_cast<double>(d.size());
}

}  // namespace simplicity
