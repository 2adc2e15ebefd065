#include "simplicity/numeric.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace simplicity {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("matrix data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul dimension mismatch: " + a.shape() + " * " + b.shape());
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t width = b.cols();
  // i-k-j order: each out(i, j) still sums k = 0, 1, ... in sequence, and the
  // inner j loop runs over contiguous memory.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    const double* lhs = a.row(i).data();
    for (std::size_t k = 0; k < inner; ++k) {
      const double scale = lhs[k];
      const double* rhs = b.row(k).data();
      for (std::size_t j = 0; j < width; ++j) dst[j] += scale * rhs[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul dimension mismatch: " + a.shape() + " * (" + b.shape() +
                                ")^T");
  }
  return matmul(a, transpose(b));
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m.rows()) {
      throw std::out_of_range("row index " + std::to_string(indices[i]) + " outside " + m.shape());
    }
    auto src = m.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

std::uint64_t Prng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Prng::uniform(double lo, double hi) {
  if (!(lo < hi)) {
    throw std::invalid_argument("uniform requires lo < hi, got [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + ")");
  }
  // Top 53 bits of next()/2^64; exactly representable and strictly below 1.
  const double unit = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

double Prng::gaussian() {
  const double u1 = 1.0 - uniform(0.0, 1.0);  // (0, 1]
  const double u2 = uniform(0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Prng::below(std::size_t bound) {
  if (bound == 0) throw std::invalid_argument("below(0) has no valid result");
  return static_cast<std::size_t>(next() % bound);
}

Matrix glorot_init(Prng& rng, std::size_t fan_in, std::size_t fan_out) {
  if (fan_in == 0 || fan_out == 0) {
    throw std::invalid_argument("glorot_init needs non-zero fans, got fan_in=" +
                                std::to_string(fan_in) + " fan_out=" + std::to_string(fan_out));
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_out, fan_in);
  for (double& x : w.values()) x = rng.uniform(-limit, limit);
  return w;
}

}  // namespace simplicity
