#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace simplicity {

/// Dense row-major matrix of doubles. Every operation in this library that
/// produces a Matrix yields rows >= 1 and cols >= 1.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  std::string shape() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products accumulate over k in ascending order for every output element, so
// results are bit-identical from run to run.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// a * b^T without materialising the transpose in the caller.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);

/// Rows of `m` selected by `indices`, in that order.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices);

double l2_norm(std::span<const double> v);

/// splitmix64 generator. A given seed produces the same sequence everywhere.
class Prng {
 public:
  explicit Prng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next();
  std::uint64_t state() const { return state_; }

  /// Uniform in [lo, hi). Throws std::invalid_argument unless lo < hi.
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; consumes two draws per call.
  double gaussian();

  /// Uniform index in [0, bound).
  std::size_t below(std::size_t bound);

 private:
  std::uint64_t state_;
};

/// fan_out x fan_in matrix, entries uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_init(Prng& rng, std::size_t fan_in, std::size_t fan_out);

}  // namespace simplicity
