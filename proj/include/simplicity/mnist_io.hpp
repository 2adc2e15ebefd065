#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "simplicity/numeric.hpp"

namespace simplicity {

inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kImagePixels = kImageSide * kImageSide;
inline constexpr std::size_t kNumClasses = 10;

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Malformed or truncated IDX payload.
class IdxFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normalised images (N x 784, values in [-1, 1]) and their labels.
struct Dataset {
  Matrix images;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
};

/// Raw pixels as reals 0..255, one image per row.
Matrix parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Inverse of parse_idx_images for integral pixel values.
std::vector<std::uint8_t> encode_idx_images(const Matrix& raw_pixels);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

/// (pixel / 255 - 0.5) / 0.5
double normalize(double pixel);

Dataset make_dataset(const Matrix& raw_pixels, std::vector<std::uint8_t> labels);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

struct BatchPlan {
  std::vector<std::size_t> order;
  std::size_t batch_size = 0;

  std::size_t batch_count() const {
    return (order.size() + batch_size - 1) / batch_size;
  }
  std::span<const std::size_t> batch(std::size_t i) const;
};

/// Fisher-Yates permutation of 0..n-1 drawn from `rng`, cut into batches.
BatchPlan plan_batches(std::size_t n, std::size_t batch_size, Prng& rng);

struct Batch {
  Matrix images;
  std::vector<std::uint8_t> labels;
};

Batch gather_batch(const Dataset& d, std::span<const std::size_t> indices);

std::vector<Batch> shuffled_batches(const Dataset& d, std::size_t batch_size, Prng& rng);

}  // namespace simplicity
