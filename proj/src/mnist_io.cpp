#include "simplicity/mnist_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace simplicity {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void require_bytes(std::size_t expected, std::size_t got) {
  if (got < expected) {
    throw IdxFormatError("expected " + std::to_string(expected) + " bytes, got " +
                         std::to_string(got));
  }
}

std::string hex32(std::uint32_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += kDigits[(v >> shift) & 0xF];
  return s;
}

}  // namespace

Matrix parse_idx_images(std::span<const std::uint8_t> bytes) {
  require_bytes(16, bytes.size());
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxImageMagic) {
    throw IdxFormatError("not an IDX image file (magic " + hex32(magic) + ")");
  }
  const std::size_t count = read_be32(bytes, 4);
  const std::size_t rows = read_be32(bytes, 8);
  const std::size_t cols = read_be32(bytes, 12);
  if (rows != kImageSide || cols != kImageSide) {
    throw IdxFormatError("expected 28x28 images, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  require_bytes(16 + count * kImagePixels, bytes.size());
  if (count == 0) throw IdxFormatError("IDX image file declares zero images");

  Matrix out(count, kImagePixels);
  auto payload = bytes.subspan(16, count * kImagePixels);
  auto dst = out.values();
  for (std::size_t i = 0; i < payload.size(); ++i) dst[i] = payload[i];
  return out;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  require_bytes(8, bytes.size());
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxLabelMagic) {
    throw IdxFormatError("not an IDX label file (magic " + hex32(magic) + ")");
  }
  const std::size_t count = read_be32(bytes, 4);
  require_bytes(8 + count, bytes.size());
  std::vector<std::uint8_t> labels(bytes.begin() + 8, bytes.begin() + 8 + count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kNumClasses) {
      throw IdxFormatError("corrupt label " + std::to_string(labels[i]) + " at byte offset " +
                           std::to_string(8 + i));
    }
  }
  return labels;
}

std::vector<std::uint8_t> encode_idx_images(const Matrix& raw_pixels) {
  if (raw_pixels.cols() != kImagePixels) {
    throw std::invalid_argument("IDX images need 784 columns, got " + raw_pixels.shape());
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + raw_pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(raw_pixels.rows()));
  write_be32(out, kImageSide);
  write_be32(out, kImageSide);
  for (double v : raw_pixels.values()) {
    if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) {
      throw std::invalid_argument("pixel value " + std::to_string(v) + " is not a byte");
    }
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

double normalize(double pixel) {
  if (!(pixel >= 0.0 && pixel <= 255.0)) {
    throw std::invalid_argument("pixel value " + std::to_string(pixel) + " outside [0, 255]");
  }
  return (pixel / 255.0 - 0.5) / 0.5;
}

Dataset make_dataset(const Matrix& raw_pixels, std::vector<std::uint8_t> labels) {
  if (raw_pixels.rows() != labels.size()) {
    throw std::invalid_argument("image count " + std::to_string(raw_pixels.rows()) +
                                " != label count " + std::to_string(labels.size()));
  }
  if (raw_pixels.cols() != kImagePixels) {
    throw std::invalid_argument("images must have 784 columns, got " + raw_pixels.shape());
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kNumClasses) {
      throw std::invalid_argument("label " + std::to_string(labels[i]) + " at index " +
                                  std::to_string(i) + " outside 0..9");
    }
  }
  Dataset d{raw_pixels, std::move(labels)};
  for (double& v : d.images.values()) v = normalize(v);
  return d;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto image_bytes = read_file(images);
  const auto label_bytes = read_file(labels);
  try {
    return make_dataset(parse_idx_images(image_bytes), parse_idx_labels(label_bytes));
  } catch (const std::exception& e) {
    throw IdxFormatError(images.filename().string() + " / " + labels.filename().string() + ": " +
                         e.what());
  }
}

std::span<const std::size_t> BatchPlan::batch(std::size_t i) const {
  const std::size_t begin = i * batch_size;
  const std::size_t end = std::min(order.size(), begin + batch_size);
  return std::span<const std::size_t>(order).subspan(begin, end - begin);
}

BatchPlan plan_batches(std::size_t n, std::size_t batch_size, Prng& rng) {
  if (batch_size == 0 || batch_size > n) {
    throw std::invalid_argument("batch size " + std::to_string(batch_size) +
                                " must lie in 1.." + std::to_string(n));
  }
  BatchPlan plan{std::vector<std::size_t>(n), batch_size};
  for (std::size_t i = 0; i < n; ++i) plan.order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(plan.order[i - 1], plan.order[rng.below(i)]);
  }
  return plan;
}

Batch gather_batch(const Dataset& d, std::span<const std::size_t> indices) {
  Batch b{gather_rows(d.images, indices), {}};
  b.labels.reserve(indices.size());
  for (std::size_t idx : indices) b.labels.push_back(d.labels[idx]);
  return b;
}

std::vector<Batch> shuffled_batches(const Dataset& d, std::size_t batch_size, Prng& rng) {
  const BatchPlan plan = plan_batches(d.size(), batch_size, rng);
  std::vector<Batch> out;
  out.reserve(plan.batch_count());
  for (std::size_t i = 0; i < plan.batch_count(); ++i) out.push_back(gather_batch(d, plan.batch(i)));
  return out;
}

}  // namespace simplicity
