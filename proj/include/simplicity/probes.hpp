#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "simplicity/mnist_io.hpp"
#include "simplicity/network.hpp"
#include "simplicity/numeric.hpp"

namespace simplicity {

enum class StreamMode { kLabels, kQuantizedProbs };

std::string to_string(StreamMode mode);
/// Accepts "labels" and "probs" (or "quantized_probs").
StreamMode parse_stream_mode(const std::string& name);

/// Byte rendering of a network's outputs over a dataset, in dataset order.
struct OutputStream {
  std::vector<std::uint8_t> bytes;
  StreamMode mode = StreamMode::kLabels;
};

/// One predicted label byte per sample.
OutputStream label_stream(const Mlp& m, const Dataset& d);

/// Ten bytes per sample: softmax probabilities quantised as round(p * 255).
OutputStream prob_stream(const Mlp& m, const Dataset& d);

OutputStream output_stream(const Mlp& m, const Dataset& d, StreamMode mode);

/// Phrase count of the exhaustive LZ76 history parsing (Kaspar-Schuster
/// scan). An unfinished trailing phrase counts as one.
std::size_t lz76_complexity(std::span<const std::uint8_t> s);

// LZSS container
// --------------
// Groups of one flag byte followed by up to eight tokens. Flag bit i
// (LSB first) set means token i is a 3-byte back-reference, clear means a
// literal byte. A back-reference packs the big-endian 24-bit word
//   (distance - 1) << 9 | (length - 3)
// with distance in 1..32768 and length in 3..258. The last group may hold
// fewer than eight tokens; its unused flag bits are zero.
inline constexpr std::size_t kLzssWindow = 32768;
inline constexpr std::size_t kLzssMinMatch = 3;
inline constexpr std::size_t kLzssMaxMatch = 258;

class LzssDecodeError : public std::runtime_error {
 public:
  LzssDecodeError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Greedy longest-match encoding; ties go to the smallest distance.
std::vector<std::uint8_t> lzss_encode(std::span<const std::uint8_t> s);
std::size_t lzss_compress_len(std::span<const std::uint8_t> s);
std::vector<std::uint8_t> lzss_decode(std::span<const std::uint8_t> encoded);

struct ComplexityReport {
  std::size_t lz76_phrases = 0;
  std::size_t lzss_bytes = 0;
  std::size_t stream_len = 0;
};

ComplexityReport complexity(std::span<const std::uint8_t> s);

enum class SensitivityOutput { kLogits, kProbabilities };

struct SensitivityReport {
  double mean_l2 = 0.0;
  std::vector<double> per_sample;
  double epsilon = 0.0;
  std::size_t n_samples = 0;
};

/// For each of the first `n_samples` images x, draws a unit-L2 gaussian
/// direction u from `rng` and records ||f(x + epsilon u) - f(x)||_2, where f
/// is the logit map (or softmax of it).
SensitivityReport sensitivity(const Mlp& m, const Dataset& d, double epsilon,
                              std::size_t n_samples, Prng& rng,
                              SensitivityOutput output = SensitivityOutput::kLogits);

}  // namespace simplicity
