#include "simplicity/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace simplicity {
namespace {

constexpr std::size_t kChunk = 1000;
constexpr std::size_t kHashBits = 16;
constexpr std::int64_t kNoPosition = -1;

template <typename Fn>
void for_each_chunk(const Dataset& d, std::size_t limit, Fn&& fn) {
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < limit; begin += kChunk) {
    const std::size_t end = std::min(limit, begin + kChunk);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    fn(begin, gather_rows(d.images, idx));
  }
}

std::uint32_t hash3(const std::uint8_t* p) {
  const std::uint32_t key = (std::uint32_t{p[0]} << 16) | (std::uint32_t{p[1]} << 8) | p[2];
  return (key * 2654435761u) >> (32 - kHashBits);
}

}  // namespace

std::string to_string(StreamMode mode) {
  return mode == StreamMode::kLabels ? "labels" : "probs";
}

StreamMode parse_stream_mode(const std::string& name) {
  if (name == "labels") return StreamMode::kLabels;
  if (name == "probs" || name == "quantized_probs") return StreamMode::kQuantizedProbs;
  throw std::invalid_argument("unknown stream mode '" + name + "' (expected labels|probs)");
}

OutputStream label_stream(const Mlp& m, const Dataset& d) {
  if (d.size() == 0) throw std::invalid_argument("label_stream needs a non-empty dataset");
  OutputStream out{{}, StreamMode::kLabels};
  out.bytes.reserve(d.size());
  for_each_chunk(d, d.size(), [&](std::size_t, const Matrix& x) {
    const auto labels = predict(m, x);
    out.bytes.insert(out.bytes.end(), labels.begin(), labels.end());
  });
  return out;
}

OutputStream prob_stream(const Mlp& m, const Dataset& d) {
  if (d.size() == 0) throw std::invalid_argument("prob_stream needs a non-empty dataset");
  OutputStream out{{}, StreamMode::kQuantizedProbs};
  out.bytes.reserve(d.size() * kNumClasses);
  for_each_chunk(d, d.size(), [&](std::size_t, const Matrix& x) {
    const Matrix p = softmax(forward(m, x));
    for (double v : p.values()) {
      out.bytes.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)));
    }
  });
  return out;
}

OutputStream output_stream(const Mlp& m, const Dataset& d, StreamMode mode) {
  return mode == StreamMode::kLabels ? label_stream(m, d) : prob_stream(m, d);
}

std::size_t lz76_complexity(std::span<const std::uint8_t> s) {
  const std::size_t n = s.size();
  if (n < 2) return n;
  // i: start of the candidate copy source, l: length of the parsed prefix,
  // k: length of the current match, k_max: longest match for this phrase.
  std::size_t c = 1, l = 1, i = 0, k = 1, k_max = 1;
  while (true) {
    if (s[i + k - 1] == s[l + k - 1]) {
      ++k;
      if (l + k > n) {
        ++c;
        break;
      }
    } else {
      k_max = std::max(k, k_max);
      ++i;
      if (i == l) {
        ++c;
        l += k_max;
        if (l + 1 > n) break;
        i = 0;
        k = 1;
        k_max = 1;
      } else {
        k = 1;
      }
    }
  }
  return c;
}

LzssDecodeError::LzssDecodeError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at encoded offset " + std::to_string(offset)), offset_(offset) {}

std::vector<std::uint8_t> lzss_encode(std::span<const std::uint8_t> s) {
  const std::size_t n = s.size();
  std::vector<std::uint8_t> out;
  if (n == 0) return out;

  std::vector<std::int64_t> head(std::size_t{1} << kHashBits, kNoPosition);
  std::vector<std::int64_t> prev(n, kNoPosition);
  auto insert = [&](std::size_t pos) {
    if (pos + kLzssMinMatch > n) return;
    const std::uint32_t h = hash3(&s[pos]);
    prev[pos] = head[h];
    head[h] = static_cast<std::int64_t>(pos);
  };

  std::size_t flag_at = 0;
  int tokens_in_group = 8;
  std::size_t pos = 0;
  while (pos < n) {
    if (tokens_in_group == 8) {
      flag_at = out.size();
      out.push_back(0);
      tokens_in_group = 0;
    }

    std::size_t best_len = 0, best_dist = 0;
    const std::size_t limit = std::min(kLzssMaxMatch, n - pos);
    if (limit >= kLzssMinMatch) {
      // Chains run from the most recent position backwards, so the first
      // candidate reaching a given length has the smallest distance.
      for (std::int64_t cand = head[hash3(&s[pos])]; cand != kNoPosition;
           cand = prev[static_cast<std::size_t>(cand)]) {
        const std::size_t from = static_cast<std::size_t>(cand);
        const std::size_t dist = pos - from;
        if (dist > kLzssWindow) break;
        std::size_t len = 0;
        while (len < limit && s[from + len] == s[pos + len]) ++len;
        if (len > best_len) {
          best_len = len;
          best_dist = dist;
          if (len == limit) break;
        }
      }
    }

    if (best_len >= kLzssMinMatch) {
      out[flag_at] |= static_cast<std::uint8_t>(1u << tokens_in_group);
      const std::uint32_t word =
          (static_cast<std::uint32_t>(best_dist - 1) << 9) |
          static_cast<std::uint32_t>(best_len - kLzssMinMatch);
      out.push_back(static_cast<std::uint8_t>(word >> 16));
      out.push_back(static_cast<std::uint8_t>(word >> 8));
      out.push_back(static_cast<std::uint8_t>(word));
      for (std::size_t j = 0; j < best_len; ++j) insert(pos + j);
      pos += best_len;
    } else {
      out.push_back(s[pos]);
      insert(pos);
      ++pos;
    }
    ++tokens_in_group;
  }
  return out;
}

std::size_t lzss_compress_len(std::span<const std::uint8_t> s) {
  return lzss_encode(s).size();
}

std::vector<std::uint8_t> lzss_decode(std::span<const std::uint8_t> encoded) {
  std::vector<std::uint8_t> out;
  std::size_t at = 0;
  while (at < encoded.size()) {
    const std::size_t flag_offset = at;
    const std::uint8_t flags = encoded[at++];
    if (at == encoded.size()) throw LzssDecodeError("flag byte with no tokens", flag_offset);
    int bit = 0;
    for (; bit < 8 && at < encoded.size(); ++bit) {
      if ((flags >> bit & 1u) == 0) {
        out.push_back(encoded[at++]);
        continue;
      }
      if (encoded.size() - at < 3) throw LzssDecodeError("truncated back-reference", at);
      const std::uint32_t word = (std::uint32_t{encoded[at]} << 16) |
                                 (std::uint32_t{encoded[at + 1]} << 8) | encoded[at + 2];
      const std::size_t dist = (word >> 9) + 1;
      const std::size_t len_code = word & 0x1FF;
      if (len_code > kLzssMaxMatch - kLzssMinMatch) {
        throw LzssDecodeError("back-reference length " + std::to_string(len_code + 3) +
                                  " exceeds 258",
                              at);
      }
      if (dist > out.size()) {
        throw LzssDecodeError("back-reference distance " + std::to_string(dist) +
                                  " reaches before the start of output",
                              at);
      }
      const std::size_t from = out.size() - dist;
      for (std::size_t j = 0; j < len_code + kLzssMinMatch; ++j) {
        const std::uint8_t b = out[from + j];
        out.push_back(b);
      }
      at += 3;
    }
    // A short final group leaves its remaining flag bits clear.
    if (bit < 8 && (flags >> bit) != 0) {
      throw LzssDecodeError("flag byte announces back-references past the end", flag_offset);
    }
  }
  return out;
}

ComplexityReport complexity(std::span<const std::uint8_t> s) {
  return {lz76_complexity(s), lzss_compress_len(s), s.size()};
}

SensitivityReport sensitivity(const Mlp& m, const Dataset& d, double epsilon,
                              std::size_t n_samples, Prng& rng, SensitivityOutput output) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("sensitivity epsilon must be positive, got " +
                                std::to_string(epsilon));
  }
  if (n_samples == 0 || n_samples > d.size()) {
    throw std::invalid_argument("sensitivity sample count " + std::to_string(n_samples) +
                                " must lie in 1.." + std::to_string(d.size()));
  }
  SensitivityReport report{0.0, {}, epsilon, n_samples};
  report.per_sample.reserve(n_samples);
  for_each_chunk(d, n_samples, [&](std::size_t, const Matrix& x) {
    Matrix shifted = x;
    std::vector<double> u(x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (double& v : u) v = rng.gaussian();
      const double norm = l2_norm(u);
      auto row = shifted.row(r);
      for (std::size_t c = 0; c < u.size(); ++c) row[c] += epsilon * (u[c] / norm);
    }
    Matrix base = forward(m, x);
    Matrix moved = forward(m, shifted);
    if (output == SensitivityOutput::kProbabilities) {
      base = softmax(base);
      moved = softmax(moved);
    }
    std::vector<double> diff(base.cols());
    for (std::size_t r = 0; r < base.rows(); ++r) {
      for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = moved(r, c) - base(r, c);
      report.per_sample.push_back(l2_norm(diff));
    }
  });
  double total = 0.0;
  for (double v : report.per_sample) total += v;
  report.mean_l2 = total / static_cast<double>(n_samples);
  return report;
}

}  // namespace simplicity
