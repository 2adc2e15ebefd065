#pragma once

#include <algorithm>
#include <cmath>

#include "simplicity/network.hpp"
#include "test_support.hpp"

namespace simplicity::testing {

// Redraws inputs until every hidden pre-activation sits at least 1e-3 away
// from zero, so ReLU kinks never fall inside a finite-difference stencil.
inline Matrix inputs_away_from_kinks(const Mlp& m, Prng& rng, std::size_t n) {
  for (;;) {
    Matrix x = random_matrix(rng, n, kImagePixels);
    const ForwardTrace t = forward_trace(m, x);
    bool clear = true;
    for (std::size_t l = 0; l + 1 < t.pre.size(); ++l) {
      for (double z : t.pre[l].values()) clear = clear && std::abs(z) >= 1e-3;
    }
    if (clear) return x;
  }
}

/// Largest relative error between backward() and central differences
/// (h = 1e-5) over every parameter of a seeded [5, 4]-hidden network
/// evaluated on six inputs. Denominators are floored at 1e-6.
inline double max_gradient_rel_error(const ActivationKind& act, std::uint64_t seed) {
  Prng rng(seed);
  const std::vector<std::size_t> hidden = {5, 4};
  Mlp m = build_mlp(hidden, act, rng);
  for (auto& l : m.layers) {
    for (double& b : l.bias.values()) b = rng.uniform(-0.1, 0.1);
  }
  const Matrix x = inputs_away_from_kinks(m, rng, 6);
  const std::vector<std::uint8_t> labels = {0, 3, 7, 9, 1, 3};
  auto loss_at = [&] { return softmax_cross_entropy(forward(m, x), labels).loss; };

  const ForwardTrace t = forward_trace(m, x);
  const Gradients g = backward(m, t, softmax_cross_entropy(t.logits(), labels).dlogits);

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    for (int which = 0; which < 2; ++which) {
      auto params = which == 0 ? m.layers[li].weights.values() : m.layers[li].bias.values();
      auto analytic = which == 0 ? g.layers[li].weights.values() : g.layers[li].bias.values();
      for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + h;
        const double up = loss_at();
        params[k] = saved - h;
        const double down = loss_at();
        params[k] = saved;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic[k]) / scale);
      }
    }
  }
  return worst;
}

}  // namespace simplicity::testing
