#pragma once

#include <cstdint>
#include <vector>

#include "simplicity/network.hpp"

namespace simplicity {

/// Adam moments and hyperparameters for one Mlp.
struct AdamState {
  Gradients first;   // m
  Gradients second;  // v
  std::uint64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState adam_init(const Mlp& m, double lr);

/// One bias-corrected Adam update, in place. Throws std::domain_error naming
/// the layer if any gradient entry is NaN.
void adam_step(Mlp& m, const Gradients& g, AdamState& s);

}  // namespace simplicity
