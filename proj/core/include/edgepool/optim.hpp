#pragma once

#include <cstdint>

#include "edgepool/params.hpp"

namespace edgepool {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update of every parameter in the store. `step` counts
/// from 1.
void adam_step(ParamStore& params, double learning_rate, std::uint64_t step, const AdamConfig& config = {});

/// lr0 * 0.5^floor(epoch / halving_period), epochs counted from 0.
double step_decay_lr(double base_lr, std::size_t epoch, std::size_t halving_period);

} // namespace edgepool
