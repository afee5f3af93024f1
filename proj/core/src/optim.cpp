#include "edgepool/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace edgepool {

void adam_step(ParamStore& params, double learning_rate, std::uint64_t step, const AdamConfig& config) {
  if (step == 0) throw std::invalid_argument("adam step counter starts at 1");
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (Parameter& p : params.all()) {
    p.first_moment = config.beta1 * p.first_moment + (1.0 - config.beta1) * p.grad;
    p.second_moment = config.beta2 * p.second_moment + (1.0 - config.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= learning_rate * (p.first_moment.array() / correction1) /
                       ((p.second_moment.array() / correction2).sqrt() + config.epsilon);
  }
}

double step_decay_lr(double base_lr, std::size_t epoch, std::size_t halving_period) {
  if (halving_period == 0) return base_lr;
  return base_lr * std::pow(0.5, static_cast<double>(epoch / halving_period));
}

} // namespace edgepool
