#include "edgepool/params.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace edgepool {

Parameter& ParamStore::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  index_.emplace(name, params_.size());
  Parameter& p = params_.emplace_back();
  p.name = std::move(name);
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  p.first_moment = Matrix::Zero(rows, cols);
  p.second_moment = Matrix::Zero(rows, cols);
  return p;
}

Parameter& ParamStore::add_glorot(std::string name, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Parameter& p = add(std::move(name), rows, cols);
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) p.value(r, c) = dist(rng);
  }
  return p;
}

Parameter& ParamStore::at(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return params_[it->second];
}

const Parameter& ParamStore::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return params_[it->second];
}

bool ParamStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (Parameter& p : params_) p.grad.setZero();
}

} // namespace edgepool
