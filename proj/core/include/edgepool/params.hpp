#pragma once

#include <deque>
#include <map>
#include <string>
#include <string_view>

#include "edgepool/matrix.hpp"
#include "edgepool/rng.hpp"

namespace edgepool {

/// A named parameter with its gradient accumulator and Adam moments, all
/// shaped like `value`.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix first_moment;
  Matrix second_moment;
};

/// Ordered, name-unique collection of parameters. References returned by
/// add() stay valid for the lifetime of the store.
class ParamStore {
public:
  Parameter& add(std::string name, Eigen::Index rows, Eigen::Index cols);
  /// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
  Parameter& add_glorot(std::string name, Eigen::Index rows, Eigen::Index cols, Rng& rng);

  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::deque<Parameter>& all() noexcept { return params_; }
  const std::deque<Parameter>& all() const noexcept { return params_; }
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

} // namespace edgepool
