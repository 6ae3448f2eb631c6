#include "epinet/policy.hpp"

#include <algorithm>
#include <cmath>

#include "epinet/error.hpp"

namespace epinet {

Schedule::Schedule(std::vector<double> breakpoints, std::vector<double> values, double horizon)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), horizon_(horizon) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
    throw ValidationError("schedule horizon must be > 0");
  if (breakpoints_.empty() || breakpoints_.size() != values_.size())
    throw ValidationError("schedule needs one value per breakpoint");
  if (breakpoints_.front() != 0.0) throw ValidationError("schedule must start at t = 0");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1]))
      throw ValidationError("schedule breakpoints must be strictly increasing");
  }
  if (breakpoints_.back() > horizon_)
    throw ValidationError("schedule breakpoints must lie within [0, T]");
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("schedule values must be >= 0");
  }
}

Schedule Schedule::constant(double value, double horizon) {
  return Schedule({0.0}, {value}, horizon);
}

Schedule Schedule::threshold(double tau, double nu, double horizon) {
  if (!(tau >= 0.0)) throw ValidationError("threshold tau must be >= 0");
  if (tau <= 0.0 || nu == 0.0) return constant(0.0, horizon);
  if (tau >= horizon) return constant(nu, horizon);
  return Schedule({0.0, tau}, {nu, 0.0}, horizon);
}

Schedule Schedule::from_steps(std::span<const double> step_values, double dt, double horizon) {
  if (step_values.empty()) return constant(0.0, horizon);
  std::vector<double> bp{0.0};
  std::vector<double> val{step_values[0]};
  for (std::size_t i = 1; i < step_values.size(); ++i) {
    if (step_values[i] != val.back()) {
      bp.push_back(static_cast<double>(i) * dt);
      val.push_back(step_values[i]);
    }
  }
  return Schedule(std::move(bp), std::move(val), horizon);
}

std::size_t Schedule::segment(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

double Schedule::value(double t) const { return values_[segment(t)]; }

double Schedule::integral(double t) const {
  double total = 0.0;
  for (std::size_t i = 0; i < breakpoints_.size() && breakpoints_[i] < t; ++i) {
    const double end = i + 1 < breakpoints_.size() ? std::min(breakpoints_[i + 1], t) : t;
    total += values_[i] * (end - breakpoints_[i]);
  }
  return total;
}

double Schedule::next_change(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return it == breakpoints_.end() ? horizon_ : std::min(*it, horizon_);
}

bool Schedule::zero_from(double t) const {
  for (std::size_t i = segment(t); i < values_.size(); ++i)
    if (values_[i] != 0.0) return false;
  return true;
}

double Schedule::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

void Schedule::validate(double nu) const {
  if (max_value() > nu * (1.0 + 1e-12))
    throw ValidationError("schedule exceeds the maximum vaccination rate nu");
}

}  // namespace epinet
