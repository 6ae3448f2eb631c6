#pragma once

#include <span>
#include <vector>

#include "epinet/degree.hpp"

namespace epinet {

/// Piecewise-constant vaccination schedule pi_t on [0, horizon].
///
/// values[i] applies on [breakpoints[i], breakpoints[i+1]); the last value
/// holds until the horizon. breakpoints[0] == 0 and the sequence is strictly
/// increasing.
class Schedule {
 public:
  Schedule(std::vector<double> breakpoints, std::vector<double> values, double horizon);

  static Schedule constant(double value, double horizon);
  // nu on [0, tau), zero afterwards.
  static Schedule threshold(double tau, double nu, double horizon);
  // One value per integration step of width dt.
  static Schedule from_steps(std::span<const double> step_values, double dt, double horizon);

  double value(double t) const;
  // Integral of pi over [0, t].
  double integral(double t) const;
  // First breakpoint strictly after t, or the horizon.
  double next_change(double t) const;
  // True when pi == 0 on [t, horizon].
  bool zero_from(double t) const;

  double horizon() const { return horizon_; }
  double max_value() const;
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> values() const { return values_; }

  // 0 <= pi <= nu everywhere.
  void validate(double nu) const;

 private:
  std::size_t segment(double t) const;

  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double horizon_;
};

struct VaccinationPolicy {
  XiSpec xi;
  Schedule schedule;

  static VaccinationPolicy threshold(const XiSpec& xi, double tau, double nu, double horizon) {
    return {xi, Schedule::threshold(tau, nu, horizon)};
  }
  static VaccinationPolicy none(double horizon) {
    return {XiSpec::degree_proportional(), Schedule::constant(0.0, horizon)};
  }
};

}  // namespace epinet
