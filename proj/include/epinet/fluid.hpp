#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "epinet/degree.hpp"
#include "epinet/error.hpp"
#include "epinet/policy.hpp"

namespace epinet {

struct EpidemicParams {
  double r = 3.0;
  double gamma = 1.0;
  double nu = 0.0;
  double epsilon = 0.01;
  double horizon = 20.0;
  double dt = 1e-3;

  void validate() const;
  // Number of grid steps; horizon must be a whole multiple of dt.
  int steps() const;

  friend bool operator==(const EpidemicParams&, const EpidemicParams&) = default;
};

/// The seven variables of the closed system. S, R and pR are derived.
struct FluidState {
  double alpha = 1.0;
  double theta = 1.0;
  double I = 0.0;
  double V = 0.0;
  double pS = 1.0;
  double pI = 0.0;
  double pV = 0.0;

  static constexpr std::size_t size = 7;
  std::array<double, size> to_array() const { return {alpha, theta, I, V, pS, pI, pV}; }
  static FluidState from_array(const std::array<double, size>& x) {
    return {x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
  }
  double pR() const { return 1.0 - pS - pI - pV; }
};

// alpha = theta = 1, I = eps, pI = eps / (1 - eps), pS = (1 - 2 eps) / (1 - eps).
FluidState initial_state(const EpidemicParams& params);
inline double initial_susceptible(const EpidemicParams& params) { return 1.0 - params.epsilon; }

// Closed system for a general xi; `g` carries the S0 scaling. `pi` is the schedule value at t.
FluidState rhs_general(const FluidState& s, const EpidemicParams& params, const GFunction& g,
                       double pi);

/// State of the xi(k) = a k + b system: beta = alpha theta^a, phi = theta^b.
struct LinearState {
  double beta = 1.0;
  double phi = 1.0;
  double I = 0.0;
  double V = 0.0;
  double pS = 1.0;
  double pI = 0.0;
  double pV = 0.0;

  static constexpr std::size_t size = 7;
  std::array<double, size> to_array() const { return {beta, phi, I, V, pS, pI, pV}; }
  static LinearState from_array(const std::array<double, size>& x) {
    return {x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
  }
};

// Uses only psi, psi', psi'' of `dist`; s0 is the initial susceptible mass.
LinearState rhs_linear(const LinearState& s, const EpidemicParams& params,
                       const DegreeDistribution& dist, double s0, double a, double b, double pi);

struct MeanFieldState {
  double S = 1.0;
  double I = 0.0;
  double R = 0.0;
};

MeanFieldState rhs_meanfield(const MeanFieldState& s, const EpidemicParams& params, double pi);

/// Closed-system trajectory on the uniform grid t_i = i dt.
struct Trajectory {
  std::vector<double> t;
  std::vector<FluidState> states;
  std::vector<double> S;

  std::size_t size() const { return t.size(); }
  double R(std::size_t i) const { return 1.0 - S[i] - states[i].I - states[i].V; }
  double pR(std::size_t i) const { return states[i].pR(); }
  const FluidState& back() const { return states.back(); }
  // Linear interpolation of pI between grid points.
  double pI_at(double time) const;
};

struct MeanFieldTrajectory {
  std::vector<double> t;
  std::vector<MeanFieldState> states;
};

Trajectory integrate_general(const EpidemicParams& params, const DegreeDistribution& dist,
                             const VaccinationPolicy& policy);
// Requires an affine xi; the result is mapped back to (alpha, theta) form.
Trajectory integrate_linear(const EpidemicParams& params, const DegreeDistribution& dist,
                            const VaccinationPolicy& policy);
// Picks integrate_linear for affine xi, integrate_general otherwise.
Trajectory integrate_fluid(const EpidemicParams& params, const DegreeDistribution& dist,
                           const VaccinationPolicy& policy);
MeanFieldTrajectory integrate_meanfield(const EpidemicParams& params, const Schedule& schedule);

// `t,S,I,R,V,pS,pI,pR,pV,alpha,theta`
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

struct StepCheck {
  double terminal_S_full = 0.0;
  double terminal_S_half = 0.0;
  double difference = 0.0;
  bool passed = false;  // difference < 1e-6
};

// Integrates at dt and dt/2 and compares the terminal S.
StepCheck step_doubling_check(const EpidemicParams& params, const DegreeDistribution& dist,
                              const VaccinationPolicy& policy);

namespace ode {

template <class X>
void axpy(X& out, const X& x, double h, const X& k) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + h * k[i];
}

// One classical RK4 step of x' = f(x) with f held fixed (autonomous within a
// constant schedule segment).
template <class X, class F>
X rk4_step(const X& x, double h, F&& f) {
  X tmp = x;
  const X k1 = f(x);
  axpy(tmp, x, 0.5 * h, k1);
  const X k2 = f(tmp);
  axpy(tmp, x, 0.5 * h, k2);
  const X k3 = f(tmp);
  axpy(tmp, x, h, k3);
  const X k4 = f(tmp);
  X out = x;
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Fixed-step RK4 on t_i = i dt. The right-hand side is f(x, pi); a grid step
// containing schedule breakpoints is split at them so that pi is constant on
// every substep. `post(x, t)` runs after every grid step (clamping/checks).
template <class X, class F, class Post>
std::vector<X> integrate_grid(const X& x0, const Schedule& schedule, double dt, int steps, F&& f,
                              Post&& post) {
  std::vector<X> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(x0);
  X x = x0;
  for (int i = 0; i < steps; ++i) {
    const double t0 = i * dt;
    const double t1 = (i + 1) * dt;
    double t = t0;
    while (t < t1) {
      const double next = schedule.next_change(t);
      const double end = next < t1 - 1e-12 * dt ? next : t1;
      const double pi = schedule.value(t);
      x = rk4_step(x, end - t, [&](const X& y) { return f(y, pi); });
      t = end;
    }
    post(x, t1);
    out.push_back(x);
  }
  return out;
}

// Clamp x into [lo, hi] if it overshoots by less than 1e-9; larger violations throw.
inline double clamp_checked(double x, double lo, double hi, const char* name, double t) {
  constexpr double kTol = 1e-9;
  if (!std::isfinite(x) || x < lo - kTol || x > hi + kTol)
    throw NumericalError(std::string("invariant violated: ") + name + " = " + std::to_string(x) +
                         " at t = " + std::to_string(t));
  return x < lo ? lo : (x > hi ? hi : x);
}

}  // namespace ode

}  // namespace epinet
