#include "epinet/fluid.hpp"

#include <cstdio>
#include <ostream>
#include <string>

namespace epinet {

void EpidemicParams::validate() const {
  if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError("r must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be >= 0");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw ValidationError("nu must be >= 0");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw ValidationError("epsilon must satisfy 0 < epsilon < 1/2 (got " + std::to_string(epsilon) +
                          ")");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (!(horizon >= dt)) throw ValidationError("horizon T must be >= dt");
  steps();
}

int EpidemicParams::steps() const {
  const double n = horizon / dt;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-6 * std::max(1.0, rounded))
    throw ValidationError("horizon T must be a whole multiple of dt");
  return static_cast<int>(rounded);
}

FluidState initial_state(const EpidemicParams& params) {
  const double e = params.epsilon;
  if (!(e > 0.0 && e < 0.5)) throw ValidationError("epsilon must satisfy 0 < epsilon < 1/2");
  FluidState s;
  s.I = e;
  s.pI = e / (1.0 - e);
  s.pS = (1.0 - 2.0 * e) / (1.0 - e);
  return s;
}

FluidState rhs_general(const FluidState& s, const EpidemicParams& params, const GFunction& g,
                       double pi) {
  const double r = params.r;
  FluidState d{};
  d.alpha = -r * s.pI * s.alpha;
  d.theta = -pi * s.theta;
  d.I = -params.gamma * s.I;
  d.V = 0.0;
  d.pS = d.pI = d.pV = 0.0;
  const GDerivatives gd = g.derivatives(s.alpha, s.theta);
  if (!(gd.a > 0.0)) return d;  // no susceptible half-edges left
  const double G = s.alpha * gd.aa / gd.a;
  const double H = s.theta * gd.at / gd.a;
  d.I += r * s.pI * s.alpha * gd.a;
  d.V = pi * s.theta * gd.t;
  d.pS = r * s.pI * s.pS * (1.0 - G) - pi * s.pS * H;
  d.pI = -params.gamma * s.pI + r * s.pI * s.pS * G - r * s.pI * (1.0 - s.pI);
  d.pV = r * s.pI * s.pV + pi * s.pS * H;
  return d;
}

LinearState rhs_linear(const LinearState& s, const EpidemicParams& params,
                       const DegreeDistribution& dist, double s0, double a, double b, double pi) {
  const double r = params.r;
  LinearState d{};
  d.beta = (-r * s.pI - a * pi) * s.beta;
  d.phi = -b * pi * s.phi;
  d.I = -params.gamma * s.I;
  const double p1 = s0 * dist.psi(s.beta, 1);
  if (!(p1 > 0.0)) {
    d.pS = d.pI = d.pV = d.V = 0.0;
    return d;
  }
  const double p0 = s0 * dist.psi(s.beta, 0);
  const double G = s.beta * s0 * dist.psi(s.beta, 2) / p1;
  d.I += r * s.pI * s.phi * s.beta * p1;
  d.V = a * pi * s.phi * s.beta * p1 + b * pi * s.phi * p0;
  d.pS = (1.0 - G) * s.pS * r * s.pI - pi * s.pS * (a + b) - s.pS * pi * a * G;
  d.pI = -params.gamma * s.pI + r * s.pI * s.pS * G - r * s.pI * (1.0 - s.pI);
  d.pV = s.pS * pi * (a + b) + r * s.pI * s.pV + pi * s.pS * a * G;
  return d;
}

MeanFieldState rhs_meanfield(const MeanFieldState& s, const EpidemicParams& params, double pi) {
  return {-params.r * s.I * s.S - pi * s.S, params.r * s.I * s.S - params.gamma * s.I,
          params.gamma * s.I + pi * s.S};
}

double Trajectory::pI_at(double time) const {
  if (t.empty()) return 0.0;
  if (time <= t.front()) return states.front().pI;
  if (time >= t.back()) return states.back().pI;
  const double dt = t[1] - t[0];
  const std::size_t i = std::min(static_cast<std::size_t>(time / dt), t.size() - 2);
  const double w = (time - t[i]) / dt;
  return (1.0 - w) * states[i].pI + w * states[i + 1].pI;
}

namespace {

using Arr = std::array<double, 7>;

void check_edge_probabilities(Arr& x, double t) {
  x[4] = ode::clamp_checked(x[4], 0.0, 1.0, "pS", t);
  x[5] = ode::clamp_checked(x[5], 0.0, 1.0, "pI", t);
  x[6] = ode::clamp_checked(x[6], 0.0, 1.0, "pV", t);
  ode::clamp_checked(1.0 - x[4] - x[5] - x[6], 0.0, 1.0, "pR", t);
  x[2] = ode::clamp_checked(x[2], 0.0, 1.0, "I", t);
  x[3] = ode::clamp_checked(x[3], 0.0, 1.0, "V", t);
}

std::vector<double> grid(const EpidemicParams& params) {
  const int n = params.steps();
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) t[i] = i * params.dt;
  return t;
}

void validate_inputs(const EpidemicParams& params, const DegreeDistribution& dist,
                     const VaccinationPolicy& policy) {
  params.validate();
  policy.xi.validate(dist.k_max());
  policy.schedule.validate(params.nu);
  if (std::abs(policy.schedule.horizon() - params.horizon) > 1e-12 * params.horizon)
    throw ValidationError("schedule horizon does not match the epidemic horizon");
}

}  // namespace

Trajectory integrate_general(const EpidemicParams& params, const DegreeDistribution& dist,
                             const VaccinationPolicy& policy) {
  validate_inputs(params, dist, policy);
  const GFunction g(dist, policy.xi, initial_susceptible(params));
  auto f = [&](const Arr& x, double pi) {
    return rhs_general(FluidState::from_array(x), params, g, pi).to_array();
  };
  auto post = [](Arr& x, double t) {
    x[0] = ode::clamp_checked(x[0], 0.0, 1.0, "alpha", t);
    x[1] = ode::clamp_checked(x[1], 0.0, 1.0, "theta", t);
    check_edge_probabilities(x, t);
  };
  const auto xs = ode::integrate_grid(initial_state(params).to_array(), policy.schedule, params.dt,
                                      params.steps(), f, post);
  Trajectory traj;
  traj.t = grid(params);
  traj.states.reserve(xs.size());
  traj.S.reserve(xs.size());
  for (const Arr& x : xs) {
    traj.states.push_back(FluidState::from_array(x));
    traj.S.push_back(g(x[0], x[1]));
  }
  return traj;
}

Trajectory integrate_linear(const EpidemicParams& params, const DegreeDistribution& dist,
                            const VaccinationPolicy& policy) {
  validate_inputs(params, dist, policy);
  if (!policy.xi.is_affine()) throw ValidationError("integrate_linear needs an affine xi");
  const double a = policy.xi.slope;
  const double b = policy.xi.intercept;
  const double s0 = initial_susceptible(params);
  const FluidState init = initial_state(params);
  const LinearState x0{1.0, 1.0, init.I, init.V, init.pS, init.pI, init.pV};
  auto f = [&](const Arr& x, double pi) {
    return rhs_linear(LinearState::from_array(x), params, dist, s0, a, b, pi).to_array();
  };
  auto post = [](Arr& x, double t) {
    x[0] = ode::clamp_checked(x[0], 0.0, 1.0, "beta", t);
    x[1] = ode::clamp_checked(x[1], 0.0, 1.0, "phi", t);
    check_edge_probabilities(x, t);
  };
  const auto xs =
      ode::integrate_grid(x0.to_array(), policy.schedule, params.dt, params.steps(), f, post);
  Trajectory traj;
  traj.t = grid(params);
  traj.states.reserve(xs.size());
  traj.S.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const LinearState ls = LinearState::from_array(xs[i]);
    const double theta = std::exp(-policy.schedule.integral(traj.t[i]));
    const double alpha = a == 0.0 ? ls.beta : ls.beta / std::pow(theta, a);
    traj.states.push_back({std::min(alpha, 1.0), theta, ls.I, ls.V, ls.pS, ls.pI, ls.pV});
    traj.S.push_back(ls.phi * s0 * dist.psi(ls.beta));
  }
  return traj;
}

Trajectory integrate_fluid(const EpidemicParams& params, const DegreeDistribution& dist,
                           const VaccinationPolicy& policy) {
  return policy.xi.is_affine() ? integrate_linear(params, dist, policy)
                               : integrate_general(params, dist, policy);
}

MeanFieldTrajectory integrate_meanfield(const EpidemicParams& params, const Schedule& schedule) {
  params.validate();
  using A3 = std::array<double, 3>;
  auto f = [&](const A3& x, double pi) {
    const MeanFieldState d = rhs_meanfield({x[0], x[1], x[2]}, params, pi);
    return A3{d.S, d.I, d.R};
  };
  auto post = [](A3& x, double t) {
    for (double& v : x) v = ode::clamp_checked(v, 0.0, 1.0, "mean-field compartment", t);
  };
  const A3 x0{1.0 - params.epsilon, params.epsilon, 0.0};
  const auto xs = ode::integrate_grid(x0, schedule, params.dt, params.steps(), f, post);
  MeanFieldTrajectory traj;
  traj.t = grid(params);
  for (const A3& x : xs) traj.states.push_back({x[0], x[1], x[2]});
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,S,I,R,V,pS,pI,pR,pV,alpha,theta\n";
  char buf[512];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const FluidState& s = traj.states[i];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.t[i],
                  traj.S[i], s.I, traj.R(i), s.V, s.pS, s.pI, s.pR(), s.pV, s.alpha, s.theta);
    out << buf;
  }
}

StepCheck step_doubling_check(const EpidemicParams& params, const DegreeDistribution& dist,
                              const VaccinationPolicy& policy) {
  EpidemicParams half = params;
  half.dt = params.dt / 2.0;
  StepCheck c;
  c.terminal_S_full = integrate_fluid(params, dist, policy).S.back();
  c.terminal_S_half = integrate_fluid(half, dist, policy).S.back();
  c.difference = std::abs(c.terminal_S_full - c.terminal_S_half);
  c.passed = c.difference < 1e-6;
  return c;
}

}  // namespace epinet
