#include "epinet/finalsize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace epinet {

EpidemicIndicators epidemic_indicators(const DegreeDistribution& dist, double r, double gamma) {
  if (!(r >= 0.0) || !(gamma >= 0.0) || !(r + gamma > 0.0))
    throw ValidationError("need r, gamma >= 0 and r + gamma > 0");
  const double m1 = dist.factorial_moment(1);
  if (!(m1 > 0.0)) throw ValidationError("degenerate distribution: psi'(1) = 0");
  const double excess = dist.factorial_moment(2) / m1;
  EpidemicIndicators ind;
  ind.label = dist.label();
  ind.r = r;
  ind.gamma = gamma;
  ind.transmissibility = r / (r + gamma);
  ind.R0 = ind.transmissibility * excess;
  ind.margin = r * (excess - 1.0) - gamma;
  ind.supercritical = ind.R0 > 1.0;
  return ind;
}

std::string indicators_csv_header() { return "label,r,gamma,R0,margin,supercritical"; }

std::string indicators_csv_row(const EpidemicIndicators& ind) {
  char buf[256];
  std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%d", ind.r, ind.gamma, ind.R0,
                ind.margin, ind.supercritical ? 1 : 0);
  return "\"" + ind.label + "\"" + buf;
}

double alpha_map(const DegreeDistribution& dist, double r, double gamma, double tau, double nu,
                 double alpha) {
  const double T = r / (r + gamma);
  const double shrink = std::exp(-tau * nu);
  return 1.0 - T + T * dist.psi(std::clamp(alpha * shrink, 0.0, 1.0), 1) / dist.factorial_moment(1);
}

double alpha_infinity_bisection(const DegreeDistribution& dist, double r, double gamma, double tau,
                                double nu, double tol) {
  // h(alpha) = map(alpha) - alpha is positive at 0; the smallest root is the
  // first sign change. Locate a bracket on a grid, then bisect.
  auto h = [&](double a) { return alpha_map(dist, r, gamma, tau, nu, a) - a; };
  if (h(0.0) <= 0.0) return 0.0;
  constexpr int kScan = 4096;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 1; i <= kScan; ++i) {
    const double a = static_cast<double>(i) / kScan;
    if (h(a) <= 0.0) {
      hi = a;
      break;
    }
    lo = a;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double alpha_infinity(const DegreeDistribution& dist, double r, double gamma, double tau, double nu,
                      const AlphaOptions& options) {
  if (!(r >= 0.0) || !(gamma >= 0.0) || !(r + gamma > 0.0))
    throw ValidationError("need r, gamma >= 0 and r + gamma > 0");
  if (!(tau >= 0.0) || !(nu >= 0.0)) throw ValidationError("need tau, nu >= 0");
  if (r == 0.0) return 1.0;
  double alpha = 0.0;
  const double d = options.damping;
  for (int it = 0; it < options.max_iter; ++it) {
    const double next = (1.0 - d) * alpha + d * alpha_map(dist, r, gamma, tau, nu, alpha);
    if (std::abs(next - alpha) < options.tol) {
      alpha = next;
      if (std::abs(alpha_map(dist, r, gamma, tau, nu, alpha) - alpha) < 1e-10) return alpha;
      break;
    }
    alpha = next;
  }
  // Slow convergence near criticality.
  const double b = alpha_infinity_bisection(dist, r, gamma, tau, nu);
  if (std::abs(alpha_map(dist, r, gamma, tau, nu, b) - b) < 1e-10) return b;
  throw NumericalError("alpha_infinity did not converge");
}

FinalSizes final_sizes(const DegreeDistribution& dist, const EpidemicParams& params, double tau,
                       const Trajectory& traj) {
  params.validate();
  if (!(tau >= 0.0)) throw ValidationError("tau must be >= 0");
  if (traj.size() < 2 || tau > traj.t.back() + 1e-12)
    throw ValidationError("tau lies beyond the trajectory horizon");
  FinalSizes fs;
  fs.tau = tau;
  fs.nu = params.nu;
  const double s0 = initial_susceptible(params);
  fs.alpha_inf = alpha_infinity(dist, params.r, params.gamma, tau, params.nu);
  const double psi_inf = dist.psi(std::clamp(fs.alpha_inf * std::exp(-tau * params.nu), 0.0, 1.0));
  fs.S_inf = s0 * psi_inf;

  // lambda(tau) = int pi / int (pi + r pI) over [0, tau], trapezoid on the grid.
  double num = 0.0;
  double den = 0.0;
  const double dt = traj.t[1] - traj.t[0];
  double a = 0.0;
  while (a < tau) {
    const double b = std::min(tau, a + dt);
    const double pa = traj.pI_at(a);
    const double pb = traj.pI_at(b);
    num += params.nu * (b - a);
    den += params.nu * (b - a) + params.r * 0.5 * (b - a) * (pa + pb);
    a = b;
  }
  fs.lambda = den > 0.0 ? num / den : 0.0;

  // alpha_tau theta_tau from the grid, interpolated in log space.
  auto log_at = [&](double time, auto member) {
    const std::size_t i = std::min(static_cast<std::size_t>(time / dt), traj.size() - 2);
    const double w = std::clamp((time - traj.t[i]) / dt, 0.0, 1.0);
    return (1.0 - w) * std::log(traj.states[i].*member) + w * std::log(traj.states[i + 1].*member);
  };
  const double at = std::exp(log_at(tau, &FluidState::alpha) + log_at(tau, &FluidState::theta));
  const double psi_at = dist.psi(std::clamp(at, 0.0, 1.0));
  fs.V_inf = fs.lambda * (s0 - s0 * psi_at);
  fs.R_inf = 1.0 - fs.S_inf - fs.V_inf;
  fs.R_inf_stated = s0 - psi_inf + fs.lambda * (psi_at - 1.0);
  return fs;
}

void write_final_sizes_csv(const FinalSizes& fs, std::ostream& out, bool header) {
  if (header) out << "tau,nu,alpha_inf,lambda,S_inf,V_inf,R_inf\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", fs.tau, fs.nu,
                fs.alpha_inf, fs.lambda, fs.S_inf, fs.V_inf, fs.R_inf);
  out << buf;
}

}  // namespace epinet
