#include "epinet/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>

namespace epinet {

void CostParams::validate() const {
  if (!(c_I >= 0.0) || !std::isfinite(c_I)) throw ValidationError("c_I must be >= 0");
  if (!(c_V >= 0.0) || !std::isfinite(c_V)) throw ValidationError("c_V must be >= 0");
}

double social_cost(const Trajectory& traj, const Schedule& schedule, const CostParams& costs) {
  const std::size_t n = traj.size();
  if (n < 2) return 0.0;
  if (std::abs(traj.t.back() - schedule.horizon()) > 1e-9 * std::max(1.0, schedule.horizon()))
    throw ValidationError("trajectory and schedule horizons differ");
  double infected = 0.0;
  double vaccination = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t0 = traj.t[i];
    const double t1 = traj.t[i + 1];
    const double h = t1 - t0;
    infected += 0.5 * h * (traj.states[i].I + traj.states[i + 1].I);
    double a = t0;
    while (a < t1) {
      const double next = schedule.next_change(a);
      const double b = next < t1 - 1e-12 * h ? next : t1;
      const double pi = schedule.value(a);
      if (pi != 0.0) {
        const double sa = traj.S[i] + (traj.S[i + 1] - traj.S[i]) * (a - t0) / h;
        const double sb = traj.S[i] + (traj.S[i + 1] - traj.S[i]) * (b - t0) / h;
        vaccination += pi * 0.5 * (b - a) * (sa + sb);
      }
      a = b;
    }
  }
  return costs.c_I * infected + costs.c_V * vaccination;
}

std::vector<double> make_tau_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw ValidationError("tau grid step must be > 0");
  if (!(stop >= start)) throw ValidationError("tau grid stop must be >= start");
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  for (int i = 0; i <= count; ++i) grid.push_back(start + i * step);
  return grid;
}

CostReport optimize_threshold(const EpidemicParams& params, const DegreeDistribution& dist,
                              const XiSpec& xi, const CostParams& costs,
                              const std::vector<double>& tau_grid) {
  params.validate();
  costs.validate();
  if (tau_grid.empty()) throw ValidationError("tau grid is empty");
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (tau_grid[i] < 0.0 || tau_grid[i] > params.horizon + 1e-12)
      throw ValidationError("tau grid must lie within [0, T]");
    if (i > 0 && !(tau_grid[i] > tau_grid[i - 1]))
      throw ValidationError("tau grid must be strictly increasing");
  }
  const std::size_t m = tau_grid.size();
  CostReport rep;
  rep.tau = tau_grid;
  rep.cost.assign(m, 0.0);
  rep.R_inf.assign(m, 0.0);
  rep.V_inf.assign(m, 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < m; ++i) {
    try {
      const auto policy = VaccinationPolicy::threshold(xi, tau_grid[i], params.nu, params.horizon);
      const Trajectory traj = integrate_fluid(params, dist, policy);
      rep.cost[i] = social_cost(traj, policy.schedule, costs);
      rep.R_inf[i] = traj.R(traj.size() - 1);
      rep.V_inf[i] = traj.back().V;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  rep.best = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (rep.cost[i] < rep.cost[rep.best]) rep.best = i;
  return rep;
}

void write_cost_csv(const CostReport& report, std::ostream& out) {
  out << "tau,cost,R_inf,V_inf\n";
  char buf[256];
  for (std::size_t i = 0; i < report.tau.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", report.tau[i], report.cost[i],
                  report.R_inf[i], report.V_inf[i]);
    out << buf;
  }
}

double J_I_closed_form(double t, double horizon, double gamma, double c_I) {
  if (gamma == 0.0) return c_I * (horizon - t);
  return c_I / gamma * (1.0 - std::exp(gamma * (t - horizon)));
}

namespace {

// One backward pass of -J_S' = pi~ theta~^xi (c_V - J_S) + r k pI (J_I - J_S),
// with pi~ = nu where J_S >= c_V. `survival` holds theta~^xi at the grid points.
void integrate_J_S(BestResponse& br, const Trajectory& pop, const EpidemicParams& params,
                   const CostParams& costs, const std::vector<double>& survival) {
  const std::size_t n = br.t.size();
  const double dt = params.dt;
  const double rk = params.r * br.k;
  auto rate = [&](double t, double js, double surv) {
    const double pi = js >= costs.c_V ? params.nu : 0.0;
    const double ji = J_I_closed_form(t, params.horizon, params.gamma, costs.c_I);
    return -(pi * surv * (costs.c_V - js) + rk * pop.pI_at(t) * (ji - js));
  };
  br.J_S.assign(n, 0.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const double t1 = br.t[i];
    const double h = -dt;
    const double s1 = survival[i];
    const double s0 = survival[i - 1];
    const double sm = 0.5 * (s0 + s1);
    const double y = br.J_S[i];
    const double k1 = rate(t1, y, s1);
    const double k2 = rate(t1 + 0.5 * h, y + 0.5 * h * k1, sm);
    const double k3 = rate(t1 + 0.5 * h, y + 0.5 * h * k2, sm);
    const double k4 = rate(t1 + h, y + h * k3, s0);
    br.J_S[i - 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

void extract_threshold(BestResponse& br, const CostParams& costs) {
  const std::size_t n = br.t.size();
  br.vaccinate.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) br.vaccinate[i] = br.J_S[i] >= costs.c_V;
  br.switches = 0;
  for (std::size_t i = 1; i < n; ++i) br.switches += br.vaccinate[i] != br.vaccinate[i - 1];
  br.threshold_form = br.switches == 0 || (br.switches == 1 && br.vaccinate.front());
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < n; ++i)
    if (br.vaccinate[i]) last = static_cast<std::ptrdiff_t>(i);
  if (last < 0) {
    br.tau = 0.0;
  } else if (static_cast<std::size_t>(last) == n - 1) {
    br.tau = br.t.back();
  } else {
    // Linear interpolation of the crossing J_S = c_V inside [t_last, t_last+1].
    const double a = br.J_S[last] - costs.c_V;
    const double b = br.J_S[last + 1] - costs.c_V;
    const double w = a == b ? 0.0 : a / (a - b);
    br.tau = br.t[last] + std::clamp(w, 0.0, 1.0) * (br.t[last + 1] - br.t[last]);
  }
}

}  // namespace

BestResponse best_response(int k, const Trajectory& population, const EpidemicParams& params,
                           const CostParams& costs, const XiSpec& xi, bool survival_factor) {
  params.validate();
  costs.validate();
  if (k < 0) throw ValidationError("degree must be >= 0");
  BestResponse br;
  br.k = k;
  br.t = population.t;
  const std::size_t n = br.t.size();
  br.J_I.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    br.J_I[i] = J_I_closed_form(br.t[i], params.horizon, params.gamma, costs.c_I);

  std::vector<double> survival(n, 1.0);
  integrate_J_S(br, population, params, costs, survival);
  extract_threshold(br, costs);
  if (survival_factor && params.nu > 0.0 && xi(k) > 0.0) {
    // theta~ follows the node's own schedule; iterate to a fixed point.
    for (int it = 0; it < 50; ++it) {
      std::vector<double> next(n, 1.0);
      double log_theta = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        if (br.vaccinate[i - 1]) log_theta -= params.nu * (br.t[i] - br.t[i - 1]);
        next[i] = std::exp(xi(k) * log_theta);
      }
      if (next == survival) break;
      survival = std::move(next);
      integrate_J_S(br, population, params, costs, survival);
      extract_threshold(br, costs);
    }
  }
  return br;
}

std::vector<BestResponse> br_thresholds(const std::vector<int>& degrees,
                                        const Trajectory& population, const EpidemicParams& params,
                                        const CostParams& costs, const XiSpec& xi,
                                        bool survival_factor) {
  std::vector<BestResponse> out(degrees.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    try {
      out[i] = best_response(degrees[i], population, params, costs, xi, survival_factor);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

void write_best_response_csv(const std::vector<BestResponse>& brs, std::ostream& out) {
  out << "k,tau_k\n";
  char buf[64];
  for (const BestResponse& br : brs) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", br.k, br.tau);
    out << buf;
  }
}

Schedule SweepResult::schedule(double horizon) const {
  const std::size_t steps = pi.empty() ? 0 : pi.size() - 1;
  const double dt = steps > 0 ? t[1] - t[0] : horizon;
  return Schedule::from_steps(std::span<const double>(pi.data(), steps), dt, horizon);
}

using Mat7 = std::array<std::array<double, 7>, 7>;
using Vec7 = std::array<double, 7>;

namespace {

struct Ratios {
  double G = 0, H = 0, G_a = 0, G_t = 0, H_a = 0, H_t = 0;
};

Ratios ratios(const FluidState& s, const GDerivatives& d) {
  Ratios q;
  const double a = s.alpha;
  const double th = s.theta;
  const double ga = d.a;
  q.G = a * d.aa / ga;
  q.H = th * d.at / ga;
  q.G_a = d.aa / ga + a * d.aaa / ga - a * d.aa * d.aa / (ga * ga);
  q.G_t = a * d.aat / ga - a * d.aa * d.at / (ga * ga);
  q.H_a = th * d.aat / ga - th * d.at * d.aa / (ga * ga);
  q.H_t = d.at / ga + th * d.att / ga - th * d.at * d.at / (ga * ga);
  return q;
}

}  // namespace

Mat7 jacobian(const FluidState& s, const EpidemicParams& params, const GFunction& g, double pi) {
  Mat7 J{};
  const double r = params.r;
  const double gamma = params.gamma;
  enum { A, TH, I, V, PS, PI, PV };
  const GDerivatives d = g.derivatives(s.alpha, s.theta);
  J[A][A] = -r * s.pI;
  J[A][PI] = -r * s.alpha;
  J[TH][TH] = -pi;
  J[I][I] = -gamma;
  if (!(d.a > 0.0)) return J;
  const Ratios q = ratios(s, d);
  J[I][A] = r * s.pI * (d.a + s.alpha * d.aa);
  J[I][TH] = r * s.pI * s.alpha * d.at;
  J[I][PI] = r * s.alpha * d.a;
  J[V][A] = pi * s.theta * d.at;
  J[V][TH] = pi * (d.t + s.theta * d.tt);
  J[PS][A] = -r * s.pI * s.pS * q.G_a - pi * s.pS * q.H_a;
  J[PS][TH] = -r * s.pI * s.pS * q.G_t - pi * s.pS * q.H_t;
  J[PS][PS] = r * s.pI * (1.0 - q.G) - pi * q.H;
  J[PS][PI] = r * s.pS * (1.0 - q.G);
  J[PI][A] = r * s.pI * s.pS * q.G_a;
  J[PI][TH] = r * s.pI * s.pS * q.G_t;
  J[PI][PS] = r * s.pI * q.G;
  J[PI][PI] = -gamma + r * s.pS * q.G - r + 2.0 * r * s.pI;
  J[PV][A] = pi * s.pS * q.H_a;
  J[PV][TH] = pi * s.pS * q.H_t;
  J[PV][PS] = pi * q.H;
  J[PV][PI] = r * s.pV;
  J[PV][PV] = r * s.pI;
  return J;
}

namespace {

// -dH/dx with L = c_I I + c_V pi g(alpha, theta).
Vec7 adjoint_rate(const FluidState& s, const Vec7& lam, const EpidemicParams& params,
                  const GFunction& g, const CostParams& costs, double pi) {
  const Mat7 J = jacobian(s, params, g, pi);
  const GDerivatives d = g.derivatives(s.alpha, s.theta);
  Vec7 out{};
  for (int j = 0; j < 7; ++j) {
    double acc = 0.0;
    for (int i = 0; i < 7; ++i) acc += lam[i] * J[i][j];
    out[j] = -acc;
  }
  out[0] -= costs.c_V * pi * d.a;
  out[1] -= costs.c_V * pi * d.t;
  out[2] -= costs.c_I;
  return out;
}

double switching_function(const FluidState& s, const Vec7& lam, const GFunction& g,
                          const CostParams& costs) {
  const GDerivatives d = g.derivatives(s.alpha, s.theta);
  const double H = d.a > 0.0 ? s.theta * d.at / d.a : 0.0;
  return costs.c_V * d.g - lam[1] * s.theta + lam[3] * s.theta * d.t - lam[4] * s.pS * H +
         lam[6] * s.pS * H;
}

Vec7 add_scaled(const Vec7& x, double h, const Vec7& k) {
  Vec7 y;
  for (int i = 0; i < 7; ++i) y[i] = x[i] + h * k[i];
  return y;
}

}  // namespace

SweepResult forward_backward_sweep(const EpidemicParams& params, const DegreeDistribution& dist,
                                   const XiSpec& xi, const CostParams& costs,
                                   const SweepOptions& options) {
  params.validate();
  costs.validate();
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw ValidationError("sweep damping must lie in (0, 1]");
  if (!(options.tol > 0.0)) throw ValidationError("sweep tol must be > 0");
  if (options.max_iter < 1) throw ValidationError("sweep max_iter must be >= 1");
  const int steps = params.steps();
  const double dt = params.dt;
  const GFunction g(dist, xi, initial_susceptible(params));

  SweepResult res;
  res.pi.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  res.rho.assign(res.pi.size(), 0.0);
  res.adjoint.assign(res.pi.size(), Vec7{});
  res.t.resize(res.pi.size());
  for (int i = 0; i <= steps; ++i) res.t[i] = i * dt;

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    res.iterations = iter;
    const VaccinationPolicy policy{xi, res.schedule(params.horizon)};
    res.state = integrate_general(params, dist, policy);
    const auto& xs = res.state.states;

    // Backward adjoint sweep; the state at step midpoints is the cubic Hermite interpolant.
    res.adjoint[steps] = Vec7{};
    for (int i = steps; i > 0; --i) {
      const double pi = res.pi[i - 1];
      const FluidState& x0 = xs[i - 1];
      const FluidState& x1 = xs[i];
      const Vec7 f0 = rhs_general(x0, params, g, pi).to_array();
      const Vec7 f1 = rhs_general(x1, params, g, pi).to_array();
      Vec7 mid;
      const Vec7 a0 = x0.to_array();
      const Vec7 a1 = x1.to_array();
      for (int j = 0; j < 7; ++j) mid[j] = 0.5 * (a0[j] + a1[j]) + dt / 8.0 * (f0[j] - f1[j]);
      const FluidState xm = FluidState::from_array(mid);
      const Vec7& lam = res.adjoint[i];
      const double h = -dt;
      const Vec7 k1 = adjoint_rate(x1, lam, params, g, costs, pi);
      const Vec7 k2 = adjoint_rate(xm, add_scaled(lam, 0.5 * h, k1), params, g, costs, pi);
      const Vec7 k3 = adjoint_rate(xm, add_scaled(lam, 0.5 * h, k2), params, g, costs, pi);
      const Vec7 k4 = adjoint_rate(x0, add_scaled(lam, h, k3), params, g, costs, pi);
      Vec7 next;
      for (int j = 0; j < 7; ++j) next[j] = lam[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      res.adjoint[i - 1] = next;
    }

    double change = 0.0;
    for (int i = 0; i <= steps; ++i) {
      res.rho[i] = switching_function(xs[i], res.adjoint[i], g, costs);
      const double target = res.rho[i] < 0.0 ? params.nu : 0.0;
      const double updated = (1.0 - options.damping) * res.pi[i] + options.damping * target;
      change = std::max(change, std::abs(updated - res.pi[i]));
      res.pi[i] = updated;
    }
    if (change < options.tol) {
      res.converged = true;
      break;
    }
  }
  const VaccinationPolicy final_policy{xi, res.schedule(params.horizon)};
  res.state = integrate_general(params, dist, final_policy);
  res.t = res.state.t;
  res.cost = social_cost(res.state, final_policy.schedule, costs);
  return res;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "t,pi_star,rho_star\n";
  char buf[128];
  for (std::size_t i = 0; i < result.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", result.t[i], result.pi[i], result.rho[i]);
    out << buf;
  }
}

}  // namespace epinet
