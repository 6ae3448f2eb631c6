#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "epinet/degree.hpp"
#include "epinet/fluid.hpp"
#include "epinet/policy.hpp"

namespace epinet {

struct CostParams {
  double c_I = 50.0;
  double c_V = 10.0;

  void validate() const;
  friend bool operator==(const CostParams&, const CostParams&) = default;
};

// Integral over [0, T] of c_I I_t + c_V pi_t S_t. The c_I term is a grid
// trapezoid; the c_V term is split at schedule breakpoints so jumps of pi are
// integrated exactly against the piecewise-linear S.
double social_cost(const Trajectory& traj, const Schedule& schedule, const CostParams& costs);

struct CostReport {
  std::vector<double> tau;
  std::vector<double> cost;
  std::vector<double> R_inf;
  std::vector<double> V_inf;
  std::size_t best = 0;

  double tau_star() const { return tau[best]; }
  double cost_star() const { return cost[best]; }
};

// start, start + step, ..., up to stop (inclusive within 1e-9 step).
std::vector<double> make_tau_grid(double start, double stop, double step);

// One fluid integration per grid point, run concurrently; argmin with ties to the smaller tau.
// R_inf and V_inf are the trajectory values at the horizon.
CostReport optimize_threshold(const EpidemicParams& params, const DegreeDistribution& dist,
                              const XiSpec& xi, const CostParams& costs,
                              const std::vector<double>& tau_grid);

// `tau,cost,R_inf,V_inf`
void write_cost_csv(const CostReport& report, std::ostream& out);

/// Individual best response of a susceptible node of degree k against a
/// population trajectory. J_I is closed form; J_S is integrated backward.
struct BestResponse {
  int k = 0;
  std::vector<double> t;
  std::vector<double> J_S;
  std::vector<double> J_I;
  std::vector<char> vaccinate;  // pointwise minimizer is nu (J_S >= c_V)
  double tau = 0.0;
  int switches = 0;  // changes of the minimizer along the grid
  bool threshold_form = true;  // nu on [0, tau], 0 afterwards
};

double J_I_closed_form(double t, double horizon, double gamma, double c_I);

// survival_factor: weight the vaccination term by theta~^xi(k), with theta~
// solved self-consistently from the node's own choices. Does not move tau.
BestResponse best_response(int k, const Trajectory& population, const EpidemicParams& params,
                           const CostParams& costs, const XiSpec& xi, bool survival_factor = true);

std::vector<BestResponse> br_thresholds(const std::vector<int>& degrees,
                                        const Trajectory& population, const EpidemicParams& params,
                                        const CostParams& costs, const XiSpec& xi,
                                        bool survival_factor = true);

// `k,tau_k`
void write_best_response_csv(const std::vector<BestResponse>& brs, std::ostream& out);

struct SweepOptions {
  double damping = 0.5;
  double tol = 1e-6;
  int max_iter = 500;
  friend bool operator==(const SweepOptions&, const SweepOptions&) = default;
};

struct SweepResult {
  std::vector<double> t;
  std::vector<double> pi;   // control at grid points; pi[i] acts on [t_i, t_i+1)
  std::vector<double> rho;  // switching function dH/dpi
  std::vector<std::array<double, 7>> adjoint;
  Trajectory state;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;

  Schedule schedule(double horizon) const;
};

// Jacobian df/dx of the closed system at control value pi, row = equation.
std::array<std::array<double, 7>, 7> jacobian(const FluidState& s, const EpidemicParams& params,
                                              const GFunction& g, double pi);

// Forward-backward sweep for the Pontryagin system with H = L + lambda . f;
// update pi <- (1 - d) pi + d nu 1{rho < 0} until the sup change is below tol.
SweepResult forward_backward_sweep(const EpidemicParams& params, const DegreeDistribution& dist,
                                   const XiSpec& xi, const CostParams& costs,
                                   const SweepOptions& options = {});

// `t,pi_star,rho_star`
void write_sweep_csv(const SweepResult& result, std::ostream& out);

}  // namespace epinet
