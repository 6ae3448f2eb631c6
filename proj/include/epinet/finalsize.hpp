#pragma once

#include <iosfwd>
#include <string>

#include "epinet/degree.hpp"
#include "epinet/fluid.hpp"

namespace epinet {

struct EpidemicIndicators {
  std::string label;
  double r = 0.0;
  double gamma = 0.0;
  double R0 = 0.0;
  double transmissibility = 0.0;  // r / (r + gamma)
  double margin = 0.0;  // r (psi''(1)/psi'(1) - 1) - gamma
  bool supercritical = false;
};

EpidemicIndicators epidemic_indicators(const DegreeDistribution& dist, double r, double gamma);

// `label,r,gamma,R0,margin,supercritical`
std::string indicators_csv_header();
std::string indicators_csv_row(const EpidemicIndicators& ind);

struct AlphaOptions {
  double damping = 0.5;
  double tol = 1e-12;
  int max_iter = 10000;
};

// Smallest root of alpha = 1 - T + T psi'(alpha e^{-tau nu}) / psi'(1), by
// damped iteration from alpha = 0. Falls back to bisection if the iteration
// stalls; throws NumericalError if neither converges.
double alpha_infinity(const DegreeDistribution& dist, double r, double gamma, double tau, double nu,
                      const AlphaOptions& options = {});
// Bisection on [0, 1] for the smallest root of the same map.
double alpha_infinity_bisection(const DegreeDistribution& dist, double r, double gamma, double tau,
                                double nu, double tol = 1e-14);
double alpha_map(const DegreeDistribution& dist, double r, double gamma, double tau, double nu,
                 double alpha);

struct FinalSizes {
  double tau = 0.0;
  double nu = 0.0;
  double alpha_inf = 1.0;
  double lambda = 0.0;
  double S_inf = 0.0;
  double V_inf = 0.0;
  double R_inf = 0.0;
  // R_inf as printed in the closed-form statement: S0 - psi(alpha_inf e^{-tau nu}) + lambda (psi(theta_tau alpha_tau) - 1).
  double R_inf_stated = 0.0;
};

// Threshold policy nu on [0, tau] with xi(k) = k. `traj` must be integrated
// under that policy and reach tau; it supplies pI for lambda(tau) and
// (alpha_tau, theta_tau).
FinalSizes final_sizes(const DegreeDistribution& dist, const EpidemicParams& params, double tau,
                       const Trajectory& traj);

// `tau,nu,alpha_inf,lambda,S_inf,V_inf,R_inf`
void write_final_sizes_csv(const FinalSizes& fs, std::ostream& out, bool header = true);

}  // namespace epinet
