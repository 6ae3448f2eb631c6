#pragma once

#include <span>
#include <vector>

#include "epinet/degree.hpp"
#include "epinet/fluid.hpp"
#include "epinet/policy.hpp"

namespace epinet {

/// Aggregates of the truncated per-degree measure system on the fluid grid.
/// N* are half-edge masses: N_S = sum k mu_S(k), N_XS = sum i mu_XS(i).
struct MeasureTrajectory {
  std::vector<double> t;
  std::vector<double> S, I, R, V;
  std::vector<double> N_S, N_IS, N_RS, N_VS;
  std::vector<double> alpha, theta;
};

// Below this N_IS mass the infection terms are switched off.
inline constexpr double kExtinctionFloor = 1e-10;

// k_max < 0 uses the support of `dist`; otherwise it must cover it.
MeasureTrajectory solve_measure_system(const EpidemicParams& params, const DegreeDistribution& dist,
                                       const VaccinationPolicy& policy, int k_max = -1);

namespace kernels {

// out[i] += sum_k weights[k] * P(Binomial(k - shift, p) = i) for k >= shift.
// Each row is evaluated outward from its mode and cut where terms fall below
// 1e-17 of the mode.
void binomial_inflow_serial(std::span<const double> weights, int shift, double p,
                            std::span<double> out);
// Same sum with rows split into fixed blocks over OpenMP threads; block
// partials are reduced in block order, independent of the thread count.
void binomial_inflow(std::span<const double> weights, int shift, double p, std::span<double> out);

}  // namespace kernels

}  // namespace epinet
