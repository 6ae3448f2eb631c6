#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <omp.h>

#include "epinet/error.hpp"
#include "epinet/measure_system.hpp"

using namespace epinet;

namespace {

// Binomial pmf by the product formula, independent of the kernel's recursion.
double binom_pmf(int n, int i, double p) {
  double c = 1.0;
  for (int j = 1; j <= i; ++j) c = c * (n - i + j) / j;
  return c * std::pow(p, i) * std::pow(1.0 - p, n - i);
}

}  // namespace

TEST(BinomialInflow, MatchesDirectSum) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int K = 40;
  std::vector<double> w(K + 1);
  for (double& x : w) x = u(rng);
  for (int shift : {0, 1}) {
    for (double p : {0.0, 0.3, 0.97, 1.0}) {
      std::vector<double> out(K + 1, 0.0), expected(K + 1, 0.0);
      kernels::binomial_inflow_serial(w, shift, p, out);
      for (int k = shift; k <= K; ++k)
        for (int i = 0; i <= k - shift; ++i) expected[i] += w[k] * binom_pmf(k - shift, i, p);
      for (int i = 0; i <= K; ++i) EXPECT_NEAR(out[i], expected[i], 1e-13);
    }
  }
}

TEST(BinomialInflow, ParallelIsDeterministic) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(600);
  for (double& x : w) x = u(rng);
  std::vector<double> s(600, 0.0), p1(600, 0.0), p4(600, 0.0);
  kernels::binomial_inflow_serial(w, 1, 0.4, s);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  kernels::binomial_inflow(w, 1, 0.4, p1);
  omp_set_num_threads(4);
  kernels::binomial_inflow(w, 1, 0.4, p4);
  omp_set_num_threads(saved);
  EXPECT_EQ(p1, p4);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(p1[i], s[i], 1e-12);
}

TEST(MeasureSystem, AgreesWithClosedSystem) {
  EpidemicParams p;
  p.nu = 0.3;
  p.horizon = 10.0;
  p.dt = 1e-2;
  for (const DistributionSpec& spec :
       {DistributionSpec{RegularSpec{5}}, DistributionSpec{BimodalSpec{3, 13, 0.8}}}) {
    const auto d = build_distribution(spec);
    const auto pol = VaccinationPolicy::threshold(XiSpec::degree_proportional(), 2.0, 0.3, 10.0);
    const Trajectory fl = integrate_general(p, d, pol);
    const MeasureTrajectory ms = solve_measure_system(p, d, pol);
    ASSERT_EQ(fl.size(), ms.t.size());
    for (std::size_t i = 0; i < fl.size(); ++i) {
      EXPECT_NEAR(ms.S[i], fl.S[i], 1e-6);
      EXPECT_NEAR(ms.I[i], fl.states[i].I, 1e-6);
      EXPECT_NEAR(ms.V[i], fl.states[i].V, 1e-6);
      const GFunction g(d, XiSpec::degree_proportional(), initial_susceptible(p));
      EXPECT_NEAR(ms.S[i], g(ms.alpha[i], ms.theta[i]), 1e-6);
    }
  }
}

TEST(MeasureSystem, RecoveredMassIsIntegratedRecovery) {
  EpidemicParams p;
  p.horizon = 10.0;
  p.dt = 1e-2;
  const auto d = build_distribution(PoissonSpec{5});
  const MeasureTrajectory ms = solve_measure_system(p, d, VaccinationPolicy::none(10.0));
  double R = 0.0;
  for (std::size_t i = 1; i < ms.t.size(); ++i) {
    R += 0.5 * p.dt * p.gamma * (ms.I[i] + ms.I[i - 1]);
    EXPECT_NEAR(ms.R[i], R, 1e-4);
    EXPECT_NEAR(ms.S[i] + ms.I[i] + ms.R[i] + ms.V[i], 1.0, 1e-12);
  }
}

TEST(MeasureSystem, TruncationMustCoverSupport) {
  EpidemicParams p;
  p.horizon = 1.0;
  p.dt = 0.1;
  const auto d = build_distribution(RegularSpec{5});
  EXPECT_THROW(solve_measure_system(p, d, VaccinationPolicy::none(1.0), 3), ValidationError);
}
