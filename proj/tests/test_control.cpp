#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "epinet/control.hpp"
#include "epinet/error.hpp"

using namespace epinet;

namespace {

EpidemicParams params(double nu, double horizon, double dt) {
  EpidemicParams p;
  p.nu = nu;
  p.horizon = horizon;
  p.dt = dt;
  return p;
}

}  // namespace

TEST(SocialCost, WithoutVaccinationIsInfectionIntegral) {
  const auto d = build_distribution(PoissonSpec{5});
  const EpidemicParams p = params(0.0, 10.0, 1e-2);
  const Trajectory tr = integrate_fluid(p, d, VaccinationPolicy::none(10.0));
  double trap = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i)
    trap += 0.5 * p.dt * (tr.states[i].I + tr.states[i - 1].I);
  const Schedule none = Schedule::constant(0.0, 10.0);
  EXPECT_NEAR(social_cost(tr, none, {50.0, 10.0}), 50.0 * trap, 1e-12);
  EXPECT_EQ(social_cost(tr, none, {0.0, 0.0}), 0.0);
}

TEST(SocialCost, VaccinationTermOnConstantS) {
  const auto d = build_distribution(PoissonSpec{5});
  EpidemicParams p = params(0.3, 4.0, 0.1);
  p.r = 0.0;
  p.gamma = 0.0;
  const auto pol = VaccinationPolicy{XiSpec::uniform(0.0), Schedule::threshold(1.25, 0.3, 4.0)};
  const Trajectory tr = integrate_fluid(p, d, pol);
  // xi = 0 keeps S at S0, so the c_V term is c_V * 0.3 * 1.25 * S0 exactly.
  EXPECT_NEAR(social_cost(tr, pol.schedule, {0.0, 10.0}), 10.0 * 0.3 * 1.25 * 0.99, 1e-12);
}

TEST(TauGrid, InclusiveEnd) {
  const auto g = make_tau_grid(0.0, 1.0, 0.1);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  EXPECT_THROW(make_tau_grid(0.0, 1.0, 0.0), ValidationError);
}

TEST(Optimize, FreeVaccinationMeansVaccinateToTheEnd) {
  const auto d = build_distribution(PoissonSpec{5});
  const EpidemicParams p = params(0.3, 10.0, 1e-2);
  const CostReport rep =
      optimize_threshold(p, d, XiSpec::degree_proportional(), {50.0, 0.0}, make_tau_grid(0, 10, 0.5));
  for (std::size_t i = 1; i < rep.cost.size(); ++i) EXPECT_LE(rep.cost[i], rep.cost[i - 1] + 1e-12);
  // Late vaccination saves less than one ulp of cost, so the tail of the grid
  // ties; the right end must attain the minimum.
  EXPECT_EQ(rep.cost.back(), rep.cost_star());
  EXPECT_GT(rep.tau_star(), 0.0);
}

TEST(Optimize, FreeInfectionMeansNeverVaccinate) {
  const auto d = build_distribution(PoissonSpec{5});
  const EpidemicParams p = params(0.3, 10.0, 1e-2);
  const CostReport rep =
      optimize_threshold(p, d, XiSpec::degree_proportional(), {0.0, 10.0}, make_tau_grid(0, 10, 0.5));
  EXPECT_DOUBLE_EQ(rep.tau_star(), 0.0);
}

TEST(Optimize, FinalSizesMoveMonotonically) {
  const auto d = build_distribution(BimodalSpec{3, 13, 0.8});
  const EpidemicParams p = params(0.2, 20.0, 1e-2);
  const CostReport rep =
      optimize_threshold(p, d, XiSpec::degree_proportional(), {50.0, 10.0}, make_tau_grid(0, 20, 0.5));
  for (std::size_t i = 1; i < rep.tau.size(); ++i) {
    EXPECT_LE(rep.R_inf[i], rep.R_inf[i - 1] + 1e-9);
    EXPECT_GE(rep.V_inf[i], rep.V_inf[i - 1] - 1e-9);
  }
  EXPECT_GT(rep.tau_star(), 0.0);
  EXPECT_LT(rep.tau_star(), 20.0);
  std::ostringstream os;
  write_cost_csv(rep, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "tau,cost,R_inf,V_inf");
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const auto d = build_distribution(BimodalSpec{3, 13, 0.8});
  const EpidemicParams p = params(0.3, 20.0, 1e-2);
  for (const XiSpec& xi : {XiSpec::degree_proportional(), XiSpec{0.5, 1.0, {}}}) {
    const GFunction g(d, xi, 0.99);
    for (double pi : {0.0, 0.3}) {
      const FluidState s{0.7, 0.8, 0.1, 0.05, 0.6, 0.25, 0.1};
      const auto J = jacobian(s, p, g, pi);
      const double h = 1e-6;
      for (std::size_t j = 0; j < 7; ++j) {
        auto xp = s.to_array(), xm = s.to_array();
        xp[j] += h;
        xm[j] -= h;
        const auto fp = rhs_general(FluidState::from_array(xp), p, g, pi).to_array();
        const auto fm = rhs_general(FluidState::from_array(xm), p, g, pi).to_array();
        for (std::size_t i = 0; i < 7; ++i) {
          const double fd = (fp[i] - fm[i]) / (2 * h);
          EXPECT_NEAR(J[i][j], fd, 1e-5 * std::max(1.0, std::abs(fd))) << i << "," << j;
        }
      }
    }
  }
}

TEST(BestResponse, InfectedCostClosedForm) {
  EXPECT_DOUBLE_EQ(J_I_closed_form(20.0, 20.0, 1.0, 50.0), 0.0);
  EXPECT_NEAR(J_I_closed_form(0.0, 20.0, 1.0, 50.0), 50.0 * (1 - std::exp(-20.0)), 1e-12);
  EXPECT_NEAR(J_I_closed_form(1.0, 3.0, 0.0, 50.0), 100.0, 1e-12);
}

class BestResponseTest : public ::testing::Test {
 protected:
  void SetUp() override {
    p = params(0.3, 20.0, 1e-2);
    const auto pol = VaccinationPolicy::threshold(XiSpec::degree_proportional(), 1.0, 0.3, 20.0);
    pop = integrate_fluid(p, dist, pol);
  }
  DegreeDistribution dist = build_distribution(PoissonSpec{5});
  EpidemicParams p;
  Trajectory pop;
};

TEST_F(BestResponseTest, ExpensiveVaccineNeverPays) {
  const auto brs = br_thresholds({1, 5, 10, 15}, pop, p, {50.0, 50.0}, XiSpec::degree_proportional());
  for (const auto& b : brs) EXPECT_DOUBLE_EQ(b.tau, 0.0);
}

TEST_F(BestResponseTest, FreeVaccineAlwaysPays) {
  const auto brs = br_thresholds({1, 5, 10}, pop, p, {50.0, 0.0}, XiSpec::degree_proportional());
  for (const auto& b : brs) EXPECT_DOUBLE_EQ(b.tau, p.horizon);
}

TEST_F(BestResponseTest, ThresholdGrowsWithDegree) {
  std::vector<int> ks;
  for (int k = 0; k <= 15; ++k) ks.push_back(k);
  const auto brs = br_thresholds(ks, pop, p, {50.0, 10.0}, XiSpec::degree_proportional());
  EXPECT_DOUBLE_EQ(brs[0].tau, 0.0);
  for (std::size_t i = 1; i < brs.size(); ++i) {
    EXPECT_GE(brs[i].tau, brs[i - 1].tau - 1e-12);
    EXPECT_TRUE(brs[i].threshold_form);
    EXPECT_LE(brs[i].switches, 1);
  }
  EXPECT_GT(brs.back().tau, 0.0);
  for (const auto& b : brs) {
    ASSERT_EQ(b.J_S.size(), b.t.size());
    EXPECT_DOUBLE_EQ(b.J_S.back(), 0.0);
    for (std::size_t i = 0; i < b.t.size(); ++i) EXPECT_LE(b.J_S[i], b.J_I[i] + 1e-9);
  }
}

TEST_F(BestResponseTest, SurvivalFactorDoesNotMoveThreshold) {
  for (int k : {3, 8, 12}) {
    const auto a = best_response(k, pop, p, {50.0, 10.0}, XiSpec::degree_proportional(), true);
    const auto b = best_response(k, pop, p, {50.0, 10.0}, XiSpec::degree_proportional(), false);
    // Identical on [tau, T]; only the RK4 step straddling the switch differs.
    EXPECT_NEAR(a.tau, b.tau, 1e-5);
  }
}

TEST(Sweep, NoVaccinationCapacityConvergesImmediately) {
  const auto d = build_distribution(PoissonSpec{5});
  const EpidemicParams p = params(0.0, 10.0, 1e-2);
  const SweepResult res = forward_backward_sweep(p, d, XiSpec::degree_proportional(), {50.0, 10.0});
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 2);
  for (double x : res.pi) EXPECT_EQ(x, 0.0);
}

TEST(Sweep, BangBangAndCloseToBestThreshold) {
  const auto d = build_distribution(BimodalSpec{3, 13, 0.8});
  const EpidemicParams p = params(0.2, 20.0, 1e-2);
  const CostParams costs{50.0, 10.0};
  const SweepResult res = forward_backward_sweep(p, d, XiSpec::degree_proportional(), costs);
  ASSERT_TRUE(res.converged);
  int switches = 0;
  for (std::size_t i = 0; i < res.pi.size(); ++i) {
    EXPECT_TRUE(res.pi[i] < 1e-4 || res.pi[i] > p.nu - 1e-4) << res.pi[i];
    if (i > 0 && (res.pi[i] > p.nu / 2) != (res.pi[i - 1] > p.nu / 2)) ++switches;
  }
  EXPECT_EQ(switches, 1);
  EXPECT_LT(res.pi.back(), 1e-4);
  EXPECT_GT(res.rho.back(), 0.0);
  const CostReport rep =
      optimize_threshold(p, d, XiSpec::degree_proportional(), costs, make_tau_grid(0, 20, 0.1));
  EXPECT_LE(std::abs(res.cost - rep.cost_star()), 0.02 * rep.cost_star());
  std::ostringstream os;
  write_sweep_csv(res, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,pi_star,rho_star");
}
