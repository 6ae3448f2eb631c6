#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "epinet/degree.hpp"
#include "epinet/error.hpp"

using namespace epinet;

namespace {

// Direct sum of S0 * p_k * alpha^k * theta^xi(k), written without the library's log form.
double g_direct(const DegreeDistribution& d, const XiSpec& xi, double s0, double a, double t) {
  double s = 0.0;
  for (int k = 0; k <= d.k_max(); ++k) s += s0 * d[k] * std::pow(a, k) * std::pow(t, xi(k));
  return s;
}

}  // namespace

TEST(Distribution, RegularIsADelta) {
  const auto d = build_distribution(RegularSpec{5});
  EXPECT_EQ(d.k_max(), 5);
  EXPECT_DOUBLE_EQ(d[5], 1.0);
  EXPECT_DOUBLE_EQ(d.mean(), 5.0);
}

TEST(Distribution, PoissonMoments) {
  const auto d = build_distribution(PoissonSpec{5.0});
  EXPECT_NEAR(d.mean(), 5.0, 1e-12);
  EXPECT_NEAR(d.factorial_moment(2), 25.0, 1e-11);
}

TEST(Distribution, PowerLawCappedAtFifty) {
  const auto d = build_distribution(PowerLawSpec{1.474, 100.0, 50});
  EXPECT_EQ(d.k_max(), 50);
  EXPECT_NEAR(d.factorial_moment(2), 80.31, 0.01 * 80.31);
  EXPECT_NEAR(d.mean(), 5.0, 0.01);
}

TEST(Distribution, PowerLawAutoTailBelowThreshold) {
  const PowerLawSpec spec{1.474, 100.0, 0};
  const auto d = build_distribution(spec);
  // Unnormalized mass beyond k_max, summed far into the tail.
  double kept = 0.0, tail = 0.0;
  for (int k = 1; k <= 20000; ++k) {
    const double w = std::pow(k, -spec.exponent) * std::exp(-k / spec.cutoff);
    (k <= d.k_max() ? kept : tail) += w;
  }
  EXPECT_LT(tail / (kept + tail), 1e-10);
  EXPECT_EQ(d[0], 0.0);
}

TEST(Distribution, PmfInvariants) {
  for (const DistributionSpec& s :
       {DistributionSpec{PoissonSpec{5}}, DistributionSpec{BimodalSpec{3, 13, 0.8}},
        DistributionSpec{RegularSpec{6}}, DistributionSpec{PowerLawSpec{2.0, 20.0, 50}}}) {
    const auto d = build_distribution(s);
    double sum = 0.0;
    for (double p : d.pmf()) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_GT(d.mean(), 0.0);
    EXPECT_TRUE(std::isfinite(d.factorial_moment(5)));
  }
}

TEST(Distribution, RejectsBadParameters) {
  EXPECT_THROW(build_distribution(PoissonSpec{0.0}), ValidationError);
  EXPECT_THROW(build_distribution(BimodalSpec{3, 13, 1.2}), ValidationError);
  EXPECT_THROW(build_distribution(BimodalSpec{-1, 13, 0.5}), ValidationError);
  EXPECT_THROW(build_distribution(RegularSpec{0}), ValidationError);
  EXPECT_THROW(build_distribution(PowerLawSpec{-1.0, 100.0, 0}), ValidationError);
  EXPECT_THROW(DegreeDistribution({0.5, 0.4}, "bad"), ValidationError);
  EXPECT_THROW(DegreeDistribution({1.0}, "no edges"), ValidationError);
}

TEST(Psi, Examples) {
  const auto poisson = build_distribution(PoissonSpec{5.0});
  const auto regular = build_distribution(RegularSpec{5});
  EXPECT_NEAR(poisson.psi(1.0, 0), 1.0, 1e-12);
  EXPECT_NEAR(poisson.psi(1.0, 1), 5.0, 1e-12);
  EXPECT_NEAR(regular.psi(0.3, 0), 0.00243, 1e-15);
  EXPECT_NEAR(poisson.psi(0.72), std::exp(5.0 * (0.72 - 1.0)), 1e-14);
  EXPECT_THROW(poisson.psi(1.1), ValidationError);
  EXPECT_THROW(poisson.psi(-0.1), ValidationError);
}

TEST(Psi, NondecreasingInZ) {
  const auto d = build_distribution(BimodalSpec{3, 13, 0.8});
  for (int order = 0; order <= 2; ++order) {
    double prev = d.psi(0.0, order);
    for (int i = 1; i <= 100; ++i) {
      const double v = d.psi(i / 100.0, order);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(GFunction, DegreeProportionalIsPsiOfProduct) {
  const auto d = build_distribution(BimodalSpec{3, 13, 0.8});
  const double s0 = 0.99;
  const GFunction g(d, XiSpec::degree_proportional(), s0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), t = u(rng);
    const double expected = s0 * d.psi(a * t);
    EXPECT_NEAR(g(a, t), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(GFunction, SpecialValues) {
  const auto d = build_distribution(PoissonSpec{5.0});
  const GFunction g0(d, XiSpec::uniform(0.0), 0.9);
  EXPECT_NEAR(g0(0.6, 0.3), 0.9 * d.psi(0.6), 1e-14);
  const GFunction g(d, XiSpec{0.7, 1.3, {}}, 0.9);
  EXPECT_NEAR(g(1.0, 1.0), 0.9, 1e-14);
  const GFunction g1(d, XiSpec::degree_proportional(), 1.0);
  EXPECT_NEAR(g1(0.8, 0.9), 0.246597, 1e-6);
  EXPECT_NEAR(g1(0.8, 0.9), g_direct(d, XiSpec::degree_proportional(), 1.0, 0.8, 0.9), 1e-14);
  EXPECT_THROW(g(0.0, 0.5), ValidationError);
  EXPECT_THROW(g(0.5, -1.0), ValidationError);
}

TEST(GFunction, TabulatedXiMatchesDirectSum) {
  const auto d = build_distribution(PoissonSpec{4.0});
  XiSpec xi;
  for (int k = 0; k <= d.k_max(); ++k) xi.table.push_back(std::sqrt(k));
  const GFunction g(d, xi, 0.95);
  EXPECT_NEAR(g(0.7, 0.4), g_direct(d, xi, 0.95, 0.7, 0.4), 1e-14);
}

TEST(GFunction, PartialsMatchCentralDifferences) {
  const auto d = build_distribution(BimodalSpec{3, 13, 0.8});
  const XiSpec xis[] = {XiSpec::degree_proportional(), XiSpec{0.5, 2.0, {}}};
  const double h = 1e-5;
  for (const XiSpec& xi : xis) {
    const GFunction g(d, xi, 0.99);
    for (auto [a, t] : {std::pair{0.7, 0.8}, std::pair{0.5, 0.95}, std::pair{0.9, 0.4}}) {
      const GDerivatives x = g.derivatives(a, t);
      auto D = [&](double aa, double tt) { return g.derivatives(aa, tt); };
      const auto pa = D(a + h, t), ma = D(a - h, t), pt = D(a, t + h), mt = D(a, t - h);
      auto rel = [](double fd, double exact) { return std::abs(fd - exact) / std::abs(exact); };
      EXPECT_LT(rel((pa.g - ma.g) / (2 * h), x.a), 1e-6);
      EXPECT_LT(rel((pt.g - mt.g) / (2 * h), x.t), 1e-6);
      EXPECT_LT(rel((pa.a - ma.a) / (2 * h), x.aa), 1e-6);
      EXPECT_LT(rel((pt.a - mt.a) / (2 * h), x.at), 1e-6);
      EXPECT_LT(rel((pt.t - mt.t) / (2 * h), x.tt), 1e-6);
      EXPECT_LT(rel((pa.aa - ma.aa) / (2 * h), x.aaa), 1e-6);
      EXPECT_LT(rel((pt.aa - mt.aa) / (2 * h), x.aat), 1e-6);
      EXPECT_LT(rel((pt.at - mt.at) / (2 * h), x.att), 1e-6);
      EXPECT_DOUBLE_EQ(g(a, t, GPartial::d_alpha_theta), x.at);
    }
  }
}

TEST(SizeBiased, Examples) {
  const auto reg = size_biased(build_distribution(RegularSpec{5}));
  EXPECT_DOUBLE_EQ(reg[5], 1.0);
  EXPECT_NEAR(size_biased(build_distribution(PoissonSpec{5.0})).mean(), 6.0, 1e-12);
  const auto bi = build_distribution(BimodalSpec{3, 13, 0.8});
  const double p13 = 0.2 + 0.8 * std::exp(-3.0) * std::pow(3.0, 13) / std::tgamma(14.0);
  EXPECT_NEAR(size_biased(bi)[13], 13.0 * p13 / 5.0, 1e-12);
  EXPECT_NEAR(size_biased(bi)[13], 0.52, 1e-4);
}

TEST(SizeBiased, MeanIsExcessPlusOne) {
  for (const DistributionSpec& s :
       {DistributionSpec{PoissonSpec{3}}, DistributionSpec{BimodalSpec{3, 8, 0.73}},
        DistributionSpec{PowerLawSpec{1.474, 100, 50}}}) {
    const auto d = build_distribution(s);
    const auto b = size_biased(d);
    EXPECT_EQ(b.k_max(), d.k_max());
    EXPECT_NEAR(b.mean(), d.factorial_moment(2) / d.factorial_moment(1) + 1.0, 1e-12);
  }
}

TEST(XiSpec, Validation) {
  EXPECT_NO_THROW(XiSpec::degree_proportional().validate(50));
  EXPECT_THROW((XiSpec{-1.0, 5.0, {}}).validate(10), ValidationError);
  EXPECT_THROW((XiSpec{0.0, -0.1, {}}).validate(10), ValidationError);
  XiSpec bumpy;
  bumpy.table = {0.0, 2.0, 1.0};
  EXPECT_THROW(bumpy.validate(2), ValidationError);
  EXPECT_DOUBLE_EQ((XiSpec{0.0, 0.0, {0.0, 1.0, 4.0}})(10), 4.0);
}
