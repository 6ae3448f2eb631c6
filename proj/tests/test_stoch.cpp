#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <omp.h>

#include "epinet/error.hpp"
#include "epinet/stoch.hpp"
#include "oracles.hpp"

using namespace epinet;

namespace {

EpidemicParams params(double r, double gamma, double nu, double horizon) {
  EpidemicParams p;
  p.r = r;
  p.gamma = gamma;
  p.nu = nu;
  p.horizon = horizon;
  p.dt = 0.01;
  return p;
}

ConfigGraph poisson_graph(int n, std::uint64_t seed) {
  const auto d = build_distribution(PoissonSpec{5.0});
  Rng rng(seed);
  return build_config_model(sample_degree_sequence(d, n, rng), rng);
}

}  // namespace

TEST(Stoch, NoTransmissionMeansOneRecovery) {
  const ConfigGraph g = poisson_graph(200, 1);
  EpidemicParams p = params(0.0, 1.0, 0.0, 1000.0);
  p.epsilon = 0.001;
  SimOptions o;
  o.record_events = true;
  const SimOutput out = run_sirv(g, p, VaccinationPolicy::none(p.horizon), 4, o);
  EXPECT_EQ(out.final_counts.R, 1);
  EXPECT_EQ(out.final_counts.I, 0);
  ASSERT_EQ(out.events.size(), 1u);
  EXPECT_EQ(out.events[0].kind, EventKind::recover);
}

TEST(Stoch, FastRecoveryBarelySpreads) {
  const ConfigGraph g = poisson_graph(1000, 2);
  const EpidemicParams p = params(3.0, 1e6, 0.0, 10.0);
  const SimOutput out = run_sirv(g, p, VaccinationPolicy::none(10.0), 5);
  EXPECT_EQ(out.final_counts.I, 0);
  EXPECT_GE(out.final_counts.R, 10);
  EXPECT_LE(out.final_counts.R, 12);
}

TEST(Stoch, IncrementalCountsSurviveAudit) {
  const ConfigGraph g = poisson_graph(2000, 3);
  const EpidemicParams p = params(3.0, 1.0, 0.3, 10.0);
  SimOptions o;
  o.audit_every = 1;
  const auto pol = VaccinationPolicy::threshold(XiSpec::degree_proportional(), 2.0, 0.3, 10.0);
  SimOutput out;
  ASSERT_NO_THROW(out = run_sirv(g, p, pol, 6, o));
  const SimCounts& c = out.final_counts;
  EXPECT_EQ(c.S + c.I + c.R + c.V, g.n());
  EXPECT_GT(c.V, 0);
}

TEST(Stoch, EventsAreAbsorbingAndOrdered) {
  const ConfigGraph g = poisson_graph(1000, 4);
  const EpidemicParams p = params(3.0, 1.0, 0.3, 20.0);
  SimOptions o;
  o.record_events = true;
  const auto pol = VaccinationPolicy::threshold(XiSpec::degree_proportional(), 3.0, 0.3, 20.0);
  const SimOutput out = run_sirv(g, p, pol, 7, o);
  std::vector<Compartment> st(g.n(), Compartment::S);
  const int seeded = std::max(1, static_cast<int>(std::lround(p.epsilon * g.n())));
  int seen_recoveries = 0;
  double last = 0.0;
  for (const Event& e : out.events) {
    EXPECT_GE(e.t, last);
    last = e.t;
    switch (e.kind) {
      case EventKind::infect:
        EXPECT_EQ(st[e.node], Compartment::S);
        st[e.node] = Compartment::I;
        break;
      case EventKind::recover:
        // Seeded nodes are infected before the first event.
        if (st[e.node] == Compartment::S) ++seen_recoveries;
        else EXPECT_EQ(st[e.node], Compartment::I);
        st[e.node] = Compartment::R;
        break;
      case EventKind::vaccinate:
        EXPECT_EQ(st[e.node], Compartment::S);
        EXPECT_LT(e.t, 3.0);
        st[e.node] = Compartment::V;
        break;
    }
  }
  EXPECT_LE(seen_recoveries, seeded);
}

TEST(Stoch, ExactJumpChainOnPath) {
  const ConfigGraph g(3, {{0, 1}, {1, 2}});
  oracle::JumpChain chain(g, 1.0, 1.0);
  const auto exact = chain.final_removed({1, 0, 0});
  ASSERT_NEAR(exact.at(1), 0.5, 1e-15);
  ASSERT_NEAR(exact.at(2), 0.25, 1e-15);
  ASSERT_NEAR(exact.at(3), 0.25, 1e-15);

  EpidemicParams p = params(1.0, 1.0, 0.0, 1e6);
  const auto pol = VaccinationPolicy::none(p.horizon);
  SimOptions o;
  o.sample_dt = p.horizon;
  const int runs = 100000;
  std::map<int, int> counts;
  Rng rng(11);
  const std::vector<int> init{0};
  for (int i = 0; i < runs; ++i) ++counts[run_sirv(g, p, pol, init, rng, o).final_counts.R];
  for (const auto& [removed, prob] : exact)
    EXPECT_NEAR(counts[removed], runs * prob, 3.0 * std::sqrt(runs * prob * (1 - prob)));
}

TEST(Stoch, JumpChainOnTriangleWithTail) {
  const ConfigGraph g(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
  oracle::JumpChain chain(g, 2.0, 1.0);
  const auto exact = chain.final_removed({1, 0, 0, 0});
  EpidemicParams p = params(2.0, 1.0, 0.0, 1e6);
  const auto pol = VaccinationPolicy::none(p.horizon);
  SimOptions o;
  o.sample_dt = p.horizon;
  const int runs = 50000;
  std::map<int, int> counts;
  Rng rng(12);
  const std::vector<int> init{0};
  for (int i = 0; i < runs; ++i) ++counts[run_sirv(g, p, pol, init, rng, o).final_counts.R];
  double total = 0.0;
  for (const auto& [removed, prob] : exact) {
    total += prob;
    EXPECT_NEAR(counts[removed], runs * prob, 3.0 * std::sqrt(runs * prob * (1 - prob)));
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Stoch, VaccinationFavoursHighDegree) {
  const ConfigGraph g = poisson_graph(5000, 5);
  const EpidemicParams p = params(0.0, 1.0, 0.3, 2.0);
  SimOptions o;
  o.record_events = true;
  const auto pol = VaccinationPolicy::threshold(XiSpec::degree_proportional(), 2.0, 0.3, 2.0);
  const SimOutput out = run_sirv(g, p, pol, 8, o);
  double sum = 0.0;
  int cnt = 0;
  for (const Event& e : out.events)
    if (e.kind == EventKind::vaccinate) {
      sum += g.degree(e.node);
      ++cnt;
    }
  ASSERT_GT(cnt, 100);
  double mean = 0.0;
  for (int v = 0; v < g.n(); ++v) mean += g.degree(v);
  mean /= g.n();
  EXPECT_GT(sum / cnt, mean);
}

TEST(Stoch, PickForVaccinationIsProportional) {
  const ConfigGraph g(4, {{0, 1}, {1, 2}, {1, 3}, {2, 3}});
  SirvProcess proc(g, XiSpec::degree_proportional());
  EXPECT_DOUBLE_EQ(proc.vaccination_weight(), 8.0);
  // Weights in node order 1, 3, 2, 2.
  EXPECT_EQ(proc.pick_for_vaccination(0.5), 0);
  EXPECT_EQ(proc.pick_for_vaccination(1.5), 1);
  EXPECT_EQ(proc.pick_for_vaccination(3.9), 1);
  EXPECT_EQ(proc.pick_for_vaccination(4.1), 2);
  EXPECT_EQ(proc.pick_for_vaccination(7.9), 3);
  proc.vaccinate(1);
  EXPECT_DOUBLE_EQ(proc.vaccination_weight(), 5.0);
  EXPECT_EQ(proc.pick_for_vaccination(1.5), 2);
}

TEST(Stoch, EmpiricalMeasuresMatchCounts) {
  const ConfigGraph g = poisson_graph(3000, 6);
  SirvProcess proc(g, XiSpec::degree_proportional());
  const EmpiricalMeasures all_s = empirical_measures(proc);
  std::vector<double> hist(all_s.S.size(), 0.0);
  for (int v = 0; v < g.n(); ++v) hist[g.degree(v)] += 1.0 / g.n();
  for (std::size_t k = 0; k < hist.size(); ++k) EXPECT_NEAR(all_s.S[k], hist[k], 1e-15);

  Rng rng(1);
  std::uniform_int_distribution<int> pick(0, g.n() - 1);
  for (int i = 0; i < 300; ++i) {
    const int v = pick(rng);
    if (proc.state(v) == Compartment::S) proc.seed_infection(v);
  }
  for (int i = 0; i < 100; ++i) {
    const int v = pick(rng);
    if (proc.state(v) == Compartment::I) proc.recover(v);
    else if (proc.state(v) == Compartment::S) proc.vaccinate(v);
  }
  const EmpiricalMeasures m = empirical_measures(proc);
  auto first_moment = [&](const std::vector<double>& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += i * mu[i];
    return s * g.n();
  };
  const SimCounts& c = proc.counts();
  EXPECT_NEAR(first_moment(m.IS), static_cast<double>(c.N_IS), 1e-8);
  EXPECT_NEAR(first_moment(m.RS), static_cast<double>(c.N_RS), 1e-8);
  EXPECT_NEAR(first_moment(m.VS), static_cast<double>(c.N_VS), 1e-8);
  EXPECT_NEAR(first_moment(m.S), static_cast<double>(c.N_S), 1e-8);
  EXPECT_EQ(proc.recount_N_IS(), c.N_IS);
}

TEST(Stoch, InitialInfectedHalfEdgeMass) {
  const ConfigGraph g = poisson_graph(10000, 7);
  EpidemicParams p = params(3.0, 1.0, 0.0, 0.01);
  const SimOutput out = run_sirv(g, p, VaccinationPolicy::none(p.horizon), 9);
  const SimCounts& c0 = out.samples.front();
  // N_IS / n ~ eps * (1 - eps) * mean degree for a uniformly chosen infected set.
  const double expected = p.epsilon * (1 - p.epsilon) * 5.0;
  const double sd = std::sqrt(p.epsilon * g.n() * 5.0 * 6.0) / g.n();
  EXPECT_NEAR(static_cast<double>(c0.N_IS) / g.n(), expected, 3.0 * sd);
}

TEST(Ensemble, DegenerateHasZeroVariance) {
  const auto d = build_distribution(RegularSpec{4});
  EpidemicParams p = params(0.0, 0.0, 0.0, 1.0);
  EnsembleConfig cfg;
  cfg.n = 200;
  cfg.replicas = 10;
  cfg.sample_dt = 0.1;
  const EnsembleStats st = ensemble(d, p, VaccinationPolicy::none(1.0), cfg);
  for (const auto& se : st.stderr_)
    for (double x : se) EXPECT_EQ(x, 0.0);
  EXPECT_DOUBLE_EQ(st.mean.back()[1], 0.01);
}

TEST(Ensemble, ParallelMatchesSerialAcrossThreads) {
  const auto d = build_distribution(PoissonSpec{5});
  const EpidemicParams p = params(3.0, 1.0, 0.3, 8.0);
  const auto pol = VaccinationPolicy::threshold(XiSpec::degree_proportional(), 1.0, 0.3, 8.0);
  EnsembleConfig cfg;
  cfg.n = 400;
  cfg.replicas = 8;
  cfg.sample_dt = 0.1;
  const EnsembleStats s = ensemble_serial(d, p, pol, cfg);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const EnsembleStats a = ensemble(d, p, pol, cfg);
  omp_set_num_threads(3);
  const EnsembleStats b = ensemble(d, p, pol, cfg);
  omp_set_num_threads(saved);
  EXPECT_EQ(a.mean, s.mean);
  EXPECT_EQ(b.mean, s.mean);
  EXPECT_EQ(b.stderr_, s.stderr_);
  EXPECT_EQ(b.peak_I, s.peak_I);
}

TEST(Ensemble, StandardErrorShrinksWithReplicas) {
  const auto d = build_distribution(PoissonSpec{5});
  const EpidemicParams p = params(3.0, 1.0, 0.0, 6.0);
  EnsembleConfig cfg;
  cfg.n = 300;
  cfg.sample_dt = 0.5;
  cfg.replicas = 200;
  const EnsembleStats a = ensemble(d, p, VaccinationPolicy::none(6.0), cfg);
  cfg.replicas = 400;
  const EnsembleStats b = ensemble(d, p, VaccinationPolicy::none(6.0), cfg);
  const double ratio = b.stderr_peak_I() / a.stderr_peak_I();
  EXPECT_NEAR(ratio, 1.0 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
}

TEST(Stoch, CsvWriters) {
  const ConfigGraph g(3, {{0, 1}, {1, 2}});
  EpidemicParams p = params(1.0, 1.0, 0.0, 1.0);
  SimOptions o;
  o.record_events = true;
  o.sample_dt = 0.5;
  const std::vector<int> init{0};
  Rng rng(1);
  const SimOutput out = run_sirv(g, p, VaccinationPolicy::none(1.0), init, rng, o);
  std::ostringstream a, b;
  write_series_csv(out, a);
  write_events_csv(out, b);
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "t,S,I,R,V,N_S,N_IS,N_RS,N_VS");
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "t,kind,node");
  EXPECT_EQ(out.t.size(), 3u);
}
