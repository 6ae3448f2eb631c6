#include "epinet/run.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "epinet/control.hpp"
#include "epinet/error.hpp"
#include "epinet/finalsize.hpp"
#include "epinet/fluid.hpp"
#include "epinet/graph_metrics.hpp"
#include "epinet/netgen.hpp"
#include "epinet/stoch.hpp"

namespace epinet {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"fluid",     "simulate",   "optimize",
                                                  "best-response", "sweep", "final-size",
                                                  "metrics",   "reproduce"};
  return names;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return 1;
  if (dynamic_cast<const NumericalError*>(&e)) return 2;
  return 2;
}

namespace {

class Context {
 public:
  Context(std::string subcommand, const Scenario& sc, fs::path dir) : dir_(std::move(dir)) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.scenario_label = sc.label;
    manifest_.scenario_hash = scenario_hash(sc);
    fs::create_directories(dir_);
  }

  // Writes a file through `fill` and records it.
  void write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + (dir_ / name).string());
    fill(out);
    if (!out) throw ValidationError("write failed for " + (dir_ / name).string());
    manifest_.files.push_back(name);
  }

  template <class F>
  auto timed(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(name, start);
    } else {
      auto result = f();
      record(name, start);
      return result;
    }
  }

  void seed(std::uint64_t s) { manifest_.seeds.push_back(s); }
  void info(const std::string& k, const std::string& v) { manifest_.info[k] = v; }

  RunManifest finish() {
    nlohmann::json j;
    j["subcommand"] = manifest_.subcommand;
    j["scenario"] = {{"label", manifest_.scenario_label}, {"hash", manifest_.scenario_hash}};
    j["version"] = kVersion;
    j["seeds"] = manifest_.seeds;
    j["files"] = manifest_.files;
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& [k, v] : manifest_.timings) timings[k] = v;
    j["timings_seconds"] = timings;
    j["info"] = manifest_.info;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << j.dump(2) << '\n';
    return manifest_;
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
    manifest_.timings.emplace_back(name, d.count());
  }

  fs::path dir_;
  RunManifest manifest_;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ConfigGraph sample_graph(const DegreeDistribution& dist, int n, std::uint64_t seed, int max_attempts) {
  Rng rng(seed);
  const auto degrees = sample_degree_sequence(dist, n, rng);
  return build_config_model(degrees, rng, max_attempts);
}

std::vector<double> tau_grid_for(const Scenario& sc) {
  const TauGridSpec& g = sc.policy.tau_grid;
  const double stop = g.stop > 0.0 ? g.stop : sc.epidemic.horizon;
  return make_tau_grid(g.start, stop, g.step);
}

SimulationSpec simulation_or_default(const Scenario& sc) {
  return sc.simulation ? *sc.simulation : SimulationSpec{};
}

void run_fluid(Context& ctx, const Scenario& sc, const RunOptions& opt) {
  const DegreeDistribution dist = build_distribution(sc.distribution);
  const VaccinationPolicy policy = sc.vaccination();
  const Trajectory traj = ctx.timed("integrate", [&] { return integrate_fluid(sc.epidemic, dist, policy); });
  ctx.write("trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(traj, o); });
  ctx.info("cost", fmt(social_cost(traj, policy.schedule, sc.costs)));
  if (opt.check_steps) {
    const StepCheck c = ctx.timed("step_check", [&] { return step_doubling_check(sc.epidemic, dist, policy); });
    ctx.write("step_check.csv", [&](std::ostream& o) {
      o << "dt,terminal_S,terminal_S_half_dt,difference,passed\n"
        << fmt(sc.epidemic.dt) << ',' << fmt(c.terminal_S_full) << ',' << fmt(c.terminal_S_half)
        << ',' << fmt(c.difference) << ',' << (c.passed ? 1 : 0) << '\n';
    });
    ctx.info("step_check", c.passed ? "passed" : "failed");
    if (!c.passed) {
      ctx.finish();
      throw NumericalError("step-doubling check failed: halving dt moves terminal S by " +
                           fmt(c.difference) + " (limit 1e-6)");
    }
  }
}

void run_simulate(Context& ctx, const Scenario& sc) {
  const DegreeDistribution dist = build_distribution(sc.distribution);
  const SimulationSpec sim = simulation_or_default(sc);
  const VaccinationPolicy policy = sc.vaccination();
  ctx.seed(sim.seed);
  const ConfigGraph g = ctx.timed("graph", [&] { return sample_graph(dist, sim.n, sim.seed, sim.max_attempts); });
  ctx.info("graph_simple", g.simple ? "true" : "false");
  ctx.info("graph_attempts", std::to_string(g.attempts_used));
  SimOptions so;
  so.sample_dt = sim.sample_dt;
  so.record_events = sim.events;
  const SimOutput out = ctx.timed("simulate", [&] { return run_sirv(g, sc.epidemic, policy, sim.seed, so); });
  ctx.write("series.csv", [&](std::ostream& o) { write_series_csv(out, o); });
  if (sim.events) ctx.write("events.csv", [&](std::ostream& o) { write_events_csv(out, o); });
  if (sim.replicas >= 2) {
    EnsembleConfig cfg;
    cfg.n = sim.n;
    cfg.replicas = sim.replicas;
    cfg.base_seed = sim.seed;
    cfg.max_attempts = sim.max_attempts;
    cfg.sample_dt = sim.sample_dt;
    const EnsembleStats st = ctx.timed("ensemble", [&] { return ensemble(dist, sc.epidemic, policy, cfg); });
    ctx.write("ensemble.csv", [&](std::ostream& o) { write_ensemble_csv(st, o); });
    ctx.info("ensemble_base_seed", std::to_string(sim.seed));
    ctx.info("mean_peak_I", fmt(st.mean_peak_I()));
    ctx.info("stderr_peak_I", fmt(st.stderr_peak_I()));
  }
}

void run_optimize(Context& ctx, const Scenario& sc) {
  const DegreeDistribution dist = build_distribution(sc.distribution);
  const CostReport rep = ctx.timed("optimize", [&] {
    return optimize_threshold(sc.epidemic, dist, sc.xi, sc.costs, tau_grid_for(sc));
  });
  ctx.write("cost.csv", [&](std::ostream& o) { write_cost_csv(rep, o); });
  ctx.info("tau_star", fmt(rep.tau_star()));
  ctx.info("cost_star", fmt(rep.cost_star()));
}

void run_best_response(Context& ctx, const Scenario& sc) {
  const DegreeDistribution dist = build_distribution(sc.distribution);
  const VaccinationPolicy policy = sc.vaccination();
  const Trajectory pop = ctx.timed("population", [&] { return integrate_fluid(sc.epidemic, dist, policy); });
  std::vector<int> degrees = sc.policy.degrees;
  if (degrees.empty())
    for (int k = 0; k <= dist.k_max(); ++k)
      if (dist[k] > 0.0) degrees.push_back(k);
  const auto brs = ctx.timed("best_response", [&] {
    return br_thresholds(degrees, pop, sc.epidemic, sc.costs, sc.xi, sc.policy.survival_factor);
  });
  ctx.write("population.csv", [&](std::ostream& o) { write_trajectory_csv(pop, o); });
  ctx.write("best_response.csv", [&](std::ostream& o) { write_best_response_csv(brs, o); });
  bool threshold = true;
  for (const auto& br : brs) threshold = threshold && br.threshold_form;
  ctx.info("all_threshold_form", threshold ? "true" : "false");
}

void run_sweep(Context& ctx, const Scenario& sc) {
  const DegreeDistribution dist = build_distribution(sc.distribution);
  const SweepResult res = ctx.timed("sweep", [&] {
    return forward_backward_sweep(sc.epidemic, dist, sc.xi, sc.costs, sc.policy.sweep);
  });
  ctx.write("sweep.csv", [&](std::ostream& o) { write_sweep_csv(res, o); });
  ctx.write("sweep_trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(res.state, o); });
  ctx.info("converged", res.converged ? "true" : "false");
  ctx.info("iterations", std::to_string(res.iterations));
  ctx.info("cost", fmt(res.cost));
}

void run_final_size(Context& ctx, const Scenario& sc) {
  const DegreeDistribution dist = build_distribution(sc.distribution);
  const EpidemicIndicators ind = epidemic_indicators(dist, sc.epidemic.r, sc.epidemic.gamma);
  ctx.write("indicators.csv", [&](std::ostream& o) {
    o << indicators_csv_header() << '\n' << indicators_csv_row(ind) << '\n';
  });
  const Schedule sched = sc.schedule();
  const bool vaccinating = sched.max_value() > 0.0;
  if (vaccinating && !(sc.xi == XiSpec::degree_proportional()))
    throw ValidationError("final-size with vaccination requires xi(k) = k (a = 1, b = 0)");
  if (vaccinating && sc.policy.kind == PolicyKind::schedule)
    throw ValidationError("final-size needs a threshold policy");
  const double tau = vaccinating ? sc.policy.tau : 0.0;
  EpidemicParams params = sc.epidemic;
  const Trajectory traj = ctx.timed("integrate", [&] {
    return integrate_fluid(params, dist, VaccinationPolicy{XiSpec::degree_proportional(), sched});
  });
  const FinalSizes f = final_sizes(dist, params, tau, traj);
  ctx.write("final_size.csv", [&](std::ostream& o) { write_final_sizes_csv(f, o); });
  ctx.info("R_inf_stated", fmt(f.R_inf_stated));
  ctx.info("S_T_fluid", fmt(traj.S.back()));
}

void run_metrics(Context& ctx, const Scenario& sc) {
  const DegreeDistribution dist = build_distribution(sc.distribution);
  const SimulationSpec sim = simulation_or_default(sc);
  ctx.write("metrics.csv", [&](std::ostream& o) {
    o << metrics_csv_header() << '\n';
    for (int i = 0; i < sim.graphs; ++i) {
      const std::uint64_t seed = sim.seed + static_cast<std::uint64_t>(i);
      ctx.seed(seed);
      const ConfigGraph g = sample_graph(dist, sim.n, seed, sim.max_attempts);
      const GraphMetrics m = ctx.timed("metrics_seed_" + std::to_string(seed), [&] { return graph_metrics(g); });
      o << metrics_csv_row(sc.label, sim.n, seed, m) << '\n';
    }
  });
}

// --- reproduce -------------------------------------------------------------

struct Network {
  std::string suite;
  std::string name;
  DistributionSpec spec;
};

std::vector<Network> reproduce_networks() {
  return {
      {"mean5", "poisson", PoissonSpec{5.0}},
      {"mean5", "bimodal", BimodalSpec{3.0, 13, 0.8}},
      {"mean5", "regular", RegularSpec{5}},
      {"mean5", "powerlaw", PowerLawSpec{1.474, 100.0, 50}},
      {"matched", "poisson", PoissonSpec{5.0}},
      {"matched", "bimodal", BimodalSpec{3.0, 8, 0.73}},
      {"matched", "regular", RegularSpec{6}},
      {"matched", "powerlaw", PowerLawSpec{2.0, 20.0, 50}},
  };
}

struct Panel {
  std::string name;
  double c_V, c_I, nu;
};

void run_reproduce(Context& ctx, const Scenario& sc) {
  const auto networks = reproduce_networks();
  std::vector<DegreeDistribution> dists;
  for (const Network& n : networks) dists.push_back(build_distribution(n.spec));

  // Tables 1 and 3 plus the threshold indicators.
  auto r0_table = [&](const std::string& suite, const std::string& file) {
    ctx.write(file, [&](std::ostream& o) {
      o << "label,psi2,R0\n";
      for (std::size_t i = 0; i < networks.size(); ++i) {
        if (networks[i].suite != suite) continue;
        const auto ind = epidemic_indicators(dists[i], sc.epidemic.r, sc.epidemic.gamma);
        o << '"' << dists[i].label() << "\"," << fmt(dists[i].factorial_moment(2)) << ','
          << fmt(ind.R0) << '\n';
      }
    });
  };
  r0_table("mean5", "table1.csv");
  r0_table("matched", "table3.csv");
  ctx.write("indicators.csv", [&](std::ostream& o) {
    o << indicators_csv_header() << '\n';
    for (const auto& d : dists)
      o << indicators_csv_row(epidemic_indicators(d, sc.epidemic.r, sc.epidemic.gamma)) << '\n';
  });

  // Cost curves, optimal thresholds and trajectories for both vaccination modes.
  const std::vector<double> grid = tau_grid_for(sc);
  std::ostringstream optimum;
  optimum << "suite,network,mode,tau_star,cost,R_inf,V_inf\n";
  for (std::size_t i = 0; i < networks.size(); ++i) {
    const Network& net = networks[i];
    const DegreeDistribution& dist = dists[i];
    const std::string stem = net.suite + "_" + net.name;
    const Trajectory novax = integrate_fluid(sc.epidemic, dist, VaccinationPolicy::none(sc.epidemic.horizon));
    ctx.write("traj_" + stem + "_novax.csv", [&](std::ostream& o) { write_trajectory_csv(novax, o); });
    const std::pair<std::string, XiSpec> modes[] = {
        {"deg", XiSpec::degree_proportional()}, {"const", XiSpec::uniform(dist.mean())}};
    for (const auto& [mode, xi] : modes) {
      const CostReport rep = ctx.timed("optimize_" + stem + "_" + mode, [&] {
        return optimize_threshold(sc.epidemic, dist, xi, sc.costs, grid);
      });
      ctx.write("cost_" + stem + "_" + mode + ".csv", [&](std::ostream& o) { write_cost_csv(rep, o); });
      const auto policy = VaccinationPolicy::threshold(xi, rep.tau_star(), sc.epidemic.nu, sc.epidemic.horizon);
      const Trajectory traj = integrate_fluid(sc.epidemic, dist, policy);
      ctx.write("traj_" + stem + "_" + mode + ".csv", [&](std::ostream& o) { write_trajectory_csv(traj, o); });
      optimum << net.suite << ',' << net.name << ',' << mode << ',' << fmt(rep.tau_star()) << ','
              << fmt(rep.cost_star()) << ',' << fmt(rep.R_inf[rep.best]) << ','
              << fmt(rep.V_inf[rep.best]) << '\n';
    }
  }
  ctx.write("optimum.csv", [&](std::ostream& o) { o << optimum.str(); });

  // Threshold optimization panels on the mean-degree-5 bimodal network.
  const Panel panels[] = {{"fig4a", 10.0, 50.0, 0.2}, {"fig4b", 10.0, 50.0, 0.3}, {"fig4c", 5.0, 50.0, 0.3}};
  const DegreeDistribution& bimodal = dists[1];
  for (const Panel& p : panels) {
    EpidemicParams params = sc.epidemic;
    params.nu = p.nu;
    const CostParams costs{p.c_I, p.c_V};
    const std::pair<std::string, XiSpec> modes[] = {
        {"deg", XiSpec::degree_proportional()}, {"const", XiSpec::uniform(bimodal.mean())}};
    for (const auto& [mode, xi] : modes) {
      const CostReport rep = ctx.timed("optimize_" + p.name + "_" + mode, [&] {
        return optimize_threshold(params, bimodal, xi, costs, grid);
      });
      ctx.write("cost_" + p.name + "_" + mode + ".csv", [&](std::ostream& o) { write_cost_csv(rep, o); });
    }
  }

  // Tables 2 and 4: graph metrics averaged over seeds.
  const SimulationSpec sim = simulation_or_default(sc);
  for (int i = 0; i < sim.graphs; ++i) ctx.seed(sim.seed + static_cast<std::uint64_t>(i));
  auto metrics_table = [&](const std::string& suite, const std::string& table) {
    std::ostringstream rows;
    std::ostringstream avg;
    rows << metrics_csv_header() << '\n';
    avg << "label,n,seeds,betweenness,density,clustering,closeness\n";
    for (std::size_t i = 0; i < networks.size(); ++i) {
      if (networks[i].suite != suite) continue;
      GraphMetrics sum;
      for (int s = 0; s < sim.graphs; ++s) {
        const std::uint64_t seed = sim.seed + static_cast<std::uint64_t>(s);
        const ConfigGraph g = sample_graph(dists[i], sim.n, seed, sim.max_attempts);
        const GraphMetrics m = ctx.timed("metrics_" + suite + "_" + networks[i].name + "_" + std::to_string(seed),
                                         [&] { return graph_metrics(g); });
        rows << metrics_csv_row(dists[i].label(), sim.n, seed, m) << '\n';
        sum.betweenness += m.betweenness / sim.graphs;
        sum.density += m.density / sim.graphs;
        sum.clustering += m.clustering / sim.graphs;
        sum.closeness += m.closeness / sim.graphs;
      }
      avg << '"' << dists[i].label() << "\"," << sim.n << ',' << sim.graphs << ','
          << fmt(sum.betweenness) << ',' << fmt(sum.density) << ',' << fmt(sum.clustering) << ','
          << fmt(sum.closeness) << '\n';
    }
    ctx.write("metrics_" + suite + ".csv", [&](std::ostream& o) { o << rows.str(); });
    ctx.write(table, [&](std::ostream& o) { o << avg.str(); });
  };
  metrics_table("mean5", "table2.csv");
  metrics_table("matched", "table4.csv");
}

}  // namespace

RunManifest run_subcommand(const std::string& subcommand, Scenario sc, const RunOptions& options) {
  if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
    throw ValidationError("unknown subcommand '" + subcommand + "'");
  if (options.dt) sc.epidemic.dt = *options.dt;
  if (options.seed) {
    if (!sc.simulation) sc.simulation = SimulationSpec{};
    sc.simulation->seed = *options.seed;
  }
  validate_scenario(sc);
  const fs::path dir = options.out_dir.empty() ? fs::path(sc.output_dir) : options.out_dir;
  Context ctx(subcommand, sc, dir);
  if (subcommand == "fluid") run_fluid(ctx, sc, options);
  else if (subcommand == "simulate") run_simulate(ctx, sc);
  else if (subcommand == "optimize") run_optimize(ctx, sc);
  else if (subcommand == "best-response") run_best_response(ctx, sc);
  else if (subcommand == "sweep") run_sweep(ctx, sc);
  else if (subcommand == "final-size") run_final_size(ctx, sc);
  else if (subcommand == "metrics") run_metrics(ctx, sc);
  else run_reproduce(ctx, sc);
  return ctx.finish();
}

}  // namespace epinet
