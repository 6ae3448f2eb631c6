#include "epinet/stoch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace epinet {

const char* event_name(EventKind kind) {
  switch (kind) {
    case EventKind::infect: return "infect";
    case EventKind::recover: return "recover";
    case EventKind::vaccinate: return "vaccinate";
  }
  return "?";
}

SirvProcess::SirvProcess(const ConfigGraph& graph, const XiSpec& xi)
    : graph_(graph),
      state_(graph.n(), Compartment::S),
      s_nbrs_(graph.n()),
      si_pos_(graph.edge_count(), -1),
      infected_pos_(graph.n(), -1),
      xi_weight_(graph.n()),
      fenwick_(static_cast<std::size_t>(graph.n()) + 1, 0.0) {
  const int n = graph.n();
  while (fenwick_top_ * 2 <= n) fenwick_top_ *= 2;
  counts_.S = n;
  for (int v = 0; v < n; ++v) {
    s_nbrs_[v] = graph.degree(v);
    counts_.N_S += graph.degree(v);
    xi_weight_[v] = xi(graph.degree(v));
    if (xi_weight_[v] < 0.0) throw ValidationError("xi(k) must be >= 0");
  }
  // Linear-time Fenwick build.
  for (int i = 1; i <= n; ++i) {
    fenwick_[i] += xi_weight_[i - 1];
    const int parent = i + (i & -i);
    if (parent <= n) fenwick_[parent] += fenwick_[i];
  }
}

void SirvProcess::fenwick_add(int v, double delta) {
  for (int i = v + 1; i < static_cast<int>(fenwick_.size()); i += i & -i) fenwick_[i] += delta;
}

double SirvProcess::vaccination_weight() const {
  if (counts_.S == 0) return 0.0;
  double total = 0.0;
  for (int i = graph_.n(); i > 0; i -= i & -i) total += fenwick_[i];
  return std::max(total, 0.0);
}

int SirvProcess::pick_for_vaccination(double u) const {
  int pos = 0;
  for (int step = fenwick_top_; step > 0; step /= 2) {
    const int next = pos + step;
    if (next < static_cast<int>(fenwick_.size()) && fenwick_[next] <= u) {
      pos = next;
      u -= fenwick_[next];
    }
  }
  // Guard against round-off landing on a removed node.
  int v = std::min(pos, graph_.n() - 1);
  while (v > 0 && (state_[v] != Compartment::S || xi_weight_[v] == 0.0)) --v;
  while (v < graph_.n() && (state_[v] != Compartment::S || xi_weight_[v] == 0.0)) ++v;
  return v;
}

void SirvProcess::si_insert(int edge) {
  si_pos_[edge] = static_cast<int>(si_edges_.size());
  si_edges_.push_back(edge);
}

void SirvProcess::si_erase(int edge) {
  const int pos = si_pos_[edge];
  const int last = si_edges_.back();
  si_edges_[pos] = last;
  si_pos_[last] = pos;
  si_edges_.pop_back();
  si_pos_[edge] = -1;
}

namespace {

long long& n_xs(SimCounts& c, Compartment x) {
  switch (x) {
    case Compartment::I: return c.N_IS;
    case Compartment::R: return c.N_RS;
    default: return c.N_VS;
  }
}

}  // namespace

void SirvProcess::leave_susceptible(int v, Compartment to) {
  const auto nbrs = graph_.neighbors(v);
  const auto ids = graph_.incident_edges(v);
  for (std::size_t j = 0; j < nbrs.size(); ++j) {
    const int u = nbrs[j];
    --s_nbrs_[u];
    if (state_[u] != Compartment::S) --n_xs(counts_, state_[u]);
    if (state_[u] == Compartment::I) si_erase(ids[j]);
    if (to == Compartment::I && state_[u] == Compartment::S) si_insert(ids[j]);
  }
  state_[v] = to;
  --counts_.S;
  counts_.N_S -= graph_.degree(v);
  n_xs(counts_, to) += s_nbrs_[v];
  fenwick_add(v, -xi_weight_[v]);
}

void SirvProcess::infect(int v) {
  if (state_[v] != Compartment::S) throw ValidationError("only susceptible nodes can be infected");
  leave_susceptible(v, Compartment::I);
  ++counts_.I;
  infected_pos_[v] = static_cast<int>(infected_.size());
  infected_.push_back(v);
}

void SirvProcess::seed_infection(int v) { infect(v); }

void SirvProcess::recover(int v) {
  if (state_[v] != Compartment::I) throw ValidationError("only infected nodes can recover");
  const auto nbrs = graph_.neighbors(v);
  const auto ids = graph_.incident_edges(v);
  for (std::size_t j = 0; j < nbrs.size(); ++j)
    if (state_[nbrs[j]] == Compartment::S) si_erase(ids[j]);
  state_[v] = Compartment::R;
  --counts_.I;
  ++counts_.R;
  counts_.N_IS -= s_nbrs_[v];
  counts_.N_RS += s_nbrs_[v];
  const int pos = infected_pos_[v];
  const int last = infected_.back();
  infected_[pos] = last;
  infected_pos_[last] = pos;
  infected_.pop_back();
  infected_pos_[v] = -1;
}

void SirvProcess::vaccinate(int v) {
  if (state_[v] != Compartment::S) throw ValidationError("only susceptible nodes can be vaccinated");
  leave_susceptible(v, Compartment::V);
  ++counts_.V;
}

long long SirvProcess::recount_N_IS() const {
  long long total = 0;
  for (const Edge& e : graph_.edges()) {
    const Compartment a = state_[e.u];
    const Compartment b = state_[e.v];
    if ((a == Compartment::I && b == Compartment::S) || (a == Compartment::S && b == Compartment::I))
      ++total;
  }
  return total;
}

EmpiricalMeasures empirical_measures(const SirvProcess& process) {
  const ConfigGraph& g = process.graph();
  const int kmax = g.max_degree();
  EmpiricalMeasures m{std::vector<double>(kmax + 1, 0.0), std::vector<double>(kmax + 1, 0.0),
                      std::vector<double>(kmax + 1, 0.0), std::vector<double>(kmax + 1, 0.0)};
  const double inv_n = 1.0 / g.n();
  for (int v = 0; v < g.n(); ++v) {
    const int ks = process.susceptible_neighbors(v);
    switch (process.state(v)) {
      case Compartment::S: m.S[g.degree(v)] += inv_n; break;
      case Compartment::I: m.IS[ks] += inv_n; break;
      case Compartment::R: m.RS[ks] += inv_n; break;
      case Compartment::V: m.VS[ks] += inv_n; break;
    }
  }
  return m;
}

namespace {

std::vector<int> choose_initial_infected(int n, double epsilon, Rng& rng) {
  const int count = std::clamp(static_cast<int>(std::lround(epsilon * n)), 1, n);
  std::vector<int> nodes(n);
  for (int v = 0; v < n; ++v) nodes[v] = v;
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(nodes[i], nodes[pick(rng)]);
  }
  nodes.resize(count);
  return nodes;
}

}  // namespace

SimOutput run_sirv(const ConfigGraph& graph, const EpidemicParams& params,
                   const VaccinationPolicy& policy, std::uint64_t seed, const SimOptions& options) {
  params.validate();
  Rng rng(seed);
  const auto initial = choose_initial_infected(graph.n(), params.epsilon, rng);
  return run_sirv(graph, params, policy, initial, rng, options);
}

SimOutput run_sirv(const ConfigGraph& graph, const EpidemicParams& params,
                   const VaccinationPolicy& policy, std::span<const int> initial_infected, Rng& rng,
                   const SimOptions& options) {
  params.validate();
  policy.schedule.validate(params.nu);
  if (!(options.sample_dt > 0.0)) throw ValidationError("sample_dt must be > 0");
  SirvProcess proc(graph, policy.xi);
  for (int v : initial_infected) proc.seed_infection(v);

  const double T = params.horizon;
  const int samples = static_cast<int>(std::floor(T / options.sample_dt + 1e-9));
  SimOutput out;
  out.n = graph.n();
  out.t.reserve(samples + 1);
  out.samples.reserve(samples + 1);
  auto record_before = [&](double time) {
    while (static_cast<int>(out.t.size()) <= samples &&
           out.t.size() * options.sample_dt < time) {
      out.t.push_back(out.t.size() * options.sample_dt);
      out.samples.push_back(proc.counts());
    }
  };

  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = params.r;
  const double gamma = params.gamma;
  double t = 0.0;
  record_before(0.0);
  while (t < T) {
    if (proc.infected() == 0 && policy.schedule.zero_from(t)) break;
    const double pi = policy.schedule.value(t);
    const double seg_end = policy.schedule.next_change(t);
    const double a_inf = r * static_cast<double>(proc.si_edges());
    const double a_rec = gamma * static_cast<double>(proc.infected());
    const double a_vac = pi > 0.0 ? pi * proc.vaccination_weight() : 0.0;
    const double total = a_inf + a_rec + a_vac;
    if (!(total > 0.0)) {
      t = seg_end;
      continue;
    }
    const double next = t + expo(rng) / total;
    if (next >= seg_end) {
      // Memorylessness: restart the race at the breakpoint.
      t = seg_end;
      continue;
    }
    record_before(next);
    t = next;
    const double u = unif(rng) * total;
    Event ev{t, EventKind::infect, -1};
    if (u < a_inf) {
      const auto idx = std::min(static_cast<std::size_t>(u / r), proc.si_edges() - 1);
      const Edge& e = graph.edges()[proc.si_edge_at(idx)];
      ev.node = proc.state(e.u) == Compartment::S ? e.u : e.v;
      proc.infect(ev.node);
    } else if (u < a_inf + a_rec) {
      const auto idx = std::min(static_cast<std::size_t>((u - a_inf) / gamma), proc.infected() - 1);
      ev.kind = EventKind::recover;
      ev.node = proc.infected_at(idx);
      proc.recover(ev.node);
    } else {
      ev.kind = EventKind::vaccinate;
      const double w = std::min((u - a_inf - a_rec) / pi, proc.vaccination_weight());
      ev.node = proc.pick_for_vaccination(w);
      proc.vaccinate(ev.node);
    }
    ++out.event_count;
    if (options.record_events) out.events.push_back(ev);
    if (options.audit_every > 0 && out.event_count % options.audit_every == 0 &&
        proc.recount_N_IS() != proc.counts().N_IS)
      throw NumericalError("N_IS bookkeeping diverged from a full recount");
  }
  record_before(std::numeric_limits<double>::infinity());
  out.final_counts = proc.counts();
  return out;
}

namespace {

std::array<double, 8> as_array(const SimCounts& c) {
  return {double(c.S), double(c.I), double(c.R), double(c.V),
          double(c.N_S), double(c.N_IS), double(c.N_RS), double(c.N_VS)};
}

}  // namespace

void write_series_csv(const SimOutput& out, std::ostream& os) {
  os << "t,S,I,R,V,N_S,N_IS,N_RS,N_VS\n";
  const double inv_n = 1.0 / out.n;
  char buf[512];
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    const auto c = as_array(out.samples[i]);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  out.t[i], c[0] * inv_n, c[1] * inv_n, c[2] * inv_n, c[3] * inv_n, c[4] * inv_n,
                  c[5] * inv_n, c[6] * inv_n, c[7] * inv_n);
    os << buf;
  }
}

void write_events_csv(const SimOutput& out, std::ostream& os) {
  os << "t,kind,node\n";
  char buf[128];
  for (const Event& e : out.events) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%d\n", e.t, event_name(e.kind), e.node);
    os << buf;
  }
}

double EnsembleStats::mean_peak_I() const {
  double s = 0.0;
  for (double p : peak_I) s += p;
  return peak_I.empty() ? 0.0 : s / peak_I.size();
}

double EnsembleStats::stderr_peak_I() const {
  const std::size_t m = peak_I.size();
  if (m < 2) return 0.0;
  const double mu = mean_peak_I();
  double ss = 0.0;
  for (double p : peak_I) ss += (p - mu) * (p - mu);
  return std::sqrt(ss / (m - 1.0) / m);
}

namespace {

SimOutput run_replica(const DegreeDistribution& dist, const EpidemicParams& params,
                      const VaccinationPolicy& policy, const EnsembleConfig& cfg, int r) {
  Rng rng(cfg.base_seed + static_cast<std::uint64_t>(r));
  const auto degrees = sample_degree_sequence(dist, cfg.n, rng);
  const ConfigGraph g = build_config_model(degrees, rng, cfg.max_attempts);
  const auto initial = choose_initial_infected(g.n(), params.epsilon, rng);
  SimOptions opt;
  opt.sample_dt = cfg.sample_dt;
  return run_sirv(g, params, policy, initial, rng, opt);
}

EnsembleStats reduce(const std::vector<SimOutput>& runs, int n) {
  EnsembleStats st;
  st.replicas = static_cast<int>(runs.size());
  st.t = runs.front().t;
  const std::size_t points = st.t.size();
  const double m = static_cast<double>(runs.size());
  st.mean.assign(points, {});
  st.stderr_.assign(points, {});
  const double inv_n = 1.0 / n;
  for (std::size_t i = 0; i < points; ++i) {
    // Two passes over the integer counts: identical replicas give exactly zero spread.
    std::array<long long, 8> sum{};
    for (const SimOutput& run : runs) {
      const auto c = as_array(run.samples[i]);
      for (int j = 0; j < 8; ++j) sum[j] += static_cast<long long>(c[j]);
    }
    std::array<double, 8> ss{};
    for (const SimOutput& run : runs) {
      const auto c = as_array(run.samples[i]);
      for (int j = 0; j < 8; ++j) {
        const double dev = c[j] - sum[j] / m;
        ss[j] += dev * dev;
      }
    }
    for (int j = 0; j < 8; ++j) {
      st.mean[i][j] = sum[j] / m * inv_n;
      st.stderr_[i][j] = m > 1 ? std::sqrt(ss[j] / (m - 1.0) / m) * inv_n : 0.0;
    }
  }
  for (const SimOutput& run : runs) {
    long long peak = 0;
    for (const SimCounts& c : run.samples) peak = std::max(peak, c.I);
    st.peak_I.push_back(peak * inv_n);
  }
  return st;
}

void check_ensemble(const EnsembleConfig& cfg) {
  if (cfg.replicas < 2) throw ValidationError("ensemble needs replicas >= 2");
  if (cfg.n < 2) throw ValidationError("ensemble needs n >= 2");
}

}  // namespace

EnsembleStats ensemble(const DegreeDistribution& dist, const EpidemicParams& params,
                       const VaccinationPolicy& policy, const EnsembleConfig& cfg) {
  check_ensemble(cfg);
  std::vector<SimOutput> runs(cfg.replicas);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < cfg.replicas; ++r) {
    try {
      runs[r] = run_replica(dist, params, policy, cfg, r);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return reduce(runs, cfg.n);
}

EnsembleStats ensemble_serial(const DegreeDistribution& dist, const EpidemicParams& params,
                              const VaccinationPolicy& policy, const EnsembleConfig& cfg) {
  check_ensemble(cfg);
  std::vector<SimOutput> runs;
  for (int r = 0; r < cfg.replicas; ++r) runs.push_back(run_replica(dist, params, policy, cfg, r));
  return reduce(runs, cfg.n);
}

void write_ensemble_csv(const EnsembleStats& st, std::ostream& os) {
  os << "t,S,I,R,V,N_S,N_IS,N_RS,N_VS,S_se,I_se,R_se,V_se,N_S_se,N_IS_se,N_RS_se,N_VS_se\n";
  char buf[64];
  for (std::size_t i = 0; i < st.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", st.t[i]);
    os << buf;
    for (double x : st.mean[i]) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      os << buf;
    }
    for (double x : st.stderr_[i]) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace epinet
