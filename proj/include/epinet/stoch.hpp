#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "epinet/fluid.hpp"
#include "epinet/netgen.hpp"
#include "epinet/policy.hpp"

namespace epinet {

enum class Compartment : std::uint8_t { S, I, R, V };
enum class EventKind : std::uint8_t { infect, recover, vaccinate };

const char* event_name(EventKind kind);

struct Event {
  double t;
  EventKind kind;
  int node;
};

// Node counts and half-edge counts; N_XS counts half-edges from X nodes to S nodes.
struct SimCounts {
  long long S = 0, I = 0, R = 0, V = 0;
  long long N_S = 0, N_IS = 0, N_RS = 0, N_VS = 0;
};

// Degree-indexed count vectors divided by n. mu_S is indexed by the full
// degree, the others by the number of susceptible neighbours.
struct EmpiricalMeasures {
  std::vector<double> S, IS, RS, VS;
};

/// Markov state of the SIR-V chain on a fixed graph, with incremental
/// bookkeeping of the SI edges, per-node susceptible-neighbour counts and the
/// vaccination weights of susceptible nodes.
class SirvProcess {
 public:
  SirvProcess(const ConfigGraph& graph, const XiSpec& xi);

  void seed_infection(int v);
  void infect(int v);
  void recover(int v);
  void vaccinate(int v);

  const ConfigGraph& graph() const { return graph_; }
  Compartment state(int v) const { return state_[v]; }
  int susceptible_neighbors(int v) const { return s_nbrs_[v]; }
  const SimCounts& counts() const { return counts_; }
  std::size_t si_edges() const { return si_edges_.size(); }
  std::size_t infected() const { return infected_.size(); }
  // Sum of xi(deg v) over susceptible nodes.
  double vaccination_weight() const;

  int si_edge_at(std::size_t i) const { return si_edges_[i]; }
  int infected_at(std::size_t i) const { return infected_[i]; }
  // Susceptible node chosen with probability proportional to xi(degree); u in [0, weight).
  int pick_for_vaccination(double u) const;

  // Full-scan recount of N_IS, for consistency checks.
  long long recount_N_IS() const;

 private:
  void leave_susceptible(int v, Compartment to);
  void si_insert(int edge);
  void si_erase(int edge);
  void fenwick_add(int v, double delta);

  const ConfigGraph& graph_;
  std::vector<Compartment> state_;
  std::vector<int> s_nbrs_;
  SimCounts counts_;
  std::vector<int> si_edges_;
  std::vector<int> si_pos_;
  std::vector<int> infected_;
  std::vector<int> infected_pos_;
  std::vector<double> xi_weight_;
  std::vector<double> fenwick_;
  int fenwick_top_ = 1;
};

EmpiricalMeasures empirical_measures(const SirvProcess& process);

struct SimOptions {
  double sample_dt = 0.01;
  bool record_events = false;
  // Checks the incremental N_IS against a full recount every this many events (0 = never).
  int audit_every = 0;
};

struct SimOutput {
  std::vector<Event> events;
  std::vector<double> t;
  std::vector<SimCounts> samples;
  int n = 0;
  SimCounts final_counts;
  std::size_t event_count = 0;
};

// Initial infected: max(1, round(epsilon n)) nodes chosen uniformly without replacement.
SimOutput run_sirv(const ConfigGraph& graph, const EpidemicParams& params,
                   const VaccinationPolicy& policy, std::uint64_t seed,
                   const SimOptions& options = {});
SimOutput run_sirv(const ConfigGraph& graph, const EpidemicParams& params,
                   const VaccinationPolicy& policy, std::span<const int> initial_infected, Rng& rng,
                   const SimOptions& options = {});

// `t,S,I,R,V,N_S,N_IS,N_RS,N_VS`, all scaled by 1/n.
void write_series_csv(const SimOutput& out, std::ostream& os);
// `t,kind,node`
void write_events_csv(const SimOutput& out, std::ostream& os);

struct EnsembleConfig {
  int n = 10000;
  int replicas = 50;
  std::uint64_t base_seed = 1;
  int max_attempts = 200;
  double sample_dt = 0.01;
};

/// Per-grid-point mean and standard error over replicas, fractions of n.
/// Columns follow SimCounts: S, I, R, V, N_S, N_IS, N_RS, N_VS.
struct EnsembleStats {
  std::vector<double> t;
  std::vector<std::array<double, 8>> mean;
  std::vector<std::array<double, 8>> stderr_;
  std::vector<double> peak_I;  // per replica
  int replicas = 0;

  double mean_peak_I() const;
  double stderr_peak_I() const;
};

// Replica r samples a degree sequence, builds a graph and simulates, all from seed base_seed + r.
EnsembleStats ensemble(const DegreeDistribution& dist, const EpidemicParams& params,
                       const VaccinationPolicy& policy, const EnsembleConfig& cfg);
EnsembleStats ensemble_serial(const DegreeDistribution& dist, const EpidemicParams& params,
                              const VaccinationPolicy& policy, const EnsembleConfig& cfg);

// `t,S,I,R,V,N_S,N_IS,N_RS,N_VS,S_se,I_se,R_se,V_se,N_S_se,N_IS_se,N_RS_se,N_VS_se`
void write_ensemble_csv(const EnsembleStats& stats, std::ostream& os);

}  // namespace epinet
