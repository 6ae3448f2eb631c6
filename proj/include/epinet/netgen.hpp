#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "epinet/degree.hpp"

namespace epinet {

using Rng = std::mt19937_64;

struct Edge {
  int u;
  int v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected graph in compressed adjacency form, produced by the
/// configuration model.
///
/// `requested_degrees` is the sampled sequence; `degree(v)` is what the
/// adjacency realizes. They agree unless the matching fell back to erasing
/// self-loops and parallel edges (`erased`).
class ConfigGraph {
 public:
  ConfigGraph() = default;
  ConfigGraph(int n, std::vector<Edge> edges);

  int n() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const int> neighbors(int v) const {
    return {targets_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
  }
  // Edge ids aligned with neighbors(v).
  std::span<const int> incident_edges(int v) const {
    return {edge_ids_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
  }
  int max_degree() const;

  std::vector<int> requested_degrees;
  bool simple = true;  // a matching without loops/multi-edges was found
  bool erased = false;  // fallback: loops dropped and multi-edges collapsed
  int attempts_used = 0;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> offsets_{0};
  std::vector<int> targets_;
  std::vector<int> edge_ids_;
};

// n i.i.d. draws; an odd sum is fixed by redrawing one uniformly chosen entry.
std::vector<int> sample_degree_sequence(const DegreeDistribution& dist, int n, Rng& rng);
std::vector<int> sample_degree_sequence(const DegreeDistribution& dist, int n, std::uint64_t seed);

// One uniform perfect matching of the half-edges. May contain loops and
// repeated pairs; each pair is returned with u <= v.
std::vector<Edge> match_half_edges(std::span<const int> degrees, Rng& rng);

ConfigGraph build_config_model(std::span<const int> degrees, Rng& rng, int max_attempts = 200);
ConfigGraph build_config_model(std::span<const int> degrees, std::uint64_t seed,
                               int max_attempts = 200);

// "u v" per line, 0-indexed.
void write_edge_list(const ConfigGraph& g, std::ostream& out);

}  // namespace epinet
