#include "epinet/netgen.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>

#include "epinet/error.hpp"

namespace epinet {

ConfigGraph::ConfigGraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 0) throw ValidationError("graph size must be >= 0");
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (const Edge& e : edges_) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      throw ValidationError("edge endpoint out of range");
    ++deg[e.u];
    ++deg[e.v];
  }
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
  targets_.resize(offsets_[n]);
  edge_ids_.resize(offsets_[n]);
  std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
  for (int id = 0; id < static_cast<int>(edges_.size()); ++id) {
    const Edge& e = edges_[id];
    targets_[cursor[e.u]] = e.v;
    edge_ids_[cursor[e.u]++] = id;
    targets_[cursor[e.v]] = e.u;
    edge_ids_[cursor[e.v]++] = id;
  }
  requested_degrees = std::move(deg);
}

int ConfigGraph::max_degree() const {
  int m = 0;
  for (int v = 0; v < n_; ++v) m = std::max(m, degree(v));
  return m;
}

std::vector<int> sample_degree_sequence(const DegreeDistribution& dist, int n, Rng& rng) {
  if (n < 2) throw ValidationError("degree sequence needs n >= 2");
  std::vector<double> cdf(dist.pmf().size());
  std::partial_sum(dist.pmf().begin(), dist.pmf().end(), cdf.begin());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw = [&] {
    const double u = unif(rng) * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), dist.k_max()));
  };
  std::vector<int> seq(static_cast<std::size_t>(n));
  long long sum = 0;
  for (int& k : seq) {
    k = draw();
    sum += k;
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  while (sum % 2 != 0) {
    const int i = pick(rng);
    sum -= seq[i];
    seq[i] = draw();
    sum += seq[i];
  }
  return seq;
}

std::vector<int> sample_degree_sequence(const DegreeDistribution& dist, int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_degree_sequence(dist, n, rng);
}

std::vector<Edge> match_half_edges(std::span<const int> degrees, Rng& rng) {
  std::vector<int> stubs;
  for (int v = 0; v < static_cast<int>(degrees.size()); ++v)
    stubs.insert(stubs.end(), static_cast<std::size_t>(degrees[v]), v);
  if (stubs.size() % 2 != 0) throw ValidationError("degree sum must be even");
  // Fisher-Yates, then pair neighbours: a uniform perfect matching.
  for (std::size_t i = stubs.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(stubs[i - 1], stubs[pick(rng)]);
  }
  std::vector<Edge> edges;
  edges.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2)
    edges.push_back({std::min(stubs[i], stubs[i + 1]), std::max(stubs[i], stubs[i + 1])});
  return edges;
}

namespace {

bool sort_and_check_simple(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].u == edges[i].v) return false;
    if (i > 0 && edges[i] == edges[i - 1]) return false;
  }
  return true;
}

}  // namespace

ConfigGraph build_config_model(std::span<const int> degrees, Rng& rng, int max_attempts) {
  const int n = static_cast<int>(degrees.size());
  long long sum = 0;
  for (int k : degrees) {
    if (k < 0) throw ValidationError("degrees must be >= 0");
    if (k >= n)
      throw ValidationError("infeasible degree sequence: degree " + std::to_string(k) +
                            " needs more than " + std::to_string(n) + " nodes");
    sum += k;
  }
  if (sum % 2 != 0) throw ValidationError("infeasible degree sequence: odd degree sum");
  if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");

  std::vector<Edge> edges;
  int attempt = 0;
  bool simple = false;
  while (attempt < max_attempts && !simple) {
    ++attempt;
    edges = match_half_edges(degrees, rng);
    simple = sort_and_check_simple(edges);
  }
  if (!simple) {
    std::erase_if(edges, [](const Edge& e) { return e.u == e.v; });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  ConfigGraph g(n, std::move(edges));
  g.requested_degrees.assign(degrees.begin(), degrees.end());
  g.simple = simple;
  g.erased = !simple;
  g.attempts_used = attempt;
  return g;
}

ConfigGraph build_config_model(std::span<const int> degrees, std::uint64_t seed, int max_attempts) {
  Rng rng(seed);
  return build_config_model(degrees, rng, max_attempts);
}

void write_edge_list(const ConfigGraph& g, std::ostream& out) {
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

}  // namespace epinet
