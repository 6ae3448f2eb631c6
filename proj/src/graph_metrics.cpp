#include "epinet/graph_metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <omp.h>

namespace epinet {

namespace {

struct BrandesWork {
  std::vector<int> dist;
  std::vector<double> sigma;
  std::vector<double> delta;
  std::vector<int> order;

  explicit BrandesWork(int n) : dist(n, -1), sigma(n, 0.0), delta(n, 0.0) { order.reserve(n); }
};

// Accumulates the dependencies of source s into `bc` and returns its closeness.
double brandes_source(const ConfigGraph& g, int s, BrandesWork& w, std::vector<double>& bc) {
  const int n = g.n();
  w.order.clear();
  w.dist[s] = 0;
  w.sigma[s] = 1.0;
  w.order.push_back(s);
  long long dist_sum = 0;
  for (std::size_t head = 0; head < w.order.size(); ++head) {
    const int v = w.order[head];
    dist_sum += w.dist[v];
    for (int u : g.neighbors(v)) {
      if (w.dist[u] < 0) {
        w.dist[u] = w.dist[v] + 1;
        w.order.push_back(u);
      }
      if (w.dist[u] == w.dist[v] + 1) w.sigma[u] += w.sigma[v];
    }
  }
  for (auto it = w.order.rbegin(); it != w.order.rend(); ++it) {
    const int v = *it;
    for (int u : g.neighbors(v)) {
      if (w.dist[u] == w.dist[v] - 1) w.delta[u] += w.sigma[u] / w.sigma[v] * (1.0 + w.delta[v]);
    }
    if (v != s) bc[v] += w.delta[v];
  }
  for (int v : w.order) {
    w.dist[v] = -1;
    w.sigma[v] = 0.0;
    w.delta[v] = 0.0;
  }
  const double reach = static_cast<double>(w.order.size()) - 1.0;
  if (dist_sum == 0 || n < 2) return 0.0;
  return reach / static_cast<double>(dist_sum) * reach / (n - 1.0);
}

void normalize_betweenness(std::vector<double>& bc, int n) {
  // Each unordered pair is counted from both ends.
  const double scale = n < 3 ? 0.0 : 1.0 / ((n - 1.0) * (n - 2.0));
  for (double& b : bc) b *= scale;
}

}  // namespace

NodeCentrality centrality_serial(const ConfigGraph& g) {
  const int n = g.n();
  NodeCentrality out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  BrandesWork w(n);
  for (int s = 0; s < n; ++s) out.closeness[s] = brandes_source(g, s, w, out.betweenness);
  normalize_betweenness(out.betweenness, n);
  return out;
}

NodeCentrality centrality(const ConfigGraph& g) {
  const int n = g.n();
  NodeCentrality out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  constexpr int kBlock = 256;
  const int blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(blocks);
#pragma omp parallel
  {
    BrandesWork w(n);
#pragma omp for schedule(dynamic, 1)
    for (int b = 0; b < blocks; ++b) {
      partial[b].assign(n, 0.0);
      const int end = std::min(n, (b + 1) * kBlock);
      for (int s = b * kBlock; s < end; ++s)
        out.closeness[s] = brandes_source(g, s, w, partial[b]);
    }
  }
  for (const auto& p : partial)
    for (int v = 0; v < n; ++v) out.betweenness[v] += p[v];
  normalize_betweenness(out.betweenness, n);
  return out;
}

std::vector<double> local_clustering(const ConfigGraph& g) {
  const int n = g.n();
  std::vector<double> c(n, 0.0);
  std::vector<char> mark(n, 0);
  for (int v = 0; v < n; ++v) {
    const int k = g.degree(v);
    if (k < 2) continue;
    for (int u : g.neighbors(v)) mark[u] = 1;
    long long links = 0;
    for (int u : g.neighbors(v))
      for (int w : g.neighbors(u))
        if (w != v && mark[w]) ++links;
    for (int u : g.neighbors(v)) mark[u] = 0;
    c[v] = static_cast<double>(links) / (static_cast<double>(k) * (k - 1));
  }
  return c;
}

double density(const ConfigGraph& g) {
  const double n = g.n();
  return n < 2 ? 0.0 : 2.0 * static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

GraphMetrics graph_metrics(const ConfigGraph& g) {
  GraphMetrics m;
  const int n = g.n();
  if (n == 0) return m;
  const NodeCentrality c = centrality(g);
  const auto cl = local_clustering(g);
  m.betweenness = std::accumulate(c.betweenness.begin(), c.betweenness.end(), 0.0) / n;
  m.closeness = std::accumulate(c.closeness.begin(), c.closeness.end(), 0.0) / n;
  m.clustering = n < 3 ? 0.0 : std::accumulate(cl.begin(), cl.end(), 0.0) / n;
  m.density = density(g);
  return m;
}

std::string metrics_csv_header() { return "label,n,seed,betweenness,density,clustering,closeness"; }

std::string metrics_csv_row(const std::string& label, int n, std::uint64_t seed,
                            const GraphMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, ",%d,%llu,%.17g,%.17g,%.17g,%.17g", n,
                static_cast<unsigned long long>(seed), m.betweenness, m.density, m.clustering,
                m.closeness);
  return label + buf;
}

}  // namespace epinet
