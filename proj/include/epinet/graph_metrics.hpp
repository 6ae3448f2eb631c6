#pragma once

#include <string>
#include <vector>

#include "epinet/netgen.hpp"

namespace epinet {

// Per-node shortest-path centralities.
// betweenness[v]: pair-dependency sum over unordered pairs, divided by (n-1)(n-2)/2.
// closeness[v]: (r-1)/sum(d) scaled by (r-1)/(n-1), r = nodes reachable from v (itself included).
struct NodeCentrality {
  std::vector<double> betweenness;
  std::vector<double> closeness;
};

struct GraphMetrics {
  double betweenness = 0.0;  // mean normalized betweenness
  double density = 0.0;
  double clustering = 0.0;  // mean local clustering, degree < 2 counts as 0
  double closeness = 0.0;
};

// One BFS per source, single thread.
NodeCentrality centrality_serial(const ConfigGraph& g);
// Sources split into fixed blocks across OpenMP threads; partial sums are
// reduced in block order, so the result does not depend on the thread count.
NodeCentrality centrality(const ConfigGraph& g);

std::vector<double> local_clustering(const ConfigGraph& g);
double density(const ConfigGraph& g);

GraphMetrics graph_metrics(const ConfigGraph& g);

// `label,n,seed,betweenness,density,clustering,closeness`
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& label, int n, std::uint64_t seed,
                            const GraphMetrics& m);

}  // namespace epinet
