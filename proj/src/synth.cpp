#include "gadnr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gadnr/errors.hpp"
#include "gadnr/kernels.hpp"
#include "gadnr/rng.hpp"

namespace gadnr {

AttributedGraph generate_sbm(const std::vector<int>& blocks, double p_in, double p_out,
                             int feature_dim, double feature_shift, std::uint64_t seed) {
  if (blocks.empty()) throw ConfigError("sbm: need at least one block");
  for (int b : blocks) {
    if (b <= 0) throw ConfigError("sbm: block sizes must be positive");
  }
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1)
    throw ConfigError("sbm: probabilities must lie in [0, 1]");
  if (feature_dim < 1) throw ConfigError("sbm: feature dimension must be >= 1");

  Rng rng(derive_seed(seed, seed_role::synth));
  int n = 0;
  std::vector<int> block_of;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    n += blocks[b];
    block_of.insert(block_of.end(), blocks[b], static_cast<int>(b));
  }

  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const double p = block_of[u] == block_of[v] ? p_in : p_out;
      if (p >= 1.0 || (p > 0.0 && rng.uniform() < p)) edges.emplace_back(u, v);
    }

  // Random unit direction shared by all blocks; block b's mean sits at
  // b * feature_shift along it.
  std::vector<double> dir(feature_dim);
  double norm = 0.0;
  for (double& d : dir) {
    d = rng.normal();
    norm += d * d;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) norm = 1.0;
  for (double& d : dir) d /= norm;

  Matrix features(n, feature_dim);
  for (int u = 0; u < n; ++u)
    for (int j = 0; j < feature_dim; ++j)
      features(u, j) = block_of[u] * feature_shift * dir[j] + rng.normal();

  return make_graph(n, std::move(edges), std::move(features),
                    std::vector<int>(static_cast<std::size_t>(n), 0));
}

namespace {

// Sample k target nodes, preferring ones not yet labeled anomalous.
std::vector<int> pick_targets(const AttributedGraph& g, int k, Rng& rng) {
  std::vector<int> unlabeled;
  unlabeled.reserve(g.num_nodes);
  for (int u = 0; u < g.num_nodes; ++u) {
    if (!g.labels || (*g.labels)[u] == 0) unlabeled.push_back(u);
  }
  if (k > static_cast<int>(unlabeled.size()))
    throw DataError("injection: not enough unlabeled nodes (" +
                    std::to_string(unlabeled.size()) + " available, " + std::to_string(k) +
                    " requested)");
  for (int i = 0; i < k; ++i) {
    const int j =
        i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(unlabeled.size() - i)));
    std::swap(unlabeled[i], unlabeled[j]);
  }
  unlabeled.resize(k);
  return unlabeled;
}

std::vector<int> labels_or_zero(const AttributedGraph& g) {
  if (g.labels) return *g.labels;
  return std::vector<int>(static_cast<std::size_t>(g.num_nodes), 0);
}

}  // namespace

AttributedGraph inject_contextual(const AttributedGraph& g, int n, int q_cand,
                                  std::uint64_t seed) {
  if (n < 1 || n > g.num_nodes) throw ConfigError("inject_contextual: n out of range");
  if (q_cand < 1 || q_cand > g.num_nodes - 1)
    throw ConfigError("inject_contextual: q_cand out of range");

  Rng rng(derive_seed(seed, seed_role::inject));
  const std::vector<int> targets = pick_targets(g, n, rng);

  Matrix features = g.features;
  std::vector<int> labels = labels_or_zero(g);
  const int k = g.features.cols;
  std::vector<double> diff(static_cast<std::size_t>(k));

  for (const int u : targets) {
    // Candidate pool: q_cand distinct nodes, excluding the target itself.
    std::set<int> pool;
    while (static_cast<int>(pool.size()) < q_cand) {
      const int v = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(g.num_nodes)));
      if (v != u) pool.insert(v);
    }
    int best = -1;
    double best_dist = -1.0;
    for (const int v : pool) {
      kernels::sub(diff.data(), g.features.row(v), g.features.row(u),
                   static_cast<std::size_t>(k));
      const double d = kernels::dot(diff.data(), diff.data(), static_cast<std::size_t>(k));
      if (d > best_dist) {
        best_dist = d;
        best = v;
      }
    }
    std::copy_n(g.features.row(best), k, features.row(u));
    labels[u] = 1;
  }

  return make_graph(g.num_nodes, g.edges, std::move(features), std::move(labels));
}

AttributedGraph inject_structural(const AttributedGraph& g, int n_cliques, int m,
                                  std::uint64_t seed) {
  if (n_cliques < 1) throw ConfigError("inject_structural: n_cliques must be >= 1");
  if (m < 2) throw ConfigError("inject_structural: clique size must be >= 2");
  if (static_cast<long long>(n_cliques) * m > g.num_nodes)
    throw ConfigError("inject_structural: n_cliques*m exceeds node count");

  Rng rng(derive_seed(seed, seed_role::inject));
  // One draw of n*m distinct nodes keeps the groups disjoint.
  const std::vector<int> members = pick_targets(g, n_cliques * m, rng);

  std::vector<std::pair<int, int>> edges = g.edges;
  std::vector<int> labels = labels_or_zero(g);
  for (int c = 0; c < n_cliques; ++c) {
    for (int i = 0; i < m; ++i) {
      const int u = members[c * m + i];
      labels[u] = 1;
      for (int j = i + 1; j < m; ++j) edges.emplace_back(u, members[c * m + j]);
    }
  }
  // make_graph dedupes against pre-existing edges inside a group.
  return make_graph(g.num_nodes, std::move(edges), g.features, std::move(labels));
}

AttributedGraph inject_joint(const AttributedGraph& g, int n, int m, std::uint64_t seed) {
  if (n < 1 || n > g.num_nodes) throw ConfigError("inject_joint: n out of range");
  if (m < 0 || m > g.num_nodes - 1) throw ConfigError("inject_joint: m out of range");

  Rng rng(derive_seed(seed, seed_role::inject));
  const std::vector<int> targets = pick_targets(g, n, rng);

  // Live adjacency so edges added for one target are never duplicated by a
  // later one.
  std::vector<std::set<int>> adj(static_cast<std::size_t>(g.num_nodes));
  for (auto [u, v] : g.edges) {
    adj[u].insert(v);
    adj[v].insert(u);
  }

  std::vector<std::pair<int, int>> edges = g.edges;
  std::vector<int> labels = labels_or_zero(g);
  for (const int u : targets) {
    labels[u] = 1;
    // Sample distinct non-neighbors; fall back to fewer when the graph is
    // too dense to supply m of them.
    const int available = g.num_nodes - 1 - static_cast<int>(adj[u].size());
    const int want = std::min(m, available);
    int added = 0;
    while (added < want) {
      const int v = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(g.num_nodes)));
      if (v == u || adj[u].count(v)) continue;
      adj[u].insert(v);
      adj[v].insert(u);
      edges.emplace_back(u, v);
      ++added;
    }
  }
  return make_graph(g.num_nodes, std::move(edges), g.features, std::move(labels));
}

AttributedGraph apply_injection(const AttributedGraph& g, const InjectionSpec& spec) {
  if (spec.kind == "contextual") return inject_contextual(g, spec.n, spec.q_cand, spec.seed);
  if (spec.kind == "structural") return inject_structural(g, spec.n, spec.m, spec.seed);
  if (spec.kind == "joint") return inject_joint(g, spec.n, spec.m, spec.seed);
  throw ConfigError("unknown injection kind '" + spec.kind + "'");
}

}  // namespace gadnr
