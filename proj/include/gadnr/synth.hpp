#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "gadnr/graph.hpp"

namespace gadnr {

// Stochastic-block-model benchmark substrate. Features are unit-variance
// Gaussians with block means separated by feature_shift along one random
// direction. Labels are attached and all zero.
AttributedGraph generate_sbm(const std::vector<int>& blocks, double p_in, double p_out,
                             int feature_dim, double feature_shift, std::uint64_t seed);

// Anomaly injectors. Each is a pure function of (graph, parameters, seed):
// same inputs, same output. Injected nodes get label 1; labels already set
// on the input graph are preserved, and injection targets are drawn from
// currently-unlabeled nodes so chained injections keep counts exact.

// Replace n nodes' features by the farthest (Euclidean) of q_cand sampled
// candidate nodes' features. Edges unchanged.
AttributedGraph inject_contextual(const AttributedGraph& g, int n, int q_cand, std::uint64_t seed);

// Turn n_cliques disjoint groups of m nodes each into cliques. Features
// unchanged; all group members labeled.
AttributedGraph inject_structural(const AttributedGraph& g, int n_cliques, int m,
                                  std::uint64_t seed);

// Connect each of n nodes to m sampled distinct non-neighbors (falling back
// to fewer when the graph is too dense). Features unchanged.
AttributedGraph inject_joint(const AttributedGraph& g, int n, int m, std::uint64_t seed);

struct InjectionSpec {
  std::string kind;  // contextual | structural | joint
  int n = 1;
  int q_cand = 10;
  int m = 2;
  std::uint64_t seed = 0;
};

AttributedGraph apply_injection(const AttributedGraph& g, const InjectionSpec& spec);

}  // namespace gadnr
