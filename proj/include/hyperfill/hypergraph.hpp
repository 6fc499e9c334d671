#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hyperfill/matrix.hpp"
#include "hyperfill/rng.hpp"

namespace hyperfill {

// A hyperedge is a duplicate-free list of node ids, kept sorted ascending.
using Hyperedge = std::vector<int>;

struct Hypergraph {
  int num_nodes = 0;
  std::vector<Hyperedge> edges;

  void validate() const;  // throws on empty edges, out-of-range or duplicate ids
};

// A hypergraph plus optional node features and optional per-node class labels.
struct Dataset {
  Hypergraph graph;
  Mat features;             // num_nodes x dim, 0x0 when absent
  std::vector<int> labels;  // empty when absent

  bool has_features() const { return features.size() > 0; }
  bool has_labels() const { return !labels.empty(); }
  void validate() const;
};

// Text format: line 1 "n m d"; then m hyperedge lines of space-separated node
// ids; if d > 0, n feature lines of d reals; then an optional line of n
// integer labels. Lines starting with '#' are comments. LF line endings.
Dataset read_dataset(std::istream& in, const std::string& name = "<stream>");
void write_dataset(const Dataset& ds, std::ostream& out);
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// Two-class synthetic model: 2N nodes, ids 0..N-1 labeled 1 and N..2N-1
// labeled 0; features are unit-covariance Gaussians centered at +0.5 or -0.5
// per coordinate; each hyperedge flips a fair coin for its latent class and
// draws its class-1 member count from Binomial(size, a) with a = affinity for
// class-1 edges and 1 - affinity otherwise; members are then drawn uniformly
// without replacement from each class pool.
struct SyntheticSpec {
  int nodes_per_class = 0;  // N
  int feature_dim = 0;      // d
  double affinity = 0.5;
  std::vector<int> edge_sizes;  // one entry per hyperedge, each in [2, 2N]
  std::uint64_t seed = 0;

  void validate() const;
};

Dataset generate_synthetic(const SyntheticSpec& spec);

// Topology corruption: exactly `iterations` rounds of picking two distinct
// hyperedges uniformly, one member of each uniformly, and exchanging them.
// Exchanges that would duplicate a node inside an edge are skipped (the
// iteration still counts), so every edge keeps its size.
Hypergraph node_swap(const Hypergraph& g, long iterations, std::uint64_t seed);

// Fraction of same-class unordered node pairs among all within-hyperedge
// pairs; each pair counted once per hyperedge containing it.
double pairwise_homophily(const Hypergraph& g, const std::vector<int>& labels);

struct NodeSplit {
  std::vector<int> train, valid, test;
};

// Ratio split: sizes are floor(ratio * n) with the remainder assigned to
// train; the train set is then repaired to contain at least one node of every
// class by exchanging nodes with the test set (sizes preserved when possible).
NodeSplit split_nodes_by_ratio(const std::vector<int>& labels, double train_ratio,
                               double valid_ratio, double test_ratio,
                               std::uint64_t seed);

// Per-class split: exactly `train_per_class` and `valid_per_class` nodes of
// every class go to train/valid; the rest is test.
NodeSplit split_nodes_per_class(const std::vector<int>& labels, int train_per_class,
                                int valid_per_class, std::uint64_t seed);

struct EdgeSplit {
  std::vector<int> train, valid, test;  // indices into Hypergraph::edges
};

EdgeSplit split_hyperedges(int num_edges, double train_ratio, double valid_ratio,
                           double test_ratio, std::uint64_t seed);

}  // namespace hyperfill
