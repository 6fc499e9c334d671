#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperfill/adam.hpp"
#include "hyperfill/hypergraph.hpp"
#include "hyperfill/tape.hpp"

namespace hyperfill {

// Incidence lists for one fixed hyperedge set: who belongs to each hyperedge,
// and which hyperedges touch each node.
struct Incidence {
  Groups edge_members;  // per hyperedge: member node rows
  Groups node_edges;    // per node: incident hyperedge rows (may be empty)

  static Incidence build(int num_nodes, const std::vector<Hyperedge>& edges);
  static Incidence build(const Hypergraph& g) { return build(g.num_nodes, g.edges); }
};

// Weights sampled uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)], entries
// drawn row-major; biases use the same bound as their layer.
Mat uniform_init(Rng& rng, long rows, long cols, double bound);

// Inverted-dropout mask: entries are 0 with probability `rate`, otherwise
// 1/(1-rate). rate = 0 produces no mask draw at all.
Mat dropout_mask(Rng& rng, long rows, long cols, double rate);

// Two-layer mean-pooling hypergraph convolution. Per layer: each hyperedge
// embedding is the mean of its member rows, each node then averages its
// incident hyperedge embeddings (zero vector if isolated), followed by an
// affine map; a rectifier follows layer 1 only. In training mode the layer
// inputs pass through dropout.
struct EncoderConfig {
  int in_dim = 0;
  int hidden_dim = 128;
  int out_dim = 128;
  double dropout = 0.5;
};

struct EncoderParams {
  EncoderConfig config;
  diff::Parameter w1, b1, w2, b2;

  static EncoderParams init(const EncoderConfig& cfg, std::uint64_t seed,
                            const std::string& prefix = "encoder");
  std::vector<diff::Parameter*> parameters();
};

// One forward pass; `dropout_rng` non-null means training mode.
diff::Var encode(diff::Tape& tape, diff::Var x, const Incidence& inc, EncoderParams& params,
                 Rng* dropout_rng);

// Inference helper: full-graph deterministic embeddings.
Mat embed_nodes(const Mat& features, const Hypergraph& g, EncoderParams& params);

// Two affine layers with a rectifier between, no dropout; used for the node
// and query projection heads.
struct HeadConfig {
  int in_dim = 0;
  int hidden_dim = 0;
  int out_dim = 0;
};

struct HeadParams {
  HeadConfig config;
  diff::Parameter w1, b1, w2, b2;

  static HeadParams init(const HeadConfig& cfg, std::uint64_t seed, const std::string& prefix);
  std::vector<diff::Parameter*> parameters();
};

diff::Var mlp2(diff::Tape& tape, diff::Var x, HeadParams& params);

// Deep-Sets query projection: sum member embeddings per query, then the
// shared two-layer map. Every group must be non-empty.
diff::Var project_queries(diff::Tape& tape, diff::Var z, const Groups& queries,
                          HeadParams& params);

}  // namespace hyperfill
