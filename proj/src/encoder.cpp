#include "hyperfill/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperfill {

Incidence Incidence::build(int num_nodes, const std::vector<Hyperedge>& edges) {
  Incidence inc;
  inc.edge_members.reserve(edges.size());
  inc.node_edges.assign(num_nodes, {});
  for (size_t j = 0; j < edges.size(); ++j) {
    for (int v : edges[j]) {
      if (v < 0 || v >= num_nodes)
        throw std::invalid_argument("incidence: node id " + std::to_string(v) + " out of range");
      inc.node_edges[v].push_back(static_cast<int>(j));
    }
    inc.edge_members.push_back(edges[j]);
  }
  return inc;
}

Mat uniform_init(Rng& rng, long rows, long cols, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

Mat dropout_mask(Rng& rng, long rows, long cols, double rate) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout_mask: rate must lie in [0, 1)");
  if (rate == 0.0) return Mat::Ones(rows, cols);
  double keep_scale = 1.0 / (1.0 - rate);
  Mat m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) m(r, c) = uniform_unit(rng) < rate ? 0.0 : keep_scale;
  }
  return m;
}

EncoderParams EncoderParams::init(const EncoderConfig& cfg, std::uint64_t seed,
                                  const std::string& prefix) {
  if (cfg.in_dim < 1 || cfg.hidden_dim < 1 || cfg.out_dim < 1)
    throw std::invalid_argument("encoder: dimensions must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    throw std::invalid_argument("encoder: dropout must lie in [0, 1)");
  Rng rng(seed);
  double bound1 = 1.0 / std::sqrt(static_cast<double>(cfg.in_dim));
  double bound2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
  EncoderParams p;
  p.config = cfg;
  p.w1 = diff::Parameter(prefix + ".layer1.weight", uniform_init(rng, cfg.in_dim, cfg.hidden_dim, bound1));
  p.b1 = diff::Parameter(prefix + ".layer1.bias", uniform_init(rng, 1, cfg.hidden_dim, bound1));
  p.w2 = diff::Parameter(prefix + ".layer2.weight", uniform_init(rng, cfg.hidden_dim, cfg.out_dim, bound2));
  p.b2 = diff::Parameter(prefix + ".layer2.bias", uniform_init(rng, 1, cfg.out_dim, bound2));
  return p;
}

std::vector<diff::Parameter*> EncoderParams::parameters() { return {&w1, &b1, &w2, &b2}; }

diff::Var encode(diff::Tape& tape, diff::Var x, const Incidence& inc, EncoderParams& params,
                 Rng* dropout_rng) {
  if (tape.value(x).cols() != params.config.in_dim)
    throw std::invalid_argument("encode: feature dimension != encoder input dimension");
  if (tape.value(x).rows() != static_cast<long>(inc.node_edges.size()))
    throw std::invalid_argument("encode: feature rows != incidence node count");

  diff::Var w1 = tape.param(params.w1);
  diff::Var b1 = tape.param(params.b1);
  diff::Var w2 = tape.param(params.w2);
  diff::Var b2 = tape.param(params.b2);

  diff::Var h = x;
  for (int layer = 0; layer < 2; ++layer) {
    if (dropout_rng && params.config.dropout > 0.0) {
      h = tape.apply_mask(h, dropout_mask(*dropout_rng, tape.value(h).rows(),
                                          tape.value(h).cols(), params.config.dropout));
    }
    diff::Var edge_emb = tape.segment_mean(h, inc.edge_members);
    diff::Var node_agg = tape.segment_mean(edge_emb, inc.node_edges);
    if (layer == 0) {
      h = tape.rectify(tape.add_bias(tape.matmul(node_agg, w1), b1));
    } else {
      h = tape.add_bias(tape.matmul(node_agg, w2), b2);
    }
  }
  return h;
}

Mat embed_nodes(const Mat& features, const Hypergraph& g, EncoderParams& params) {
  diff::Tape tape;
  diff::Var x = tape.constant(features);
  diff::Var z = encode(tape, x, Incidence::build(g), params, nullptr);
  return tape.value(z);
}

HeadParams HeadParams::init(const HeadConfig& cfg, std::uint64_t seed, const std::string& prefix) {
  if (cfg.in_dim < 1 || cfg.hidden_dim < 1 || cfg.out_dim < 1)
    throw std::invalid_argument("head: dimensions must be positive");
  Rng rng(seed);
  double bound1 = 1.0 / std::sqrt(static_cast<double>(cfg.in_dim));
  double bound2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
  HeadParams p;
  p.config = cfg;
  p.w1 = diff::Parameter(prefix + ".layer1.weight", uniform_init(rng, cfg.in_dim, cfg.hidden_dim, bound1));
  p.b1 = diff::Parameter(prefix + ".layer1.bias", uniform_init(rng, 1, cfg.hidden_dim, bound1));
  p.w2 = diff::Parameter(prefix + ".layer2.weight", uniform_init(rng, cfg.hidden_dim, cfg.out_dim, bound2));
  p.b2 = diff::Parameter(prefix + ".layer2.bias", uniform_init(rng, 1, cfg.out_dim, bound2));
  return p;
}

std::vector<diff::Parameter*> HeadParams::parameters() { return {&w1, &b1, &w2, &b2}; }

diff::Var mlp2(diff::Tape& tape, diff::Var x, HeadParams& params) {
  if (tape.value(x).cols() != params.config.in_dim)
    throw std::invalid_argument("mlp2: input dimension mismatch");
  diff::Var w1 = tape.param(params.w1);
  diff::Var b1 = tape.param(params.b1);
  diff::Var w2 = tape.param(params.w2);
  diff::Var b2 = tape.param(params.b2);
  diff::Var h = tape.rectify(tape.add_bias(tape.matmul(x, w1), b1));
  return tape.add_bias(tape.matmul(h, w2), b2);
}

diff::Var project_queries(diff::Tape& tape, diff::Var z, const Groups& queries,
                          HeadParams& params) {
  for (size_t i = 0; i < queries.size(); ++i) {
    if (queries[i].empty())
      throw std::invalid_argument("project_queries: empty query subset at instance " +
                                  std::to_string(i));
  }
  return mlp2(tape, tape.segment_sum(z, queries), params);
}

}  // namespace hyperfill
