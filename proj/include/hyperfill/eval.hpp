#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperfill/hypergraph.hpp"
#include "hyperfill/matrix.hpp"
#include "hyperfill/train.hpp"

namespace hyperfill {

// Shared protocol for the downstream classifiers: full-batch Adam on the
// train split, accuracy (or AUROC) on the validation split measured at every
// epoch divisible by eval_every (including epoch 0), the best checkpoint kept
// with ties broken toward the earliest epoch, and the test metric reported
// from that checkpoint.
struct ProbeConfig {
  int epochs = 200;
  double lr = 1e-3;
  double weight_decay = 1e-6;
  int eval_every = 10;
};

struct ProbeResult {
  double test_accuracy = 0.0;
  double best_valid_accuracy = 0.0;
  int best_epoch = 0;
};

// Multinomial logistic regression over frozen input rows.
ProbeResult linear_probe(const Mat& z, const std::vector<int>& labels, const NodeSplit& split,
                         const ProbeConfig& cfg, std::uint64_t seed);

// Joint training of a copy of `start`'s encoder with a fresh affine head on
// top. Encoder dropout stays active during training steps; metrics are always
// computed in inference mode. `start` may be pretrained or freshly
// initialized — it is never modified.
ProbeResult fine_tune(const Mat& x, const Hypergraph& g, const Model& start,
                      const std::vector<int>& labels, const NodeSplit& split,
                      const ProbeConfig& cfg, std::uint64_t seed);

// Fake hyperedges whose sizes follow the empirical size distribution of
// `reference` (sizes larger than num_nodes are redrawn) and whose members are
// uniform without replacement; members come out sorted.
std::vector<Hyperedge> sample_negative_hyperedges(const std::vector<Hyperedge>& reference,
                                                  int count, int num_nodes, std::uint64_t seed);

// Coordinate-wise (max over members) - (min over members) of the member rows.
Eigen::RowVectorXd hyperedge_embedding(const Mat& z, const Hyperedge& edge);

// Rank statistic: probability that a positive outranks a negative, ties
// contributing one half. Throws if either side is empty.
double auroc(const std::vector<double>& positive, const std::vector<double>& negative);

struct EdgeEvalConfig {
  int epochs = 200;
  double lr = 1e-3;
  double weight_decay = 1e-6;
  int eval_every = 10;
  int hidden_dim = 128;
  double dropout = 0.5;
};

struct EdgeEvalResult {
  double test_auroc = 0.0;
  double best_valid_auroc = 0.0;
  int best_epoch = 0;
};

// Hyperedge prediction on frozen embeddings: each split is paired with an
// equal number of size-matched negatives (sampled once from `seed` and kept
// fixed), samples are encoded by max-min pooling, and a two-layer rectifier
// classifier with dropout on the hidden activations is trained to separate
// them. Scores are logit differences; checkpointing follows ProbeConfig's
// protocol with validation AUROC.
EdgeEvalResult hyperedge_prediction(const Mat& z, const Hypergraph& g, const EdgeSplit& split,
                                    const EdgeEvalConfig& cfg, std::uint64_t seed);

// Flat result rows and their CSV/JSON persistence: one CSV row per
// (method, task, seed, split), plus a JSON summary with mean and standard
// deviation per (method, task, metric) group.
struct MetricRow {
  std::string method;
  std::string task;
  std::uint64_t seed = 0;
  std::string split_id;
  std::string metric;
  double value = 0.0;
};

void write_metric_rows(const std::vector<MetricRow>& rows, const std::string& path);
void write_metric_summary(const std::vector<MetricRow>& rows, const std::string& path);

}  // namespace hyperfill
