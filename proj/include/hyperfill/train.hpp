#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperfill/adam.hpp"
#include "hyperfill/checkpoint.hpp"
#include "hyperfill/encoder.hpp"
#include "hyperfill/hypergraph.hpp"
#include "hyperfill/tape.hpp"

namespace hyperfill {

// One self-supervision unit: a hyperedge split into a held-out node and the
// remaining query subset.
struct FillingInstance {
  int missing_node;
  std::vector<int> query;
  int edge_index;
};

// Every hyperedge of size >= 2 yields one instance per member; singletons
// yield none.
std::vector<FillingInstance> enumerate_instances(const std::vector<Hyperedge>& edges);

// Instances regrouped for batched tensor ops: queries[i] are the member rows
// of instance i and targets[i] is its held-out node.
struct InstanceBatch {
  Groups queries;
  std::vector<int> targets;
};
InstanceBatch instance_batch(const std::vector<FillingInstance>& instances);

// Feature masking: X' = X .* M with M ~ Bernoulli(1 - p_v) per entry (plain
// zeroing, no rescale).
Mat augment_features(const Mat& x, double p_v, Rng& rng);
Mat augment_features(const Mat& x, double p_v, std::uint64_t seed);

// Keep a uniformly random subset of ceil(|E| * (1 - p_e)) hyperedges, in
// their original order.
std::vector<Hyperedge> augment_hyperedges(const std::vector<Hyperedge>& edges, double p_e,
                                          Rng& rng);
std::vector<Hyperedge> augment_hyperedges(const std::vector<Hyperedge>& edges, double p_e,
                                          std::uint64_t seed);

// Softmax cross-entropy over cosine similarities: every instance scores its
// query against all node rows, and the held-out node is the target class.
// Returns the negative log-likelihood summed over instances.
diff::Var filling_loss(diff::Tape& tape, diff::Var h, diff::Var qproj,
                       const std::vector<int>& targets, double temperature = 1.0);

struct TrainConfig {
  double p_v = 0.0;  // feature mask rate (stage 2)
  double p_e = 0.0;  // hyperedge drop rate (stage 2)
  int filling_epochs = 0;

  int warmup_epochs = 300;
  double warmup_mask_rate = 0.5;  // fraction of nodes hidden per warm-up epoch
  double warmup_edge_drop = 0.2;

  double lr = 1e-3;
  double weight_decay = 1e-6;
  double temperature = 1.0;      // divides cosines before the softmax
  bool refresh_augmentation = true;  // fresh (X', E') every epoch vs once per run
  bool use_heads = true;             // false: loss reads embeddings directly

  int hidden_dim = 128;
  int embed_dim = 128;
  int head_hidden = 0;  // 0 -> embed_dim
  int head_out = 0;     // 0 -> embed_dim
  double dropout = 0.5;

  std::uint64_t seed = 0;

  void validate() const;
};

// Full parameter bundle: encoder plus projection heads for the filling stage,
// and decoder plus the two learnable mask tokens for the warm-up stage.
struct Model {
  TrainConfig config;
  EncoderParams encoder;
  HeadParams node_head, query_head;
  EncoderParams decoder;
  diff::Parameter input_token;  // 1 x d, replaces masked feature rows
  diff::Parameter embed_token;  // 1 x d', replaces masked embedding rows

  static Model init(int in_dim, const TrainConfig& cfg);
  std::vector<diff::Parameter*> warmup_parameters();
  std::vector<diff::Parameter*> filling_parameters();

  Checkpoint to_checkpoint() const;
  static Model from_checkpoint(const Checkpoint& ck);
};

// Warm-up reconstruction loss for a fixed masked-node set: encode features
// with masked rows replaced by the input token, re-mask the embeddings with
// the embedding token, decode, and average (1 - cosine) over the masked rows.
// An empty masked set yields a constant zero loss.
diff::Var warmup_forward(diff::Tape& tape, const Mat& x, const Incidence& inc, Model& model,
                         const std::vector<int>& masked_nodes, Rng* dropout_rng);

// Filling loss on an augmented view; instances always come from the full
// hyperedge set while messages pass over the augmented one.
diff::Var filling_forward(diff::Tape& tape, const Mat& x_aug, const Incidence& inc_aug,
                          Model& model, const InstanceBatch& batch, Rng* dropout_rng);

// One warm-up epoch: sample the masked node set and the hyperedge subset,
// evaluate the reconstruction loss, and take one optimizer step on
// (encoder, decoder, tokens). Returns the loss before the step.
double warmup_epoch(const Mat& x, const Hypergraph& g, Model& model, diff::Adam& opt,
                    std::uint64_t seed);

struct EpochRecord {
  int epoch;
  std::string stage;  // "warmup" or "filling"
  double loss;
};

// Two-stage training: warm-up epochs first (separate optimizer, discarded
// afterwards), then filling epochs on (encoder, heads). Returns the final
// model; identical configs and seeds give bit-identical results.
Model train_model(const Mat& features, const Hypergraph& g, const TrainConfig& cfg,
                  std::vector<EpochRecord>* log = nullptr);

void save_epoch_log_csv(const std::vector<EpochRecord>& log, const std::string& path);

}  // namespace hyperfill
