#include "hyperfill/train.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace hyperfill {

std::vector<FillingInstance> enumerate_instances(const std::vector<Hyperedge>& edges) {
  std::vector<FillingInstance> out;
  for (size_t j = 0; j < edges.size(); ++j) {
    const auto& e = edges[j];
    if (e.size() < 2) continue;
    for (size_t i = 0; i < e.size(); ++i) {
      FillingInstance inst;
      inst.missing_node = e[i];
      inst.edge_index = static_cast<int>(j);
      inst.query.reserve(e.size() - 1);
      for (size_t k = 0; k < e.size(); ++k) {
        if (k != i) inst.query.push_back(e[k]);
      }
      out.push_back(std::move(inst));
    }
  }
  return out;
}

InstanceBatch instance_batch(const std::vector<FillingInstance>& instances) {
  InstanceBatch batch;
  batch.queries.reserve(instances.size());
  batch.targets.reserve(instances.size());
  for (const auto& inst : instances) {
    if (inst.query.empty()) throw std::invalid_argument("instance_batch: empty query subset");
    batch.queries.push_back(inst.query);
    batch.targets.push_back(inst.missing_node);
  }
  return batch;
}

Mat augment_features(const Mat& x, double p_v, Rng& rng) {
  if (p_v < 0.0 || p_v > 1.0) throw std::invalid_argument("augment_features: p_v outside [0, 1]");
  Mat out = x;
  for (long r = 0; r < out.rows(); ++r) {
    for (long c = 0; c < out.cols(); ++c) {
      if (uniform_unit(rng) < p_v) out(r, c) = 0.0;
    }
  }
  return out;
}

Mat augment_features(const Mat& x, double p_v, std::uint64_t seed) {
  Rng rng(seed);
  return augment_features(x, p_v, rng);
}

std::vector<Hyperedge> augment_hyperedges(const std::vector<Hyperedge>& edges, double p_e,
                                          Rng& rng) {
  if (p_e < 0.0 || p_e > 1.0) throw std::invalid_argument("augment_hyperedges: p_e outside [0, 1]");
  long m = static_cast<long>(edges.size());
  long keep = static_cast<long>(std::ceil(static_cast<double>(m) * (1.0 - p_e)));
  std::vector<Hyperedge> out;
  out.reserve(keep);
  for (int idx : ordered_subset(rng, static_cast<int>(m), static_cast<int>(keep)))
    out.push_back(edges[idx]);
  return out;
}

std::vector<Hyperedge> augment_hyperedges(const std::vector<Hyperedge>& edges, double p_e,
                                          std::uint64_t seed) {
  Rng rng(seed);
  return augment_hyperedges(edges, p_e, rng);
}

diff::Var filling_loss(diff::Tape& tape, diff::Var h, diff::Var qproj,
                       const std::vector<int>& targets, double temperature) {
  const Mat& hv = tape.value(h);
  const Mat& qv = tape.value(qproj);
  if (hv.cols() != qv.cols()) throw std::invalid_argument("filling_loss: dimension mismatch");
  if (static_cast<long>(targets.size()) != qv.rows())
    throw std::invalid_argument("filling_loss: one target per query row required");
  for (int t : targets) {
    if (t < 0 || t >= hv.rows())
      throw std::invalid_argument("filling_loss: target node out of range");
  }
  if (temperature <= 0.0) throw std::invalid_argument("filling_loss: temperature must be > 0");

  diff::Var hn = tape.row_normalize(h);
  diff::Var qn = tape.row_normalize(qproj);
  diff::Var cos = tape.matmul_nt(qn, hn);  // one row per instance, one column per node
  if (temperature != 1.0) cos = tape.scale(cos, 1.0 / temperature);
  diff::Var ls = tape.log_softmax_rows(cos);
  std::vector<std::pair<int, int>> picks;
  picks.reserve(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) picks.emplace_back(static_cast<int>(i), targets[i]);
  return tape.scale(tape.pick_sum(ls, picks), -1.0);
}

void TrainConfig::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(p_v)) throw std::invalid_argument("train: p_v outside [0, 1]");
  if (!in01(p_e)) throw std::invalid_argument("train: p_e outside [0, 1]");
  if (!in01(warmup_edge_drop)) throw std::invalid_argument("train: warmup_edge_drop outside [0, 1]");
  if (warmup_epochs > 0 && !(warmup_mask_rate > 0.0 && warmup_mask_rate < 1.0))
    throw std::invalid_argument("train: warmup_mask_rate must lie in (0, 1)");
  if (filling_epochs < 0 || warmup_epochs < 0)
    throw std::invalid_argument("train: negative epoch count");
  if (lr <= 0.0) throw std::invalid_argument("train: lr must be positive");
  if (weight_decay < 0.0) throw std::invalid_argument("train: negative weight decay");
  if (temperature <= 0.0) throw std::invalid_argument("train: temperature must be positive");
  if (hidden_dim < 1 || embed_dim < 1) throw std::invalid_argument("train: dimensions must be positive");
  if (head_hidden < 0 || head_out < 0) throw std::invalid_argument("train: negative head dimension");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("train: dropout outside [0, 1)");
}

Model Model::init(int in_dim, const TrainConfig& cfg) {
  cfg.validate();
  if (in_dim < 1) throw std::invalid_argument("model: feature dimension must be positive");

  Model m;
  m.config = cfg;
  int head_hidden = cfg.head_hidden > 0 ? cfg.head_hidden : cfg.embed_dim;
  int head_out = cfg.head_out > 0 ? cfg.head_out : cfg.embed_dim;

  EncoderConfig enc{in_dim, cfg.hidden_dim, cfg.embed_dim, cfg.dropout};
  EncoderConfig dec{cfg.embed_dim, cfg.hidden_dim, in_dim, cfg.dropout};
  HeadConfig head{cfg.embed_dim, head_hidden, head_out};

  m.encoder = EncoderParams::init(enc, derive_seed(cfg.seed, 0), "encoder");
  m.decoder = EncoderParams::init(dec, derive_seed(cfg.seed, 1), "decoder");
  Rng token_rng(derive_seed(cfg.seed, 2));
  m.input_token = diff::Parameter(
      "token.input", uniform_init(token_rng, 1, in_dim, 1.0 / std::sqrt(static_cast<double>(in_dim))));
  m.embed_token = diff::Parameter(
      "token.embed",
      uniform_init(token_rng, 1, cfg.embed_dim, 1.0 / std::sqrt(static_cast<double>(cfg.embed_dim))));
  m.node_head = HeadParams::init(head, derive_seed(cfg.seed, 3), "node_head");
  m.query_head = HeadParams::init(head, derive_seed(cfg.seed, 4), "query_head");
  return m;
}

std::vector<diff::Parameter*> Model::warmup_parameters() {
  std::vector<diff::Parameter*> out = encoder.parameters();
  for (auto* p : decoder.parameters()) out.push_back(p);
  out.push_back(&input_token);
  out.push_back(&embed_token);
  return out;
}

std::vector<diff::Parameter*> Model::filling_parameters() {
  std::vector<diff::Parameter*> out = encoder.parameters();
  if (config.use_heads) {
    for (auto* p : node_head.parameters()) out.push_back(p);
    for (auto* p : query_head.parameters()) out.push_back(p);
  }
  return out;
}

Checkpoint Model::to_checkpoint() const {
  Checkpoint ck;
  ck.meta["kind"] = "model";
  ck.meta["in_dim"] = encoder.config.in_dim;
  ck.meta["hidden_dim"] = config.hidden_dim;
  ck.meta["embed_dim"] = config.embed_dim;
  ck.meta["head_hidden"] = node_head.config.hidden_dim;
  ck.meta["head_out"] = node_head.config.out_dim;
  ck.meta["dropout"] = config.dropout;
  ck.meta["use_heads"] = config.use_heads;
  ck.meta["temperature"] = config.temperature;
  ck.meta["seed"] = config.seed;
  auto copy_all = [&ck](const std::vector<const diff::Parameter*>& ps) {
    for (const auto* p : ps) ck.matrices[p->name] = p->value;
  };
  copy_all({&encoder.w1, &encoder.b1, &encoder.w2, &encoder.b2});
  copy_all({&decoder.w1, &decoder.b1, &decoder.w2, &decoder.b2});
  copy_all({&node_head.w1, &node_head.b1, &node_head.w2, &node_head.b2});
  copy_all({&query_head.w1, &query_head.b1, &query_head.w2, &query_head.b2});
  copy_all({&input_token, &embed_token});
  return ck;
}

Model Model::from_checkpoint(const Checkpoint& ck) {
  TrainConfig cfg;
  cfg.hidden_dim = ck.meta.at("hidden_dim").get<int>();
  cfg.embed_dim = ck.meta.at("embed_dim").get<int>();
  cfg.head_hidden = ck.meta.at("head_hidden").get<int>();
  cfg.head_out = ck.meta.at("head_out").get<int>();
  cfg.dropout = ck.meta.at("dropout").get<double>();
  cfg.use_heads = ck.meta.at("use_heads").get<bool>();
  cfg.temperature = ck.meta.at("temperature").get<double>();
  cfg.seed = ck.meta.value("seed", std::uint64_t{0});
  int in_dim = ck.meta.at("in_dim").get<int>();

  Model m = Model::init(in_dim, cfg);
  for (auto* p : m.warmup_parameters()) p->value = ck.require(p->name);
  for (auto* p : m.node_head.parameters()) p->value = ck.require(p->name);
  for (auto* p : m.query_head.parameters()) p->value = ck.require(p->name);
  for (auto* p : m.warmup_parameters()) {
    if (p->value.rows() != p->grad.rows() || p->value.cols() != p->grad.cols())
      throw std::runtime_error("checkpoint: shape mismatch on '" + p->name + "'");
  }
  return m;
}

diff::Var warmup_forward(diff::Tape& tape, const Mat& x, const Incidence& inc, Model& model,
                         const std::vector<int>& masked_nodes, Rng* dropout_rng) {
  if (masked_nodes.empty()) return tape.constant(Mat::Zero(1, 1));

  diff::Var xc = tape.constant(x);
  diff::Var x_masked = tape.masked_assign(xc, masked_nodes, tape.param(model.input_token));
  diff::Var z = encode(tape, x_masked, inc, model.encoder, dropout_rng);
  diff::Var z_masked = tape.masked_assign(z, masked_nodes, tape.param(model.embed_token));
  diff::Var xhat = encode(tape, z_masked, inc, model.decoder, dropout_rng);

  Mat x_true(static_cast<long>(masked_nodes.size()), x.cols());
  for (size_t i = 0; i < masked_nodes.size(); ++i) x_true.row(i) = x.row(masked_nodes[i]);
  diff::Var cos = tape.cosine_rows(tape.select_rows(xhat, masked_nodes), tape.constant(x_true));
  diff::Var ones = tape.constant(Mat::Ones(static_cast<long>(masked_nodes.size()), 1));
  return tape.scale(tape.sum_all(tape.sub(ones, cos)),
                    1.0 / static_cast<double>(masked_nodes.size()));
}

diff::Var filling_forward(diff::Tape& tape, const Mat& x_aug, const Incidence& inc_aug,
                          Model& model, const InstanceBatch& batch, Rng* dropout_rng) {
  diff::Var z = encode(tape, tape.constant(x_aug), inc_aug, model.encoder, dropout_rng);
  diff::Var h = model.config.use_heads ? mlp2(tape, z, model.node_head) : z;
  diff::Var q = model.config.use_heads
                    ? project_queries(tape, z, batch.queries, model.query_head)
                    : tape.segment_sum(z, batch.queries);
  return filling_loss(tape, h, q, batch.targets, model.config.temperature);
}

double warmup_epoch(const Mat& x, const Hypergraph& g, Model& model, diff::Adam& opt,
                    std::uint64_t seed) {
  const int n = g.num_nodes;
  Rng rng(seed);
  int k = static_cast<int>(std::max(1L, std::lround(model.config.warmup_mask_rate * n)));
  std::vector<int> masked = sample_without_replacement(rng, n, k);
  Incidence inc =
      Incidence::build(n, augment_hyperedges(g.edges, model.config.warmup_edge_drop, rng));

  diff::Tape tape;
  diff::Var loss = warmup_forward(tape, x, inc, model, masked, &rng);
  double value = tape.value(loss)(0, 0);
  if (!std::isfinite(value)) throw std::runtime_error("warmup: non-finite loss");
  opt.zero_grad();
  tape.backward(loss);
  opt.step();
  return value;
}

Model train_model(const Mat& features, const Hypergraph& g, const TrainConfig& cfg,
                  std::vector<EpochRecord>* log) {
  cfg.validate();
  g.validate();
  if (features.rows() != g.num_nodes)
    throw std::invalid_argument("train: feature rows != node count");

  Model model = Model::init(static_cast<int>(features.cols()), cfg);

  if (cfg.warmup_epochs > 0) {
    diff::Adam warm_opt(model.warmup_parameters(), {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
    std::uint64_t warm_seed = derive_seed(cfg.seed, 5);
    for (int epoch = 0; epoch < cfg.warmup_epochs; ++epoch) {
      double loss;
      try {
        loss = warmup_epoch(features, g, model, warm_opt, derive_seed(warm_seed, epoch));
      } catch (const std::exception& e) {
        throw std::runtime_error("warmup epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if (log) log->push_back({epoch, "warmup", loss});
    }
  }

  if (cfg.filling_epochs > 0) {
    InstanceBatch batch = instance_batch(enumerate_instances(g.edges));
    diff::Adam fill_opt(model.filling_parameters(), {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
    std::uint64_t fill_seed = derive_seed(cfg.seed, 6);

    Mat x_aug;
    Incidence inc_aug;
    for (int epoch = 0; epoch < cfg.filling_epochs; ++epoch) {
      Rng rng(derive_seed(fill_seed, epoch));
      if (cfg.refresh_augmentation || epoch == 0) {
        x_aug = augment_features(features, cfg.p_v, rng);
        inc_aug = Incidence::build(g.num_nodes, augment_hyperedges(g.edges, cfg.p_e, rng));
      }
      diff::Tape tape;
      diff::Var loss = filling_forward(tape, x_aug, inc_aug, model, batch, &rng);
      double value = tape.value(loss)(0, 0);
      if (!std::isfinite(value))
        throw std::runtime_error("filling epoch " + std::to_string(epoch) + ": non-finite loss");
      fill_opt.zero_grad();
      tape.backward(loss);
      fill_opt.step();
      if (log) log->push_back({epoch, "filling", value});
    }
  }
  return model;
}

void save_epoch_log_csv(const std::vector<EpochRecord>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "epoch,stage,loss\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& rec : log) out << rec.epoch << "," << rec.stage << "," << rec.loss << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace hyperfill
