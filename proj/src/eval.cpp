#include "hyperfill/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "hyperfill/encoder.hpp"
#include "hyperfill/rng.hpp"

namespace hyperfill {

namespace {

int class_count(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("labels are empty");
  int classes = 0;
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("negative class label");
    classes = std::max(classes, l + 1);
  }
  return classes;
}

void check_split_ids(const std::vector<int>& ids, long limit, const char* what) {
  if (ids.empty()) throw std::invalid_argument(std::string(what) + ": empty split");
  for (int id : ids) {
    if (id < 0 || id >= limit)
      throw std::invalid_argument(std::string(what) + ": split id out of range");
  }
}

double accuracy_on(const Mat& logits, const std::vector<int>& labels,
                   const std::vector<int>& ids) {
  long correct = 0;
  for (int id : ids) {
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c) {
      if (logits(id, c) > logits(id, best)) best = c;
    }
    if (best == labels[id]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

std::vector<std::pair<int, int>> label_picks(const std::vector<int>& ids,
                                             const std::vector<int>& labels) {
  std::vector<std::pair<int, int>> picks(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) picks[i] = {static_cast<int>(i), labels[ids[i]]};
  return picks;
}

Mat with_bias(const Mat& linear, const Mat& bias) {
  return linear + bias.replicate(linear.rows(), 1);
}

void check_probe_config(const ProbeConfig& cfg) {
  if (cfg.epochs < 0) throw std::invalid_argument("probe: negative epoch count");
  if (cfg.eval_every < 1) throw std::invalid_argument("probe: eval_every must be >= 1");
  if (cfg.lr <= 0.0) throw std::invalid_argument("probe: learning rate must be positive");
  if (cfg.weight_decay < 0.0) throw std::invalid_argument("probe: negative weight decay");
}

}  // namespace

ProbeResult linear_probe(const Mat& z, const std::vector<int>& labels, const NodeSplit& split,
                         const ProbeConfig& cfg, std::uint64_t seed) {
  check_probe_config(cfg);
  if (z.rows() != static_cast<long>(labels.size()))
    throw std::invalid_argument("linear_probe: one label per row required");
  if (z.cols() < 1) throw std::invalid_argument("linear_probe: empty feature rows");
  check_split_ids(split.train, z.rows(), "linear_probe train");
  check_split_ids(split.valid, z.rows(), "linear_probe valid");
  check_split_ids(split.test, z.rows(), "linear_probe test");
  const int classes = class_count(labels);

  Rng init_rng(derive_seed(seed, 0));
  const double bound = 1.0 / std::sqrt(static_cast<double>(z.cols()));
  diff::Parameter w("probe.weight", uniform_init(init_rng, z.cols(), classes, bound));
  diff::Parameter b("probe.bias", uniform_init(init_rng, 1, classes, bound));

  diff::AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  diff::Adam opt({&w, &b}, acfg);

  const auto picks = label_picks(split.train, labels);
  const double inv_train = 1.0 / static_cast<double>(split.train.size());

  Mat best_w = w.value, best_b = b.value;
  double best_valid = -1.0;
  int best_epoch = 0;
  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    if (epoch % cfg.eval_every == 0) {
      const Mat logits = with_bias(z * w.value, b.value);
      double va = accuracy_on(logits, labels, split.valid);
      if (va > best_valid) {
        best_valid = va;
        best_w = w.value;
        best_b = b.value;
        best_epoch = epoch;
      }
    }
    if (epoch == cfg.epochs) break;

    diff::Tape tape;
    auto logits = tape.add_bias(tape.matmul(tape.constant(z), tape.param(w)), tape.param(b));
    auto log_probs = tape.log_softmax_rows(tape.select_rows(logits, split.train));
    auto loss = tape.scale(tape.pick_sum(log_probs, picks), -inv_train);
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
  }

  ProbeResult result;
  result.best_valid_accuracy = best_valid;
  result.best_epoch = best_epoch;
  result.test_accuracy = accuracy_on(with_bias(z * best_w, best_b), labels, split.test);
  return result;
}

ProbeResult fine_tune(const Mat& x, const Hypergraph& g, const Model& start,
                      const std::vector<int>& labels, const NodeSplit& split,
                      const ProbeConfig& cfg, std::uint64_t seed) {
  check_probe_config(cfg);
  g.validate();
  if (x.rows() != g.num_nodes)
    throw std::invalid_argument("fine_tune: one feature row per node required");
  if (x.cols() != start.encoder.config.in_dim)
    throw std::invalid_argument("fine_tune: feature width does not match the encoder");
  if (static_cast<long>(labels.size()) != g.num_nodes)
    throw std::invalid_argument("fine_tune: one label per node required");
  check_split_ids(split.train, g.num_nodes, "fine_tune train");
  check_split_ids(split.valid, g.num_nodes, "fine_tune valid");
  check_split_ids(split.test, g.num_nodes, "fine_tune test");
  const int classes = class_count(labels);
  const int d_out = start.encoder.config.out_dim;

  EncoderParams enc = start.encoder;
  Rng init_rng(derive_seed(seed, 0));
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_out));
  diff::Parameter w("finetune.head.weight", uniform_init(init_rng, d_out, classes, bound));
  diff::Parameter b("finetune.head.bias", uniform_init(init_rng, 1, classes, bound));
  Rng dropout_rng(derive_seed(seed, 1));

  diff::AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  std::vector<diff::Parameter*> params = enc.parameters();
  params.push_back(&w);
  params.push_back(&b);
  diff::Adam opt(params, acfg);

  const Incidence inc = Incidence::build(g);
  const auto picks = label_picks(split.train, labels);
  const double inv_train = 1.0 / static_cast<double>(split.train.size());

  EncoderParams best_enc = enc;
  Mat best_w = w.value, best_b = b.value;
  double best_valid = -1.0;
  int best_epoch = 0;
  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    if (epoch % cfg.eval_every == 0) {
      const Mat logits = with_bias(embed_nodes(x, g, enc) * w.value, b.value);
      double va = accuracy_on(logits, labels, split.valid);
      if (va > best_valid) {
        best_valid = va;
        best_enc = enc;
        best_w = w.value;
        best_b = b.value;
        best_epoch = epoch;
      }
    }
    if (epoch == cfg.epochs) break;

    diff::Tape tape;
    auto z = encode(tape, tape.constant(x), inc, enc, &dropout_rng);
    auto logits = tape.add_bias(tape.matmul(z, tape.param(w)), tape.param(b));
    auto log_probs = tape.log_softmax_rows(tape.select_rows(logits, split.train));
    auto loss = tape.scale(tape.pick_sum(log_probs, picks), -inv_train);
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
  }

  ProbeResult result;
  result.best_valid_accuracy = best_valid;
  result.best_epoch = best_epoch;
  const Mat logits = with_bias(embed_nodes(x, g, best_enc) * best_w, best_b);
  result.test_accuracy = accuracy_on(logits, labels, split.test);
  return result;
}

std::vector<Hyperedge> sample_negative_hyperedges(const std::vector<Hyperedge>& reference,
                                                  int count, int num_nodes, std::uint64_t seed) {
  if (reference.empty()) throw std::invalid_argument("negative sampling: empty reference set");
  if (count < 0) throw std::invalid_argument("negative sampling: negative count");
  if (num_nodes < 1) throw std::invalid_argument("negative sampling: no nodes");
  bool feasible = false;
  for (const auto& e : reference) {
    if (static_cast<int>(e.size()) <= num_nodes) {
      feasible = true;
      break;
    }
  }
  if (!feasible)
    throw std::invalid_argument("negative sampling: every reference size exceeds the node count");

  Rng rng(seed);
  std::vector<Hyperedge> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    int size;
    do {
      size = static_cast<int>(reference[uniform_index(rng, static_cast<int>(reference.size()))].size());
    } while (size > num_nodes);
    out.push_back(sample_without_replacement(rng, num_nodes, size));
  }
  return out;
}

Eigen::RowVectorXd hyperedge_embedding(const Mat& z, const Hyperedge& edge) {
  if (edge.empty()) throw std::invalid_argument("hyperedge_embedding: empty hyperedge");
  for (int v : edge) {
    if (v < 0 || v >= z.rows())
      throw std::invalid_argument("hyperedge_embedding: member out of range");
  }
  Eigen::RowVectorXd upper = z.row(edge[0]);
  Eigen::RowVectorXd lower = z.row(edge[0]);
  for (size_t i = 1; i < edge.size(); ++i) {
    upper = upper.cwiseMax(z.row(edge[i]));
    lower = lower.cwiseMin(z.row(edge[i]));
  }
  return upper - lower;
}

double auroc(const std::vector<double>& positive, const std::vector<double>& negative) {
  if (positive.empty() || negative.empty())
    throw std::invalid_argument("auroc: needs scores from both classes");
  std::vector<std::pair<double, bool>> all;
  all.reserve(positive.size() + negative.size());
  for (double s : positive) all.emplace_back(s, true);
  for (double s : negative) all.emplace_back(s, false);
  for (const auto& [s, pos] : all) {
    (void)pos;
    if (!std::isfinite(s)) throw std::invalid_argument("auroc: non-finite score");
  }
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  double positive_rank_sum = 0.0;
  size_t i = 0;
  while (i < all.size()) {
    size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = static_cast<double>(i + 1 + j) / 2.0;  // 1-based ranks i+1..j
    for (size_t k = i; k < j; ++k) {
      if (all[k].second) positive_rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(positive.size());
  const double nn = static_cast<double>(negative.size());
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

EdgeEvalResult hyperedge_prediction(const Mat& z, const Hypergraph& g, const EdgeSplit& split,
                                    const EdgeEvalConfig& cfg, std::uint64_t seed) {
  g.validate();
  if (z.rows() != g.num_nodes)
    throw std::invalid_argument("hyperedge_prediction: one embedding row per node required");
  if (cfg.epochs < 0 || cfg.eval_every < 1 || cfg.hidden_dim < 1)
    throw std::invalid_argument("hyperedge_prediction: bad classifier config");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0))
    throw std::invalid_argument("hyperedge_prediction: dropout outside [0, 1)");
  const long num_edges = static_cast<long>(g.edges.size());
  check_split_ids(split.train, num_edges, "hyperedge_prediction train");
  check_split_ids(split.valid, num_edges, "hyperedge_prediction valid");
  check_split_ids(split.test, num_edges, "hyperedge_prediction test");

  const long d = z.cols();
  auto pool_positives = [&](const std::vector<int>& idx) {
    Mat m(static_cast<long>(idx.size()), d);
    for (size_t i = 0; i < idx.size(); ++i) m.row(i) = hyperedge_embedding(z, g.edges[idx[i]]);
    return m;
  };
  auto pool_edges = [&](const std::vector<Hyperedge>& edges) {
    Mat m(static_cast<long>(edges.size()), d);
    for (size_t i = 0; i < edges.size(); ++i) m.row(i) = hyperedge_embedding(z, edges[i]);
    return m;
  };
  auto edges_of = [&](const std::vector<int>& idx) {
    std::vector<Hyperedge> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(g.edges[i]);
    return out;
  };

  // One balanced negative set per split, fixed for the whole run.
  const auto train_edges = edges_of(split.train);
  const auto valid_edges = edges_of(split.valid);
  const auto test_edges = edges_of(split.test);
  const Mat train_pos = pool_positives(split.train);
  const Mat valid_pos = pool_positives(split.valid);
  const Mat test_pos = pool_positives(split.test);
  const Mat train_neg = pool_edges(sample_negative_hyperedges(
      train_edges, static_cast<int>(train_edges.size()), g.num_nodes, derive_seed(seed, 0)));
  const Mat valid_neg = pool_edges(sample_negative_hyperedges(
      valid_edges, static_cast<int>(valid_edges.size()), g.num_nodes, derive_seed(seed, 1)));
  const Mat test_neg = pool_edges(sample_negative_hyperedges(
      test_edges, static_cast<int>(test_edges.size()), g.num_nodes, derive_seed(seed, 2)));

  Mat train_in(train_pos.rows() + train_neg.rows(), d);
  train_in << train_pos, train_neg;

  Rng init_rng(derive_seed(seed, 3));
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
  diff::Parameter w1("edge.layer1.weight", uniform_init(init_rng, d, cfg.hidden_dim, bound1));
  diff::Parameter b1("edge.layer1.bias", uniform_init(init_rng, 1, cfg.hidden_dim, bound1));
  diff::Parameter w2("edge.layer2.weight", uniform_init(init_rng, cfg.hidden_dim, 2, bound2));
  diff::Parameter b2("edge.layer2.bias", uniform_init(init_rng, 1, 2, bound2));
  Rng dropout_rng(derive_seed(seed, 4));

  diff::AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  diff::Adam opt({&w1, &b1, &w2, &b2}, acfg);

  auto scores_with = [&](const Mat& pos, const Mat& neg, const Mat& vw1, const Mat& vb1,
                         const Mat& vw2, const Mat& vb2) {
    Mat in(pos.rows() + neg.rows(), d);
    in << pos, neg;
    const Mat hidden = with_bias(in * vw1, vb1).cwiseMax(0.0);
    const Mat logits = with_bias(hidden * vw2, vb2);
    std::vector<double> ps(pos.rows()), ns(neg.rows());
    for (long i = 0; i < pos.rows(); ++i) ps[i] = logits(i, 1) - logits(i, 0);
    for (long i = 0; i < neg.rows(); ++i)
      ns[i] = logits(pos.rows() + i, 1) - logits(pos.rows() + i, 0);
    return auroc(ps, ns);
  };

  std::vector<std::pair<int, int>> picks(train_in.rows());
  for (long i = 0; i < train_in.rows(); ++i)
    picks[i] = {static_cast<int>(i), i < train_pos.rows() ? 1 : 0};
  const double inv_train = 1.0 / static_cast<double>(train_in.rows());

  Mat best_w1 = w1.value, best_b1 = b1.value, best_w2 = w2.value, best_b2 = b2.value;
  double best_valid = -1.0;
  int best_epoch = 0;
  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    if (epoch % cfg.eval_every == 0) {
      double va = scores_with(valid_pos, valid_neg, w1.value, b1.value, w2.value, b2.value);
      if (va > best_valid) {
        best_valid = va;
        best_w1 = w1.value;
        best_b1 = b1.value;
        best_w2 = w2.value;
        best_b2 = b2.value;
        best_epoch = epoch;
      }
    }
    if (epoch == cfg.epochs) break;

    diff::Tape tape;
    auto hidden = tape.rectify(
        tape.add_bias(tape.matmul(tape.constant(train_in), tape.param(w1)), tape.param(b1)));
    if (cfg.dropout > 0.0)
      hidden = tape.apply_mask(
          hidden, dropout_mask(dropout_rng, train_in.rows(), cfg.hidden_dim, cfg.dropout));
    auto logits = tape.add_bias(tape.matmul(hidden, tape.param(w2)), tape.param(b2));
    auto loss = tape.scale(tape.pick_sum(tape.log_softmax_rows(logits), picks), -inv_train);
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
  }

  EdgeEvalResult result;
  result.best_valid_auroc = best_valid;
  result.best_epoch = best_epoch;
  result.test_auroc = scores_with(test_pos, test_neg, best_w1, best_b1, best_w2, best_b2);
  return result;
}

void write_metric_rows(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "method,task,seed,split_id,metric,value\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.method << ',' << r.task << ',' << r.seed << ',' << r.split_id << ',' << r.metric
        << ',' << r.value << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

void write_metric_summary(const std::vector<MetricRow>& rows, const std::string& path) {
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.method, r.task, r.metric}].push_back(r.value);

  nlohmann::json summary = nlohmann::json::array();
  for (const auto& [key, values] : groups) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    double stddev = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    summary.push_back({{"method", std::get<0>(key)},
                       {"task", std::get<1>(key)},
                       {"metric", std::get<2>(key)},
                       {"count", values.size()},
                       {"mean", mean},
                       {"std", stddev}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << summary.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace hyperfill
