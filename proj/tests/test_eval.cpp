#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "hyperfill/eval.hpp"

using namespace hyperfill;

namespace {

Mat one_hot_embedding(const std::vector<int>& labels, double noise_scale, std::uint64_t seed) {
  Rng rng(seed);
  Mat z = Mat::Zero(static_cast<long>(labels.size()), 2);
  for (size_t i = 0; i < labels.size(); ++i) {
    z(static_cast<long>(i), labels[i]) = 1.0;
    z(static_cast<long>(i), 0) += noise_scale * gaussian(rng);
    z(static_cast<long>(i), 1) += noise_scale * gaussian(rng);
  }
  return z;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("the linear probe solves a separable embedding") {
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i % 2);
  Mat z = one_hot_embedding(labels, 0.05, 4);

  NodeSplit split;
  for (int i = 0; i < 30; ++i) {
    if (i < 10)
      split.train.push_back(i);
    else if (i < 16)
      split.valid.push_back(i);
    else
      split.test.push_back(i);
  }

  ProbeConfig cfg;
  cfg.epochs = 100;
  ProbeResult r = linear_probe(z, labels, split, cfg, 7);
  CHECK(r.test_accuracy == 1.0);
  CHECK(r.best_valid_accuracy == 1.0);
  CHECK(r.best_epoch >= 0);
  CHECK(r.best_epoch <= 100);

  ProbeResult again = linear_probe(z, labels, split, cfg, 7);
  CHECK(again.test_accuracy == r.test_accuracy);
  CHECK(again.best_valid_accuracy == r.best_valid_accuracy);
  CHECK(again.best_epoch == r.best_epoch);
}

TEST_CASE("an uninformative embedding collapses to the training majority class") {
  std::vector<int> labels = {0, 0, 0, 0, 0, 0, 0, 1, 1, 1,   // train: 7 zeros, 3 ones
                             0, 0,                            // valid, both majority
                             0, 0, 0, 0, 1, 1};               // test: 4 zeros, 2 ones
  Mat z = Mat::Zero(18, 3);
  NodeSplit split;
  for (int i = 0; i < 10; ++i) split.train.push_back(i);
  split.valid = {10, 11};
  for (int i = 12; i < 18; ++i) split.test.push_back(i);

  ProbeConfig cfg;
  cfg.epochs = 100;
  cfg.lr = 0.05;  // the bias has to cross its random init on its own
  ProbeResult r = linear_probe(z, labels, split, cfg, 3);
  CHECK(r.test_accuracy == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("zero probe epochs report the untrained classifier") {
  std::vector<int> labels = {0, 1, 0, 1, 0, 1};
  Mat z = one_hot_embedding(labels, 0.0, 1);
  NodeSplit split{{0, 1}, {2, 3}, {4, 5}};
  ProbeConfig cfg;
  cfg.epochs = 0;
  ProbeResult r = linear_probe(z, labels, split, cfg, 11);
  CHECK(r.best_epoch == 0);
  CHECK(r.test_accuracy >= 0.0);
  CHECK(r.test_accuracy <= 1.0);
}

TEST_CASE("the probe rejects inconsistent inputs") {
  std::vector<int> labels = {0, 1, 0, 1};
  Mat z = Mat::Zero(4, 2);
  ProbeConfig cfg;
  CHECK_THROWS_AS(linear_probe(z, labels, NodeSplit{{}, {1}, {2}}, cfg, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(linear_probe(z, labels, NodeSplit{{0}, {1}, {9}}, cfg, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(linear_probe(z, {0, 1, 0}, NodeSplit{{0}, {1}, {2}}, cfg, 0),
                  std::invalid_argument);
  ProbeConfig bad = cfg;
  bad.eval_every = 0;
  CHECK_THROWS_AS(linear_probe(z, labels, NodeSplit{{0}, {1}, {2}}, bad, 0),
                  std::invalid_argument);
}

TEST_CASE("fine-tuning reads but never writes the pretrained model") {
  SyntheticSpec spec;
  spec.nodes_per_class = 12;
  spec.feature_dim = 6;
  spec.affinity = 0.9;
  spec.edge_sizes = std::vector<int>(10, 3);
  spec.seed = 2;
  Dataset data = generate_synthetic(spec);

  TrainConfig tc;
  tc.hidden_dim = 8;
  tc.embed_dim = 6;
  tc.warmup_epochs = 0;
  tc.filling_epochs = 5;
  tc.dropout = 0.0;
  tc.seed = 6;
  Model start = train_model(data.features, data.graph, tc);
  Checkpoint before = start.to_checkpoint();

  NodeSplit split = split_nodes_by_ratio(data.labels, 0.4, 0.2, 0.4, 19);
  ProbeConfig cfg;
  cfg.epochs = 100;
  ProbeResult r = fine_tune(data.features, data.graph, start, data.labels, split, cfg, 23);
  CHECK(r.test_accuracy >= 0.5);
  CHECK(std::isfinite(r.best_valid_accuracy));

  Checkpoint after = start.to_checkpoint();
  for (const auto& [name, value] : before.matrices)
    CHECK((after.matrices.at(name).array() == value.array()).all());

  ProbeResult again = fine_tune(data.features, data.graph, start, data.labels, split, cfg, 23);
  CHECK(again.test_accuracy == r.test_accuracy);
  CHECK(again.best_epoch == r.best_epoch);

  ProbeConfig zero = cfg;
  zero.epochs = 0;
  ProbeResult init_only = fine_tune(data.features, data.graph, start, data.labels, split, zero, 23);
  CHECK(init_only.best_epoch == 0);
}

TEST_CASE("negative hyperedges copy reference sizes and draw distinct members") {
  std::vector<Hyperedge> reference = {{0, 1}, {2, 3}, {4, 5, 6}};
  auto negatives = sample_negative_hyperedges(reference, 3000, 12, 5);
  REQUIRE(negatives.size() == 3000);

  int twos = 0;
  for (const auto& e : negatives) {
    REQUIRE((e.size() == 2 || e.size() == 3));
    if (e.size() == 2) ++twos;
    std::set<int> uniq(e.begin(), e.end());
    CHECK(uniq.size() == e.size());
    for (int v : e) {
      CHECK(v >= 0);
      CHECK(v < 12);
    }
  }
  double frac = twos / 3000.0;
  double sigma = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / 3000.0);
  CHECK(std::abs(frac - 2.0 / 3.0) < 4.0 * sigma);

  auto again = sample_negative_hyperedges(reference, 50, 12, 5);
  auto third = sample_negative_hyperedges(reference, 50, 12, 5);
  CHECK(again == third);
  CHECK(sample_negative_hyperedges(reference, 0, 12, 5).empty());
  CHECK_THROWS(sample_negative_hyperedges({{0, 1, 2, 3, 4}}, 1, 3, 0));
  CHECK_THROWS(sample_negative_hyperedges({}, 1, 3, 0));
}

TEST_CASE("hyperedge embeddings are coordinate ranges") {
  Mat z(4, 2);
  z << 1.0, 0.0, 0.0, 2.0, 0.5, 0.5, -3.0, 9.0;

  Eigen::RowVectorXd e = hyperedge_embedding(z, {0, 1, 2});
  CHECK(e(0) == 1.0);
  CHECK(e(1) == 2.0);

  Eigen::RowVectorXd single = hyperedge_embedding(z, {3});
  CHECK(single.norm() == 0.0);

  // member order cannot matter
  Eigen::RowVectorXd shuffled = hyperedge_embedding(z, {2, 0, 1});
  CHECK((shuffled.array() == e.array()).all());

  // a common translation of all rows cancels exactly
  Mat shifted = z;
  shifted.rowwise() += Eigen::RowVector2d(7.5, -2.25);
  Eigen::RowVectorXd same = hyperedge_embedding(shifted, {0, 1, 2});
  CHECK((same.array() == e.array()).all());

  CHECK_THROWS_AS(hyperedge_embedding(z, {}), std::invalid_argument);
  CHECK_THROWS_AS(hyperedge_embedding(z, {4}), std::invalid_argument);
}

TEST_CASE("auroc implements the rank statistic with tie averaging") {
  CHECK(auroc({3.0, 1.0}, {2.0, 0.0}) == 0.75);
  CHECK(auroc({1.0, 1.0}, {1.0, 0.0}) == 0.75);
  CHECK(auroc({5.0, 6.0}, {1.0, 2.0}) == 1.0);
  CHECK(auroc({1.0, 2.0}, {5.0, 6.0}) == 0.0);
  CHECK(auroc({2.0, 2.0, 2.0}, {2.0, 2.0}) == 0.5);

  // invariant under strictly increasing transforms
  std::vector<double> pos = {0.4, 1.3, -0.2, 0.9}, neg = {0.1, -0.5, 0.6};
  auto warp = [](std::vector<double> v) {
    for (double& x : v) x = std::exp(3.0 * x + 1.0);
    return v;
  };
  CHECK(auroc(warp(pos), warp(neg)) == auroc(pos, neg));

  CHECK_THROWS_AS(auroc({}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(auroc({1.0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(auroc({std::nan("")}, {1.0}), std::invalid_argument);
}

TEST_CASE("negating every score reflects auroc exactly on power-of-two designs") {
  Rng rng(77);
  std::vector<double> pos(32), neg(32);
  for (double& v : pos) v = gaussian(rng, 0.3);
  for (double& v : neg) v = gaussian(rng, -0.3);

  auto negate = [](std::vector<double> v) {
    for (double& x : v) x = -x;
    return v;
  };
  // 32 * 32 pairs: the rank sum reverses exactly and the division is by 2^10
  CHECK(auroc(negate(pos), negate(neg)) == 1.0 - auroc(pos, neg));
}

TEST_CASE("hyperedge prediction separates clustered from scattered groups") {
  const int n = 24;
  Rng rng(15);
  Mat z(n, 4);
  for (int i = 0; i < n; ++i) {
    double center = (i < n / 2) ? 3.0 : -3.0;
    for (int c = 0; c < 4; ++c) z(i, c) = center + 0.1 * gaussian(rng);
  }

  Hypergraph g;
  g.num_nodes = n;
  for (int t = 0; t < 30; ++t) {  // tight groups drawn inside one cluster
    int base = (t % 2) * (n / 2);
    std::vector<int> e = sample_without_replacement(rng, n / 2, 3);
    for (int& v : e) v += base;
    std::sort(e.begin(), e.end());
    g.edges.push_back(e);
  }

  EdgeSplit split = split_hyperedges(static_cast<int>(g.edges.size()), 0.6, 0.2, 0.2, 9);
  EdgeEvalConfig cfg;
  cfg.epochs = 60;
  cfg.hidden_dim = 16;
  cfg.dropout = 0.0;
  EdgeEvalResult r = hyperedge_prediction(z, g, split, cfg, 33);
  CHECK(r.test_auroc > 0.7);
  CHECK(r.best_valid_auroc >= 0.5);
  CHECK(r.best_epoch >= 0);

  EdgeEvalResult again = hyperedge_prediction(z, g, split, cfg, 33);
  CHECK(again.test_auroc == r.test_auroc);
  CHECK(again.best_epoch == r.best_epoch);
}

TEST_CASE("metric tables and summaries serialize cleanly") {
  std::vector<MetricRow> rows = {
      {"probe", "node", 0, "s0", "accuracy", 0.75},
      {"probe", "node", 1, "s1", "accuracy", 0.875},
      {"probe", "node", 2, "s2", "accuracy", 1.0},
      {"baseline", "node", 0, "s0", "accuracy", 0.5},
  };
  const std::string csv_path = "metrics_test.csv";
  const std::string json_path = "summary_test.json";
  write_metric_rows(rows, csv_path);
  write_metric_summary(rows, json_path);

  std::string csv = slurp(csv_path);
  CHECK(csv.rfind("method,task,seed,split_id,metric,value\n", 0) == 0);
  CHECK(csv.find("probe,node,1,s1,accuracy,0.875") != std::string::npos);

  nlohmann::json summary = nlohmann::json::parse(slurp(json_path));
  REQUIRE(summary.is_array());
  REQUIRE(summary.size() == 2);
  bool saw_probe = false, saw_baseline = false;
  for (const auto& entry : summary) {
    if (entry["method"] == "probe") {
      saw_probe = true;
      CHECK(entry["count"] == 3);
      CHECK(entry["mean"].get<double>() == doctest::Approx(0.875).epsilon(1e-12));
      CHECK(entry["std"].get<double>() == doctest::Approx(0.125).epsilon(1e-12));
    }
    if (entry["method"] == "baseline") {
      saw_baseline = true;
      CHECK(entry["count"] == 1);
      CHECK(entry["std"].get<double>() == 0.0);
    }
  }
  CHECK(saw_probe);
  CHECK(saw_baseline);
  std::remove(csv_path.c_str());
  std::remove(json_path.c_str());
}
