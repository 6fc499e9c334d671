#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "hyperfill/hypergraph.hpp"

using namespace hyperfill;

namespace {

Dataset tiny_dataset() {
  Dataset ds;
  ds.graph.num_nodes = 3;
  ds.graph.edges = {{0, 1}, {0, 2}};
  ds.features = Mat(3, 2);
  ds.features << 0.5, -1.25, 0.0, 2.0, 1e-3, -7.5;
  ds.labels = {0, 0, 1};
  return ds;
}

std::multiset<int> membership_multiset(const Hypergraph& g) {
  std::multiset<int> out;
  for (const auto& e : g.edges)
    for (int v : e) out.insert(v);
  return out;
}

}  // namespace

TEST_CASE("dataset text round trip") {
  Dataset ds = tiny_dataset();
  std::stringstream buf;
  write_dataset(ds, buf);
  Dataset back = read_dataset(buf, "round-trip");
  CHECK(back.graph.num_nodes == 3);
  REQUIRE(back.graph.edges.size() == 2);
  CHECK(back.graph.edges[0] == Hyperedge{0, 1});
  CHECK(back.graph.edges[1] == Hyperedge{0, 2});
  REQUIRE(back.has_features());
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
}

TEST_CASE("dataset reader accepts comments and blank lines") {
  std::stringstream buf("# header comment\n\n3 1 0\n# edge\n0 2\n");
  Dataset ds = read_dataset(buf);
  CHECK(ds.graph.num_nodes == 3);
  REQUIRE(ds.graph.edges.size() == 1);
  CHECK(ds.graph.edges[0] == Hyperedge{0, 2});
  CHECK_FALSE(ds.has_features());
  CHECK_FALSE(ds.has_labels());
}

TEST_CASE("dataset reader rejects malformed input") {
  auto reject = [](const std::string& text) {
    std::stringstream buf(text);
    CHECK_THROWS(read_dataset(buf));
  };
  reject("2 1\n0 1\n");                      // short header
  reject("2 1 0\n0 5\n");                    // node id out of range
  reject("2 1 0\n0 0\n");                    // duplicate member
  reject("3 2 0\n0 1\n");                    // missing hyperedge line
  reject("2 1 2\n0 1\n0.5 0.25\n");          // missing feature row
  reject("2 1 2\n0 1\n0.5\n0.25 0.5\n");     // short feature row
  reject("2 1 0\n0 1\n0 1\n1 1\n");          // trailing content after labels
  reject("2 1 0\n0 1\nnot-a-label mix\n");   // unparsable label line
}

TEST_CASE("dataset reader names the offending line") {
  std::stringstream buf("2 1 0\n0 7\n");
  try {
    read_dataset(buf, "bad.txt");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& err) {
    const std::string what = err.what();
    CHECK(what.find("bad.txt") != std::string::npos);
    CHECK(what.find("2") != std::string::npos);  // line number of the edge row
  }
}

TEST_CASE("hypergraph validate flags bad structure") {
  Hypergraph g;
  g.num_nodes = 3;
  g.edges = {{0, 1}};
  CHECK_NOTHROW(g.validate());
  g.edges = {{}};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.edges = {{0, 3}};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.edges = {{1, 1}};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.edges = {{2, 0}};  // order is free, only range and duplicates matter
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("synthetic generator shapes and labels") {
  SyntheticSpec spec;
  spec.nodes_per_class = 50;
  spec.feature_dim = 4;
  spec.affinity = 0.9;
  spec.edge_sizes = {3, 3, 4, 2, 5};
  spec.seed = 21;
  Dataset ds = generate_synthetic(spec);
  ds.validate();
  CHECK(ds.graph.num_nodes == 100);
  REQUIRE(ds.graph.edges.size() == 5);
  for (size_t j = 0; j < ds.graph.edges.size(); ++j) {
    CHECK(static_cast<int>(ds.graph.edges[j].size()) == spec.edge_sizes[j]);
    CHECK(std::is_sorted(ds.graph.edges[j].begin(), ds.graph.edges[j].end()));
  }
  for (int v = 0; v < 100; ++v) CHECK(ds.labels[v] == (v < 50 ? 1 : 0));
}

TEST_CASE("synthetic features cluster around the class means") {
  SyntheticSpec spec;
  spec.nodes_per_class = 400;
  spec.feature_dim = 8;
  spec.affinity = 0.5;
  spec.edge_sizes = {2};
  spec.seed = 33;
  Dataset ds = generate_synthetic(spec);
  const double tol = 3.0 / std::sqrt(400.0 * 8.0);  // 3 sigma of the block mean
  CHECK(std::abs(ds.features.topRows(400).mean() - 0.5) < tol);
  CHECK(std::abs(ds.features.bottomRows(400).mean() + 0.5) < tol);
}

TEST_CASE("affinity one makes every hyperedge single-class") {
  SyntheticSpec spec;
  spec.nodes_per_class = 30;
  spec.feature_dim = 2;
  spec.affinity = 1.0;
  spec.edge_sizes = std::vector<int>(40, 4);
  spec.seed = 5;
  Dataset ds = generate_synthetic(spec);
  bool saw_one = false, saw_zero = false;
  for (const auto& e : ds.graph.edges) {
    int ones = 0;
    for (int v : e) ones += ds.labels[v];
    CHECK((ones == 0 || ones == 4));
    saw_one = saw_one || ones == 4;
    saw_zero = saw_zero || ones == 0;
  }
  CHECK(saw_one);
  CHECK(saw_zero);
}

TEST_CASE("infeasible class counts are redrawn") {
  SyntheticSpec spec;
  spec.nodes_per_class = 2;
  spec.feature_dim = 1;
  spec.affinity = 0.5;
  spec.edge_sizes = std::vector<int>(20, 4);  // only 2+2 fits
  spec.seed = 9;
  Dataset ds = generate_synthetic(spec);
  for (const auto& e : ds.graph.edges) {
    int ones = 0;
    for (int v : e) ones += ds.labels[v];
    CHECK(ones == 2);
  }
}

TEST_CASE("synthetic generator is seed-deterministic") {
  SyntheticSpec spec;
  spec.nodes_per_class = 20;
  spec.feature_dim = 3;
  spec.affinity = 0.8;
  spec.edge_sizes = {3, 4, 2};
  spec.seed = 77;
  Dataset a = generate_synthetic(spec);
  Dataset b = generate_synthetic(spec);
  CHECK(a.features == b.features);
  CHECK(a.graph.edges == b.graph.edges);
  spec.seed = 78;
  Dataset c = generate_synthetic(spec);
  CHECK(a.features != c.features);
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec;
  spec.nodes_per_class = 5;
  spec.feature_dim = 2;
  spec.edge_sizes = {2};
  CHECK_NOTHROW(spec.validate());
  spec.edge_sizes = {1};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.edge_sizes = {11};  // above 2N
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.edge_sizes = {2};
  spec.affinity = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("pairwise homophily hand value") {
  Hypergraph g;
  g.num_nodes = 3;
  g.edges = {{0, 1}, {0, 2}};
  CHECK(pairwise_homophily(g, {0, 0, 1}) == doctest::Approx(0.5));
  // counted per containing hyperedge: the same pair twice
  g.edges = {{0, 1}, {0, 1}, {0, 2}};
  CHECK(pairwise_homophily(g, {0, 0, 1}) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(pairwise_homophily(g, {0, 0}), std::invalid_argument);
  Hypergraph singletons;
  singletons.num_nodes = 2;
  singletons.edges = {{0}, {1}};
  CHECK_THROWS_AS(pairwise_homophily(singletons, {0, 1}), std::invalid_argument);
}

TEST_CASE("node swap preserves sizes and the membership multiset") {
  SyntheticSpec spec;
  spec.nodes_per_class = 25;
  spec.feature_dim = 1;
  spec.affinity = 0.9;
  spec.edge_sizes = std::vector<int>(30, 4);
  spec.seed = 2;
  Dataset ds = generate_synthetic(spec);

  Hypergraph swapped = node_swap(ds.graph, 500, 11);
  swapped.validate();
  REQUIRE(swapped.edges.size() == ds.graph.edges.size());
  for (size_t j = 0; j < swapped.edges.size(); ++j)
    CHECK(swapped.edges[j].size() == ds.graph.edges[j].size());
  CHECK(membership_multiset(swapped) == membership_multiset(ds.graph));
  CHECK(swapped.edges != ds.graph.edges);

  // Corruption should push homophily toward the random-mixing level.
  CHECK(pairwise_homophily(swapped, ds.labels) < pairwise_homophily(ds.graph, ds.labels));

  CHECK(node_swap(ds.graph, 0, 11).edges == ds.graph.edges);
  CHECK(node_swap(ds.graph, 500, 11).edges == swapped.edges);

  Hypergraph one_edge;
  one_edge.num_nodes = 2;
  one_edge.edges = {{0, 1}};
  CHECK_THROWS_AS(node_swap(one_edge, 1, 0), std::invalid_argument);
}

TEST_CASE("ratio node split covers, repairs, and stays deterministic") {
  std::vector<int> labels(200);
  for (int i = 0; i < 200; ++i) labels[i] = i < 100 ? 1 : 0;

  NodeSplit split = split_nodes_by_ratio(labels, 0.01, 0.01, 0.98, 42);
  CHECK(split.train.size() == 2);
  CHECK(split.valid.size() == 2);
  CHECK(split.test.size() == 196);

  std::set<int> seen;
  for (const auto* part : {&split.train, &split.valid, &split.test})
    for (int id : *part) CHECK(seen.insert(id).second);
  CHECK(seen.size() == 200);

  std::set<int> train_classes;
  for (int id : split.train) train_classes.insert(labels[id]);
  CHECK(train_classes.size() == 2);  // both classes repaired into train

  NodeSplit again = split_nodes_by_ratio(labels, 0.01, 0.01, 0.98, 42);
  CHECK(again.train == split.train);
  CHECK(again.valid == split.valid);
  CHECK(again.test == split.test);

  CHECK_THROWS_AS(split_nodes_by_ratio(labels, 0.5, 0.6, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_nodes_by_ratio(labels, 0.5, 0.2, 0.2, 1), std::invalid_argument);
}

TEST_CASE("every seed leaves both classes in a tiny train split") {
  std::vector<int> labels(200);
  for (int i = 0; i < 200; ++i) labels[i] = i < 100 ? 1 : 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    NodeSplit split = split_nodes_by_ratio(labels, 0.01, 0.01, 0.98, seed);
    std::set<int> classes;
    for (int id : split.train) classes.insert(labels[id]);
    CHECK(classes.size() == 2);
    CHECK(split.train.size() == 2);
  }
}

TEST_CASE("per-class node split") {
  std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1, 1};
  NodeSplit split = split_nodes_per_class(labels, 2, 1, 3);
  CHECK(split.train.size() == 4);
  CHECK(split.valid.size() == 2);
  CHECK(split.test.size() == 3);
  int train_ones = 0;
  for (int id : split.train) train_ones += labels[id];
  CHECK(train_ones == 2);
  CHECK_THROWS_AS(split_nodes_per_class(labels, 3, 2, 3), std::invalid_argument);
}

TEST_CASE("hyperedge split partitions the index range") {
  EdgeSplit split = split_hyperedges(10, 0.6, 0.2, 0.2, 4);
  CHECK(split.train.size() == 6);
  CHECK(split.valid.size() == 2);
  CHECK(split.test.size() == 2);
  std::set<int> seen;
  for (const auto* part : {&split.train, &split.valid, &split.test})
    for (int id : *part) {
      CHECK(id >= 0);
      CHECK(id < 10);
      CHECK(seen.insert(id).second);
    }
  CHECK(seen.size() == 10);
  CHECK_THROWS_AS(split_hyperedges(4, 0.6, 0.2, 0.2, 4), std::invalid_argument);
}
