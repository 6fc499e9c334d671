#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "hyperfill/theory.hpp"

using namespace hyperfill;
using namespace hyperfill::theory;

TEST_CASE("normal cdf hits reference values") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-13));
  CHECK(normal_cdf(2.0) == doctest::Approx(0.9772498680518208).epsilon(1e-13));
  CHECK(normal_cdf(3.0) == doctest::Approx(0.9986501019683699).epsilon(1e-13));
  CHECK(normal_cdf(-1.5) == doctest::Approx(1.0 - normal_cdf(1.5)).epsilon(1e-14));
  CHECK(normal_cdf(-40.0) >= 0.0);
  CHECK(normal_cdf(40.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(normal_cdf(std::nan("")), std::invalid_argument);
}

TEST_CASE("closed form collapses to single normal terms at affinity one") {
  // only the all-same-class member count survives, so the value is
  // Phi((S-1) * sqrt(d / (4(S-1)))) = Phi(sqrt(d (S-1) / 4))
  CHECK(closed_form_condition_prob(3, 2, 1.0) ==
        doctest::Approx(normal_cdf(1.0)).epsilon(1e-14));
  CHECK(closed_form_condition_prob(2, 2, 1.0) ==
        doctest::Approx(normal_cdf(std::sqrt(0.5))).epsilon(1e-14));
  CHECK(closed_form_condition_prob(5, 7, 1.0) ==
        doctest::Approx(normal_cdf(std::sqrt(7.0))).epsilon(1e-14));
  CHECK(closed_form_condition_prob(3, 2, 0.0) ==
        doctest::Approx(closed_form_condition_prob(3, 2, 1.0)).epsilon(1e-14));
}

TEST_CASE("closed form matches the expanded two-member expression") {
  for (double a : {0.1, 0.3, 0.65, 0.9}) {
    for (int d : {1, 4, 9}) {
      double k = std::sqrt(d / 4.0);
      double expected =
          2.0 * a * (1.0 - a) * normal_cdf(-k) + (a * a + (1.0 - a) * (1.0 - a)) * normal_cdf(k);
      CHECK(closed_form_condition_prob(2, d, a) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("closed form is symmetric, bounded below, and monotone away from one half") {
  for (int S : {2, 4, 7}) {
    for (int d : {2, 5}) {
      double at_half = closed_form_condition_prob(S, d, 0.5);
      CHECK(at_half == doctest::Approx(0.5).epsilon(1e-12));
      double prev = at_half;
      double total_rise = 0.0;
      for (int i = 0; i <= 50; ++i) {
        double a = 0.5 + 0.01 * i;
        if (a > 1.0) a = 1.0;
        double v = closed_form_condition_prob(S, d, a);
        CHECK(v == doctest::Approx(closed_form_condition_prob(S, d, 1.0 - a)).epsilon(1e-12));
        CHECK(v >= 0.5 - 1e-9);
        CHECK(v - prev >= -1e-12);
        total_rise += v - prev;
        prev = v;
      }
      CHECK(total_rise > 1e-3);
    }
  }
  CHECK_THROWS_AS(closed_form_condition_prob(1, 4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_condition_prob(3, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_condition_prob(3, 4, 1.5), std::invalid_argument);
}

TEST_CASE("raw filling probability is a softmax over query-sum scores") {
  Mat x(4, 3);
  x << 0.3, -0.2, 1.1, -0.5, 0.4, 0.2, 0.9, 0.9, -0.3, 0.1, -0.8, 0.6;
  std::vector<int> query = {1, 3};
  Eigen::RowVectorXd s = x.row(1) + x.row(3);

  double total = 0.0;
  for (int node = 0; node < 4; ++node) total += filling_prob_raw(x, node, query);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  double denom = 0.0;
  for (int t = 0; t < 4; ++t) denom += std::exp(x.row(t).dot(s));
  for (int node = 0; node < 4; ++node)
    CHECK(filling_prob_raw(x, node, query) ==
          doctest::Approx(std::exp(x.row(node).dot(s)) / denom).epsilon(1e-12));

  // max-shift keeps huge scores finite
  Mat big = 400.0 * x;
  double p = filling_prob_raw(big, 2, query);
  CHECK(std::isfinite(p));
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);

  CHECK_THROWS_AS(filling_prob_raw(x, 4, query), std::invalid_argument);
  CHECK_THROWS_AS(filling_prob_raw(x, 0, {}), std::invalid_argument);
  CHECK_THROWS_AS(filling_prob_raw(x, 0, {7}), std::invalid_argument);
}

TEST_CASE("representation update takes one scaled step along the query sum") {
  Mat x(5, 2);
  x << 1.0, 0.0, 0.0, 1.0, -1.0, 0.5, 0.25, 0.25, 0.7, -0.3;
  std::vector<int> query = {0, 2, 4};

  Eigen::RowVectorXd same = update_representation(x, 3, query, 0.0);
  CHECK((same.array() == x.row(3).array()).all());

  double gamma = 0.8;
  double f = filling_prob_raw(x, 3, query);
  Eigen::RowVectorXd s = x.row(0) + x.row(2) + x.row(4);
  Eigen::RowVectorXd expected = x.row(3) + gamma * (1.0 - f) * s;
  Eigen::RowVectorXd got = update_representation(x, 3, query, gamma);
  CHECK((got - expected).norm() <= 1e-12 * std::max(1.0, expected.norm()));
  CHECK_THROWS_AS(update_representation(x, 3, query, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(update_representation(x, 9, query, 1.0), std::invalid_argument);
}

TEST_CASE("the two-mean classifier picks the nearer mean and breaks ties low") {
  Eigen::RowVectorXd up = Eigen::RowVectorXd::Constant(4, 0.5);
  Eigen::RowVectorXd down = Eigen::RowVectorXd::Constant(4, -0.5);
  Eigen::RowVectorXd tie = Eigen::RowVectorXd::Zero(4);
  CHECK(gnb_classify(up) == 1);
  CHECK(gnb_classify(down) == 0);
  CHECK(gnb_classify(tie) == 0);
  Eigen::RowVectorXd mixed(2);
  mixed << 3.0, -0.1;  // dominated by the positive coordinate
  CHECK(gnb_classify(mixed) == 1);
}

TEST_CASE("monte carlo condition estimates agree with the closed form") {
  TheoryModel model;
  model.edge_size = 3;
  model.feature_dim = 4;
  model.affinity = 0.8;
  model.per_class = 6;

  McEstimate est = mc_condition_prob(model, 30000, 42);
  CHECK(est.trials == 30000);
  CHECK(est.proposals >= est.trials);
  CHECK(est.stderr_est > 0.0);
  double cf = closed_form_condition_prob(3, 4, 0.8);
  CHECK(std::abs(est.estimate - cf) < 4.0 * est.stderr_est + 1e-6);

  McEstimate again = mc_condition_prob(model, 30000, 42);
  CHECK(again.estimate == est.estimate);
  CHECK(again.proposals == est.proposals);

  // the estimate does not depend on the pool size once edges fit
  TheoryModel wide = model;
  wide.per_class = 40;
  McEstimate est2 = mc_condition_prob(wide, 30000, 7);
  CHECK(std::abs(est2.estimate - cf) < 4.0 * est2.stderr_est + 1e-6);

  McEstimate big = mc_condition_prob(model, 120000, 11);
  CHECK(big.stderr_est < est.stderr_est);  // quadrupled trials shrink the error bar

  TheoryModel tiny = model;
  tiny.per_class = 2;  // cannot seat a same-class triple
  CHECK_THROWS_AS(mc_condition_prob(tiny, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(mc_condition_prob(model, 0, 0), std::invalid_argument);
}

TEST_CASE("monte carlo condition probability covers the degenerate affinities") {
  TheoryModel model;
  model.edge_size = 2;
  model.feature_dim = 2;
  model.per_class = 5;
  for (double a : {0.0, 1.0}) {
    model.affinity = a;
    McEstimate est = mc_condition_prob(model, 20000, 3);
    double cf = closed_form_condition_prob(2, 2, a);
    CHECK(std::abs(est.estimate - cf) < 4.0 * est.stderr_est + 1e-6);
  }
}

TEST_CASE("a zero step size leaves the paired experiment tied") {
  TheoryModel model;
  model.edge_size = 4;
  model.feature_dim = 4;
  model.affinity = 0.9;
  model.gamma = 0.0;
  GainConfig cfg;
  cfg.trials = 2000;
  cfg.seed = 5;

  GainResult r = mc_effectiveness_gain(model, cfg);
  CHECK(r.trials == 2000);
  CHECK(r.n10 == 0);
  CHECK(r.n01 == 0);
  CHECK(r.n11 + r.n10 + r.n01 + r.n00 == r.trials);
  CHECK(r.acc_x == r.acc_z);
  CHECK(r.acc_x == doctest::Approx((r.n11 + r.n10) / 2000.0).epsilon(1e-12));
}

TEST_CASE("without the query-sum condition the raw accuracy is the gaussian baseline") {
  TheoryModel model;
  model.edge_size = 4;
  model.feature_dim = 4;
  model.affinity = 0.9;
  model.gamma = 1.0;
  GainConfig cfg;
  cfg.trials = 20000;
  cfg.enforce_condition = false;
  cfg.seed = 17;

  GainResult r = mc_effectiveness_gain(model, cfg);
  double expected = normal_cdf(std::sqrt(4.0) / 2.0);  // Phi(sqrt(d)/2)
  double sigma = std::sqrt(expected * (1.0 - expected) / 20000.0);
  CHECK(std::abs(r.acc_x - expected) < 4.0 * sigma);
}

TEST_CASE("the representation update helps under the enforced condition") {
  TheoryModel model;
  model.edge_size = 4;
  model.feature_dim = 4;
  model.affinity = 0.9;
  model.gamma = 1.0;
  GainConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 23;

  GainResult r = mc_effectiveness_gain(model, cfg);
  CHECK(r.acc_z > r.acc_x);
  CHECK(r.acc_z - r.acc_x == doctest::Approx((r.n01 - r.n10) / 20000.0).epsilon(1e-12));

  GainResult again = mc_effectiveness_gain(model, cfg);
  CHECK(again.acc_x == r.acc_x);
  CHECK(again.acc_z == r.acc_z);

  GainConfig bad = cfg;
  bad.universe = 3;
  CHECK_THROWS_AS(mc_effectiveness_gain(model, bad), std::invalid_argument);
  bad.universe = 2;  // even but smaller than the edge
  CHECK_THROWS_AS(mc_effectiveness_gain(model, bad), std::invalid_argument);
}

TEST_CASE("bootstrap intervals behave on degenerate and separated counts") {
  GainResult tied;
  tied.trials = 1000;
  tied.n11 = 600;
  tied.n00 = 400;
  BootstrapInterval flat = bootstrap_gain_interval(tied, 500, 0.95, 1);
  CHECK(flat.lo == 0.0);
  CHECK(flat.hi == 0.0);
  CHECK(flat.mean_diff == 0.0);

  GainResult onesided;
  onesided.trials = 100;
  onesided.n01 = 100;
  BootstrapInterval unit = bootstrap_gain_interval(onesided, 500, 0.95, 2);
  CHECK(unit.lo == 1.0);
  CHECK(unit.hi == 1.0);
  CHECK(unit.mean_diff == 1.0);

  GainResult mixed;
  mixed.trials = 1000;
  mixed.n11 = 500;
  mixed.n10 = 100;
  mixed.n01 = 200;
  mixed.n00 = 200;
  BootstrapInterval ci = bootstrap_gain_interval(mixed, 2000, 0.95, 3);
  CHECK(ci.mean_diff == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(ci.lo <= ci.hi);
  CHECK(ci.lo > 0.0);  // the gap is ~6 sigma wide, the interval excludes zero
  CHECK(ci.lo < 0.1);
  CHECK(ci.hi > 0.1);

  BootstrapInterval same = bootstrap_gain_interval(mixed, 2000, 0.95, 3);
  CHECK(same.lo == ci.lo);
  CHECK(same.hi == ci.hi);

  CHECK_THROWS_AS(bootstrap_gain_interval(mixed, 0, 0.95, 0), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_gain_interval(mixed, 10, 1.0, 0), std::invalid_argument);
  GainResult broken = mixed;
  broken.trials = 999;
  CHECK_THROWS_AS(bootstrap_gain_interval(broken, 10, 0.95, 0), std::invalid_argument);
}

TEST_CASE("the completion witness solves a single hyperedge exactly") {
  Hypergraph g;
  g.num_nodes = 3;
  g.edges = {{0, 1}};
  ReasonableSolution sol = reasonable_solution(g);

  REQUIRE(sol.queries.size() == 2);
  CHECK(sol.queries[0] == std::vector<int>{1});  // from holding out node 0
  CHECK(sol.queries[1] == std::vector<int>{0});
  REQUIRE(sol.support.size() == 2);
  CHECK(sol.support[0] == std::vector<int>{0});
  CHECK(sol.support[1] == std::vector<int>{1});

  REQUIRE(sol.b.rows() == 3);
  REQUIRE(sol.b.cols() == 2);
  CHECK(sol.b(0, 0) == 1.0);
  CHECK(sol.b(1, 1) == 1.0);
  CHECK(sol.b.sum() == 2.0);
  CHECK(sol.z.rows() == 3);
  CHECK(sol.q.rows() == 2);
  CHECK(sol.z.cols() == sol.q.cols());
  CHECK(sol.margin >= 1.0 - 1e-6);
  CHECK(sol.reconstruction_error <= 1e-9);
}

TEST_CASE("duplicate query subsets collapse and collect their full support") {
  Hypergraph g;
  g.num_nodes = 4;
  g.edges = {{0, 1, 2}, {0, 1, 3}};
  ReasonableSolution sol = reasonable_solution(g);

  REQUIRE(sol.queries.size() == 5);  // {1,2},{0,2},{0,1},{1,3},{0,3}
  auto it = std::find(sol.queries.begin(), sol.queries.end(), std::vector<int>{0, 1});
  REQUIRE(it != sol.queries.end());
  size_t j = static_cast<size_t>(it - sol.queries.begin());
  CHECK(sol.support[j] == std::vector<int>{2, 3});
  CHECK(sol.margin >= 1.0 - 1e-6);
  CHECK(sol.reconstruction_error <= 1e-9);
}

TEST_CASE("the completion witness separates random small hypergraphs") {
  Rng rng(99);
  for (int round = 0; round < 30; ++round) {
    Hypergraph g;
    g.num_nodes = 4 + uniform_index(rng, 7);
    int m = 1 + uniform_index(rng, 6);
    for (int j = 0; j < m; ++j) {
      int size = 2 + uniform_index(rng, std::min(3, g.num_nodes - 1));
      g.edges.push_back(sample_without_replacement(rng, g.num_nodes, size));
    }
    ReasonableSolution sol = reasonable_solution(g);
    CHECK(sol.margin >= 1.0 - 1e-6);
    CHECK(sol.reconstruction_error <= 1e-9);

    // brute-force the support definition
    std::set<std::vector<int>> edge_set;
    for (auto e : g.edges) {
      std::sort(e.begin(), e.end());
      edge_set.insert(e);
    }
    for (size_t j = 0; j < sol.queries.size(); ++j) {
      std::vector<int> expected;
      for (int v = 0; v < g.num_nodes; ++v) {
        if (std::find(sol.queries[j].begin(), sol.queries[j].end(), v) != sol.queries[j].end())
          continue;
        std::vector<int> candidate = sol.queries[j];
        candidate.push_back(v);
        std::sort(candidate.begin(), candidate.end());
        if (edge_set.count(candidate)) expected.push_back(v);
      }
      CHECK(sol.support[j] == expected);
      for (int v : sol.support[j]) CHECK(sol.b(v, static_cast<long>(j)) == 1.0);
    }
  }

  Hypergraph empty;
  empty.num_nodes = 3;
  empty.edges = {{2}};
  CHECK_THROWS_AS(reasonable_solution(empty), std::invalid_argument);
}

TEST_CASE("the comparison grid enumerates cells in declaration order") {
  std::vector<int> sizes = {2, 3};
  std::vector<int> dims = {2, 4};
  std::vector<double> affs = {0.5, 0.9};
  auto grid = condition_grid(sizes, dims, affs, 4000, 31, 1);
  REQUIRE(grid.size() == 8);

  size_t idx = 0;
  for (int S : sizes)
    for (int d : dims)
      for (double a : affs) {
        const GridCell& cell = grid[idx++];
        CHECK(cell.edge_size == S);
        CHECK(cell.feature_dim == d);
        CHECK(cell.affinity == a);
        CHECK(cell.closed_form == closed_form_condition_prob(S, d, a));
        CHECK(std::abs(cell.mc_estimate - cell.closed_form) < 5.0 * cell.mc_stderr + 1e-6);
      }
}

TEST_CASE("the comparison grid is independent of the worker count") {
  auto one = condition_grid({2, 3, 4}, {3}, {0.3, 0.7}, 2000, 13, 1);
  auto three = condition_grid({2, 3, 4}, {3}, {0.3, 0.7}, 2000, 13, 3);
  REQUIRE(one.size() == three.size());
  for (size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].mc_estimate == three[i].mc_estimate);
    CHECK(one[i].mc_stderr == three[i].mc_stderr);
  }
}
