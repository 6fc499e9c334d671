#pragma once

#include <cstdint>
#include <vector>

#include "hyperfill/hypergraph.hpp"
#include "hyperfill/matrix.hpp"

namespace hyperfill::theory {

using hyperfill::Hypergraph;
using hyperfill::Mat;

// Standard normal CDF, absolute error below 1e-12.
double normal_cdf(double t);

// Two-class Gaussian model shared with the synthetic generator: per-class
// means +0.5 / -0.5 per coordinate, identity covariance, per-hyperedge latent
// class fair coin, class-1 member count ~ Binomial(S, a^c (1-a)^(1-c)).
struct TheoryModel {
  int per_class = 0;     // nodes available per class when sampling hyperedges
  int feature_dim = 0;   // d
  double affinity = 0.5; // a
  int edge_size = 0;     // S
  double gamma = 1.0;    // representation update step size

  void validate() const;
};

// Softmax match probability of node i for query subset q under raw features:
// exp(x_i . s) / sum_t exp(x_t . s) with s the query feature sum, max-shifted.
double filling_prob_raw(const Mat& x, int node, const std::vector<int>& query);

// One gradient step on the negative log match probability of (node, query):
// z = x_node + gamma * (1 - f) * s. gamma == 0 returns x_node bit-exactly.
Eigen::RowVectorXd update_representation(const Mat& x, int node, const std::vector<int>& query,
                                         double gamma);

// Equal-prior two-class Gaussian decision: class with the nearer mean wins,
// exact ties resolve to class 0.
int gnb_classify(const Eigen::RowVectorXd& x);

// Probability that the query feature sum of a random hyperedge containing a
// fixed class-1 node has positive coordinate total, in closed form:
// (1/S) * sum_s C(S,s) * s * (a^s(1-a)^(S-s) + (1-a)^s a^(S-s))
//       * Phi((2s - S - 1) * sqrt(d / (4(S-1)))).
double closed_form_condition_prob(int S, int d, double affinity);

struct McEstimate {
  double estimate = 0.0;
  double stderr_est = 0.0;
  long trials = 0;
  long proposals = 0;  // draws before rejection filtering
};

// Monte Carlo counterpart of the closed form: rejection-sample hyperedges
// until they contain the fixed class-1 node, draw member features, and count
// how often the query sum points toward the class-1 mean.
McEstimate mc_condition_prob(const TheoryModel& model, long trials, std::uint64_t seed);

struct GainConfig {
  int universe = 20;  // node count of the sampled feature universe (2 classes)
  long trials = 0;
  bool enforce_condition = true;
  std::uint64_t seed = 0;
};

struct GainResult {
  double acc_x = 0.0;  // Gaussian-classifier accuracy on raw features
  double acc_z = 0.0;  // accuracy after one representation update
  long trials = 0;
  // Paired outcome counts: first index = raw correct?, second = updated correct?
  long n11 = 0, n10 = 0, n01 = 0, n00 = 0;
};

// Paired accuracy experiment: alternate a fixed class-1 and class-0 missing
// node across trials, rejection-sample a hyperedge containing it whose query
// feature sum satisfies the class-signed condition, then classify the raw and
// the updated representation of the missing node.
GainResult mc_effectiveness_gain(const TheoryModel& model, const GainConfig& cfg);

struct BootstrapInterval {
  double lo = 0.0, hi = 0.0;
  double mean_diff = 0.0;
};

// Percentile bootstrap for acc_z - acc_x from the paired outcome counts,
// resampled as a multinomial via sequential binomial conditioning.
BootstrapInterval bootstrap_gain_interval(const GainResult& result, int resamples, double level,
                                          std::uint64_t seed);

// SVD witness that every observed hyperedge can be completed with margin:
// queries are the distinct (edge minus one member) subsets; B marks which
// nodes complete which query into an observed edge; Z and Q factor B so that
// z_i . q_j recovers B exactly up to floating error.
struct ReasonableSolution {
  std::vector<std::vector<int>> queries;   // sorted node-id lists
  std::vector<std::vector<int>> support;   // per query: nodes completing it
  Mat b;                                    // |V| x |queries| 0/1 matrix
  Mat z;                                    // |V| x r
  Mat q;                                    // |queries| x r
  double margin = 0.0;                      // min over queries of the separation
  double reconstruction_error = 0.0;        // Frobenius norm of Z Q^T - B
};

ReasonableSolution reasonable_solution(const Hypergraph& g);

struct GridCell {
  int edge_size;
  int feature_dim;
  double affinity;
  double closed_form;
  double mc_estimate;
  double mc_stderr;
};

// Full comparison grid; each cell gets its own derived seed, so the result is
// independent of the number of worker threads.
std::vector<GridCell> condition_grid(const std::vector<int>& sizes, const std::vector<int>& dims,
                                     const std::vector<double>& affinities, long trials,
                                     std::uint64_t seed, int threads = 1);

}  // namespace hyperfill::theory
