#include "hyperfill/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include <Eigen/SVD>

#include "hyperfill/rng.hpp"

namespace hyperfill::theory {

double normal_cdf(double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("normal_cdf: non-finite input");
  return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

void TheoryModel::validate() const {
  if (edge_size < 2) throw std::invalid_argument("theory: edge size must be >= 2");
  if (feature_dim < 1) throw std::invalid_argument("theory: feature dimension must be >= 1");
  if (!(affinity >= 0.0 && affinity <= 1.0))
    throw std::invalid_argument("theory: affinity outside [0, 1]");
  if (gamma < 0.0) throw std::invalid_argument("theory: gamma must be >= 0");
}

double filling_prob_raw(const Mat& x, int node, const std::vector<int>& query) {
  if (node < 0 || node >= x.rows()) throw std::invalid_argument("filling_prob_raw: node out of range");
  if (query.empty()) throw std::invalid_argument("filling_prob_raw: empty query");
  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(x.cols());
  for (int k : query) {
    if (k < 0 || k >= x.rows()) throw std::invalid_argument("filling_prob_raw: query id out of range");
    s += x.row(k);
  }
  Eigen::VectorXd logits = x * s.transpose();
  double mx = logits.maxCoeff();
  double denom = (logits.array() - mx).exp().sum();
  return std::exp(logits(node) - mx) / denom;
}

Eigen::RowVectorXd update_representation(const Mat& x, int node, const std::vector<int>& query,
                                         double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("update_representation: gamma must be >= 0");
  if (node < 0 || node >= x.rows())
    throw std::invalid_argument("update_representation: node out of range");
  if (gamma == 0.0) return x.row(node);
  double f = filling_prob_raw(x, node, query);
  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(x.cols());
  for (int k : query) s += x.row(k);
  return x.row(node) + gamma * (1.0 - f) * s;
}

int gnb_classify(const Eigen::RowVectorXd& x) {
  double toward_1 = -(x.array() - 0.5).matrix().squaredNorm();
  double toward_0 = -(x.array() + 0.5).matrix().squaredNorm();
  return toward_1 > toward_0 ? 1 : 0;
}

double closed_form_condition_prob(int S, int d, double affinity) {
  if (S < 2) throw std::invalid_argument("closed_form: edge size must be >= 2");
  if (d < 1) throw std::invalid_argument("closed_form: dimension must be >= 1");
  if (!(affinity >= 0.0 && affinity <= 1.0))
    throw std::invalid_argument("closed_form: affinity outside [0, 1]");

  double scale = std::sqrt(static_cast<double>(d) / (4.0 * (S - 1)));
  double total = 0.0;
  double binom = 1.0;  // C(S, 0)
  for (int s = 0; s <= S; ++s) {
    if (s > 0) binom = binom * (S - s + 1) / s;
    double weight = std::pow(affinity, s) * std::pow(1.0 - affinity, S - s) +
                    std::pow(1.0 - affinity, s) * std::pow(affinity, S - s);
    total += binom * s * weight * normal_cdf((2.0 * s - S - 1.0) * scale);
  }
  return total / S;
}

McEstimate mc_condition_prob(const TheoryModel& model, long trials, std::uint64_t seed) {
  model.validate();
  if (trials < 1) throw std::invalid_argument("mc_condition_prob: trials must be >= 1");
  const int N = model.per_class > 0 ? model.per_class : model.edge_size;
  if (N < model.edge_size)
    throw std::invalid_argument("mc_condition_prob: per-class pool smaller than edge size");
  const int S = model.edge_size;
  const int d = model.feature_dim;

  Rng rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  long successes = 0, proposals = 0;
  for (long t = 0; t < trials; ++t) {
    while (true) {
      ++proposals;
      double a = uniform_unit(rng) < 0.5 ? model.affinity : 1.0 - model.affinity;
      int s = count_bernoulli(rng, S, a);
      std::vector<int> class1 = sample_without_replacement(rng, N, s);
      std::vector<int> class0 = sample_without_replacement(rng, N, S - s);
      (void)class0;  // identities beyond the class split never matter below
      if (std::find(class1.begin(), class1.end(), 0) == class1.end()) continue;

      // Query = hyperedge minus the fixed class-1 node: s-1 class-1 members
      // and S-s class-0 members; only the coordinate total is needed.
      double total = 0.0;
      for (int i = 0; i < s - 1; ++i) {
        for (int c = 0; c < d; ++c) total += 0.5 + unit(rng);
      }
      for (int i = 0; i < S - s; ++i) {
        for (int c = 0; c < d; ++c) total += -0.5 + unit(rng);
      }
      if (total > 0.0) ++successes;
      break;
    }
  }
  McEstimate est;
  est.trials = trials;
  est.proposals = proposals;
  est.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  est.stderr_est = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(trials));
  return est;
}

GainResult mc_effectiveness_gain(const TheoryModel& model, const GainConfig& cfg) {
  model.validate();
  if (cfg.trials < 1) throw std::invalid_argument("mc_effectiveness_gain: trials must be >= 1");
  if (cfg.universe < 2 || cfg.universe % 2 != 0)
    throw std::invalid_argument("mc_effectiveness_gain: universe must be even and >= 2");
  if (cfg.universe < model.edge_size)
    throw std::invalid_argument("mc_effectiveness_gain: universe smaller than edge size");

  const int S = model.edge_size;
  const int d = model.feature_dim;
  const int half = cfg.universe / 2;  // class-1 ids [0, half), class-0 ids [half, 2*half)

  Rng rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  Mat x(cfg.universe, d);
  GainResult result;
  result.trials = cfg.trials;

  for (long t = 0; t < cfg.trials; ++t) {
    int cls = (t % 2 == 0) ? 1 : 0;
    int missing = (cls == 1) ? 0 : half;

    std::vector<int> query;
    while (true) {
      double a = uniform_unit(rng) < 0.5 ? model.affinity : 1.0 - model.affinity;
      int s = -1;
      for (int attempt = 0; attempt < 100000; ++attempt) {
        int cand = count_bernoulli(rng, S, a);
        if (cand <= half && S - cand <= half) {
          s = cand;
          break;
        }
      }
      if (s < 0) throw std::runtime_error("mc_effectiveness_gain: no feasible member count");
      std::vector<int> members = sample_without_replacement(rng, half, s);
      for (int id : sample_without_replacement(rng, half, S - s)) members.push_back(id + half);
      if (std::find(members.begin(), members.end(), missing) == members.end()) continue;

      for (int i = 0; i < cfg.universe; ++i) {
        double mean = i < half ? 0.5 : -0.5;
        for (int c = 0; c < d; ++c) x(i, c) = mean + unit(rng);
      }
      query.clear();
      double total = 0.0;
      for (int id : members) {
        if (id == missing) continue;
        query.push_back(id);
        total += x.row(id).sum();
      }
      if (cfg.enforce_condition) {
        if (cls == 1 && !(total > 0.0)) continue;
        if (cls == 0 && !(total < 0.0)) continue;
      }
      break;
    }

    Eigen::RowVectorXd z = update_representation(x, missing, query, model.gamma);
    bool raw_ok = gnb_classify(x.row(missing)) == cls;
    bool updated_ok = gnb_classify(z) == cls;
    if (raw_ok && updated_ok) ++result.n11;
    if (raw_ok && !updated_ok) ++result.n10;
    if (!raw_ok && updated_ok) ++result.n01;
    if (!raw_ok && !updated_ok) ++result.n00;
  }
  result.acc_x = static_cast<double>(result.n11 + result.n10) / static_cast<double>(cfg.trials);
  result.acc_z = static_cast<double>(result.n11 + result.n01) / static_cast<double>(cfg.trials);
  return result;
}

BootstrapInterval bootstrap_gain_interval(const GainResult& result, int resamples, double level,
                                          std::uint64_t seed) {
  if (resamples < 1) throw std::invalid_argument("bootstrap: resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap: level outside (0, 1)");
  const long T = result.trials;
  if (T < 1 || result.n11 + result.n10 + result.n01 + result.n00 != T)
    throw std::invalid_argument("bootstrap: inconsistent counts");

  const double p[4] = {
      static_cast<double>(result.n11) / T, static_cast<double>(result.n10) / T,
      static_cast<double>(result.n01) / T, static_cast<double>(result.n00) / T};

  Rng rng(seed);
  std::vector<double> diffs;
  diffs.reserve(resamples);
  for (int b = 0; b < resamples; ++b) {
    long remaining = T;
    double mass = 1.0;
    long k[4];
    for (int j = 0; j < 4; ++j) {
      if (j == 3) {
        k[j] = remaining;
        break;
      }
      double cond = mass > 0.0 ? std::min(1.0, std::max(0.0, p[j] / mass)) : 0.0;
      k[j] = remaining > 0 ? std::binomial_distribution<long>(remaining, cond)(rng) : 0;
      remaining -= k[j];
      mass -= p[j];
    }
    diffs.push_back(static_cast<double>(k[2] - k[1]) / static_cast<double>(T));
  }
  std::sort(diffs.begin(), diffs.end());
  double alpha = 1.0 - level;
  auto idx = [&](double q) {
    long i = std::lround(q * (resamples - 1));
    return std::min<long>(std::max<long>(i, 0), resamples - 1);
  };
  BootstrapInterval out;
  out.lo = diffs[idx(alpha / 2.0)];
  out.hi = diffs[idx(1.0 - alpha / 2.0)];
  out.mean_diff = static_cast<double>(result.n01 - result.n10) / static_cast<double>(T);
  return out;
}

ReasonableSolution reasonable_solution(const Hypergraph& g) {
  g.validate();
  std::set<std::vector<int>> edge_set;
  bool any_fillable = false;
  for (const auto& e : g.edges) {
    auto sorted = e;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() >= 2) any_fillable = true;
    edge_set.insert(std::move(sorted));
  }
  if (!any_fillable)
    throw std::invalid_argument("reasonable_solution: need a hyperedge of size >= 2");

  ReasonableSolution sol;
  std::map<std::vector<int>, int> query_index;
  for (const auto& e : g.edges) {
    if (e.size() < 2) continue;
    auto sorted = e;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) {
      std::vector<int> q;
      q.reserve(sorted.size() - 1);
      for (size_t k = 0; k < sorted.size(); ++k) {
        if (k != i) q.push_back(sorted[k]);
      }
      if (query_index.emplace(q, static_cast<int>(sol.queries.size())).second)
        sol.queries.push_back(std::move(q));
    }
  }

  const int n = g.num_nodes;
  const int nq = static_cast<int>(sol.queries.size());
  sol.b = Mat::Zero(n, nq);
  sol.support.resize(nq);
  for (int j = 0; j < nq; ++j) {
    const auto& q = sol.queries[j];
    for (int v = 0; v < n; ++v) {
      if (std::binary_search(q.begin(), q.end(), v)) continue;
      std::vector<int> candidate = q;
      candidate.insert(std::upper_bound(candidate.begin(), candidate.end(), v), v);
      if (edge_set.count(candidate)) {
        sol.support[j].push_back(v);
        sol.b(v, j) = 1.0;
      }
    }
  }

  Eigen::JacobiSVD<Mat> svd(sol.b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  sol.z = svd.matrixU() * svd.singularValues().asDiagonal();
  sol.q = svd.matrixV();
  Mat recon = sol.z * sol.q.transpose();
  sol.reconstruction_error = (recon - sol.b).norm();

  sol.margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < nq; ++j) {
    double inside = std::numeric_limits<double>::infinity();
    double outside = -std::numeric_limits<double>::infinity();
    size_t next_in = 0;
    for (int v = 0; v < n; ++v) {
      bool in_support = next_in < sol.support[j].size() && sol.support[j][next_in] == v;
      if (in_support) {
        inside = std::min(inside, recon(v, j));
        ++next_in;
      } else {
        outside = std::max(outside, recon(v, j));
      }
    }
    sol.margin = std::min(sol.margin, inside - outside);
  }
  return sol;
}

std::vector<GridCell> condition_grid(const std::vector<int>& sizes, const std::vector<int>& dims,
                                     const std::vector<double>& affinities, long trials,
                                     std::uint64_t seed, int threads) {
  std::vector<GridCell> cells;
  for (int S : sizes) {
    for (int d : dims) {
      for (double a : affinities) {
        GridCell cell;
        cell.edge_size = S;
        cell.feature_dim = d;
        cell.affinity = a;
        cells.push_back(cell);
      }
    }
  }

  auto run_cell = [&](size_t idx) {
    GridCell& cell = cells[idx];
    cell.closed_form = closed_form_condition_prob(cell.edge_size, cell.feature_dim, cell.affinity);
    TheoryModel model;
    model.edge_size = cell.edge_size;
    model.feature_dim = cell.feature_dim;
    model.affinity = cell.affinity;
    model.per_class = cell.edge_size;
    McEstimate est = mc_condition_prob(model, trials, derive_seed(seed, idx));
    cell.mc_estimate = est.estimate;
    cell.mc_stderr = est.stderr_est;
  };

  if (threads <= 1) {
    for (size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w]() {
        for (size_t i = w; i < cells.size(); i += threads) run_cell(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return cells;
}

}  // namespace hyperfill::theory
