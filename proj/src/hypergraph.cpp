#include "hyperfill/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace hyperfill {

namespace {

[[noreturn]] void fail(const std::string& where, long line, const std::string& what) {
  std::ostringstream os;
  os << where << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

struct LineReader {
  std::istream& in;
  std::string name;
  long line_no = 0;

  // Next non-comment line; returns nullopt at end of input.
  std::optional<std::pair<long, std::string>> next() {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] == '#') continue;
      return std::make_pair(line_no, line);
    }
    return std::nullopt;
  }

  // Next non-comment, non-blank line (for optional trailing blocks).
  std::optional<std::pair<long, std::string>> next_nonblank() {
    while (auto got = next()) {
      if (got->second.find_first_not_of(" \t") != std::string::npos) return got;
    }
    return std::nullopt;
  }
};

std::vector<int> parse_ints(const std::string& s) {
  std::istringstream is(s);
  std::vector<int> out;
  int v;
  while (is >> v) out.push_back(v);
  if (!is.eof()) throw std::runtime_error("non-integer token");
  return out;
}

}  // namespace

void Hypergraph::validate() const {
  if (num_nodes < 0) throw std::invalid_argument("hypergraph: negative node count");
  for (size_t j = 0; j < edges.size(); ++j) {
    const auto& e = edges[j];
    if (e.empty())
      throw std::invalid_argument("hypergraph: hyperedge " + std::to_string(j) + " is empty");
    auto sorted = e;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] < 0 || sorted[i] >= num_nodes)
        throw std::invalid_argument("hypergraph: node id " + std::to_string(sorted[i]) +
                                    " out of range in hyperedge " + std::to_string(j));
      if (i > 0 && sorted[i] == sorted[i - 1])
        throw std::invalid_argument("hypergraph: duplicate node id " + std::to_string(sorted[i]) +
                                    " in hyperedge " + std::to_string(j));
    }
  }
}

void Dataset::validate() const {
  graph.validate();
  if (has_features()) {
    if (features.rows() != graph.num_nodes)
      throw std::invalid_argument("dataset: feature row count != node count");
    if (!all_finite(features)) throw std::invalid_argument("dataset: non-finite feature value");
  }
  if (has_labels()) {
    if (static_cast<int>(labels.size()) != graph.num_nodes)
      throw std::invalid_argument("dataset: label count != node count");
    int max_label = -1;
    for (int l : labels) {
      if (l < 0) throw std::invalid_argument("dataset: negative class label");
      max_label = std::max(max_label, l);
    }
    std::vector<char> seen(max_label + 1, 0);
    for (int l : labels) seen[l] = 1;
    for (int c = 0; c <= max_label; ++c) {
      if (!seen[c])
        throw std::invalid_argument("dataset: class labels not contiguous, missing " +
                                    std::to_string(c));
    }
  }
}

Dataset read_dataset(std::istream& in, const std::string& name) {
  LineReader reader{in, name};

  auto header = reader.next_nonblank();
  if (!header) fail(name, reader.line_no, "missing header line \"n m d\"");
  long n, m, d;
  {
    std::istringstream is(header->second);
    if (!(is >> n >> m >> d)) fail(name, header->first, "malformed header, expected \"n m d\"");
    std::string extra;
    if (is >> extra) fail(name, header->first, "trailing token after header: " + extra);
  }
  if (n < 0 || m < 0 || d < 0) fail(name, header->first, "negative count in header");

  Dataset ds;
  ds.graph.num_nodes = static_cast<int>(n);
  ds.graph.edges.reserve(m);
  for (long j = 0; j < m; ++j) {
    auto got = reader.next();
    if (!got) fail(name, reader.line_no, "expected " + std::to_string(m) + " hyperedge lines, got " +
                                             std::to_string(j));
    std::vector<int> ids;
    try {
      ids = parse_ints(got->second);
    } catch (const std::exception&) {
      fail(name, got->first, "malformed hyperedge line");
    }
    if (ids.empty()) fail(name, got->first, "empty hyperedge");
    for (int id : ids) {
      if (id < 0 || id >= n)
        fail(name, got->first, "node id " + std::to_string(id) + " out of range [0, " +
                                   std::to_string(n) + ")");
    }
    ds.graph.edges.push_back(std::move(ids));
  }

  if (d > 0) {
    ds.features.resize(n, d);
    for (long i = 0; i < n; ++i) {
      auto got = reader.next();
      if (!got) fail(name, reader.line_no, "expected " + std::to_string(n) + " feature lines, got " +
                                               std::to_string(i));
      std::istringstream is(got->second);
      for (long c = 0; c < d; ++c) {
        double v;
        if (!(is >> v)) fail(name, got->first, "expected " + std::to_string(d) + " feature values");
        ds.features(i, c) = v;
      }
      std::string extra;
      if (is >> extra) fail(name, got->first, "trailing token in feature line: " + extra);
    }
  }

  if (auto got = reader.next_nonblank()) {
    std::vector<int> raw;
    try {
      raw = parse_ints(got->second);
    } catch (const std::exception&) {
      fail(name, got->first, "malformed label line");
    }
    if (static_cast<long>(raw.size()) != n)
      fail(name, got->first, "label line has " + std::to_string(raw.size()) + " entries, expected " +
                                 std::to_string(n));
    ds.labels = std::move(raw);
    if (auto trailing = reader.next_nonblank())
      fail(name, trailing->first, "unexpected content after label line");
  }

  ds.validate();
  return ds;
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  ds.validate();
  long d = ds.has_features() ? ds.features.cols() : 0;
  out << ds.graph.num_nodes << " " << ds.graph.edges.size() << " " << d << "\n";
  for (const auto& e : ds.graph.edges) {
    for (size_t i = 0; i < e.size(); ++i) out << (i ? " " : "") << e[i];
    out << "\n";
  }
  if (ds.has_features()) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (long i = 0; i < ds.features.rows(); ++i) {
      for (long c = 0; c < d; ++c) out << (c ? " " : "") << ds.features(i, c);
      out << "\n";
    }
  }
  if (ds.has_labels()) {
    for (size_t i = 0; i < ds.labels.size(); ++i) out << (i ? " " : "") << ds.labels[i];
    out << "\n";
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return read_dataset(in, path);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  write_dataset(ds, out);
  if (!out) throw std::runtime_error(path + ": write failed");
}

void SyntheticSpec::validate() const {
  if (nodes_per_class < 1) throw std::invalid_argument("synthetic: nodes_per_class must be >= 1");
  if (feature_dim < 1) throw std::invalid_argument("synthetic: feature_dim must be >= 1");
  if (!(affinity >= 0.0 && affinity <= 1.0))
    throw std::invalid_argument("synthetic: affinity must lie in [0, 1]");
  for (int s : edge_sizes) {
    if (s < 2 || s > 2 * nodes_per_class)
      throw std::invalid_argument("synthetic: hyperedge size " + std::to_string(s) +
                                  " outside [2, " + std::to_string(2 * nodes_per_class) + "]");
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int N = spec.nodes_per_class;
  const int n = 2 * N;
  const int d = spec.feature_dim;

  Rng rng(spec.seed);
  Dataset ds;
  ds.graph.num_nodes = n;
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) ds.labels[i] = i < N ? 1 : 0;

  ds.features.resize(n, d);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    double mean = i < N ? 0.5 : -0.5;
    for (int c = 0; c < d; ++c) ds.features(i, c) = mean + unit_normal(rng);
  }

  ds.graph.edges.reserve(spec.edge_sizes.size());
  for (int size : spec.edge_sizes) {
    bool class1_edge = uniform_unit(rng) < 0.5;
    double a = class1_edge ? spec.affinity : 1.0 - spec.affinity;
    int in_class1 = -1;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      int s = count_bernoulli(rng, size, a);
      if (s <= N && size - s <= N) {
        in_class1 = s;
        break;
      }
    }
    if (in_class1 < 0)
      throw std::runtime_error("synthetic: no feasible member count for hyperedge size " +
                               std::to_string(size));
    Hyperedge e = sample_without_replacement(rng, N, in_class1);
    for (int id : sample_without_replacement(rng, N, size - in_class1)) e.push_back(id + N);
    ds.graph.edges.push_back(std::move(e));
  }
  return ds;
}

Hypergraph node_swap(const Hypergraph& g, long iterations, std::uint64_t seed) {
  g.validate();
  if (iterations < 0) throw std::invalid_argument("node_swap: negative iteration count");
  if (g.edges.size() < 2) throw std::invalid_argument("node_swap: need at least 2 hyperedges");

  Hypergraph out = g;
  Rng rng(seed);
  const int m = static_cast<int>(out.edges.size());
  for (long t = 0; t < iterations; ++t) {
    int i = uniform_index(rng, m);
    int j = uniform_index(rng, m - 1);
    if (j >= i) ++j;
    auto& ei = out.edges[i];
    auto& ej = out.edges[j];
    int a = uniform_index(rng, static_cast<int>(ei.size()));
    int b = uniform_index(rng, static_cast<int>(ej.size()));
    int vi = ei[a], vj = ej[b];
    // Skip exchanges that would put a node twice into one edge; the iteration
    // still counts, so sizes are preserved unconditionally.
    if (vi == vj) continue;
    if (std::find(ei.begin(), ei.end(), vj) != ei.end()) continue;
    if (std::find(ej.begin(), ej.end(), vi) != ej.end()) continue;
    ei[a] = vj;
    ej[b] = vi;
  }
  return out;
}

double pairwise_homophily(const Hypergraph& g, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != g.num_nodes)
    throw std::invalid_argument("pairwise_homophily: labels must cover all nodes");
  long long same = 0, total = 0;
  for (const auto& e : g.edges) {
    for (size_t i = 0; i < e.size(); ++i) {
      for (size_t j = i + 1; j < e.size(); ++j) {
        ++total;
        if (labels[e[i]] == labels[e[j]]) ++same;
      }
    }
  }
  if (total == 0)
    throw std::invalid_argument("pairwise_homophily: no hyperedge of size >= 2");
  return static_cast<double>(same) / static_cast<double>(total);
}

namespace {

void check_ratios(double train, double valid, double test) {
  if (!(train > 0.0 && valid > 0.0 && test > 0.0))
    throw std::invalid_argument("split: ratios must be positive");
  if (std::abs(train + valid + test - 1.0) > 1e-9)
    throw std::invalid_argument("split: ratios must sum to 1");
}

}  // namespace

NodeSplit split_nodes_by_ratio(const std::vector<int>& labels, double train_ratio,
                               double valid_ratio, double test_ratio, std::uint64_t seed) {
  check_ratios(train_ratio, valid_ratio, test_ratio);
  const int n = static_cast<int>(labels.size());
  if (n == 0) throw std::invalid_argument("split: empty label vector");

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  int n_train = static_cast<int>(std::floor(train_ratio * n));
  int n_valid = static_cast<int>(std::floor(valid_ratio * n));
  int n_test = static_cast<int>(std::floor(test_ratio * n));
  n_train += n - (n_train + n_valid + n_test);  // remainder goes to train

  NodeSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.valid.assign(order.begin() + n_train, order.begin() + n_train + n_valid);
  split.test.assign(order.begin() + n_train + n_valid, order.end());

  int num_classes = 0;
  for (int l : labels) num_classes = std::max(num_classes, l + 1);

  // Repair: every class must appear in train. Pull a missing-class node out of
  // test (or valid), and hand back a node of the best-represented class so the
  // split sizes stay put whenever a donor exists.
  std::vector<int> train_count(num_classes, 0);
  for (int id : split.train) ++train_count[labels[id]];
  for (int c = 0; c < num_classes; ++c) {
    bool class_exists = false;
    for (int l : labels) {
      if (l == c) {
        class_exists = true;
        break;
      }
    }
    if (!class_exists || train_count[c] > 0) continue;

    std::vector<int>* source = nullptr;
    size_t pos = 0;
    for (auto* cand : {&split.test, &split.valid}) {
      for (size_t k = 0; k < cand->size(); ++k) {
        if (labels[(*cand)[k]] == c) {
          source = cand;
          pos = k;
          break;
        }
      }
      if (source) break;
    }
    if (!source)
      throw std::invalid_argument("split: class " + std::to_string(c) +
                                  " has too few nodes to reach the train set");
    int incoming = (*source)[pos];
    source->erase(source->begin() + pos);

    int donor_class = -1;
    for (int other = 0; other < num_classes; ++other) {
      if (train_count[other] > 1 && (donor_class < 0 || train_count[other] > train_count[donor_class]))
        donor_class = other;
    }
    if (donor_class >= 0) {
      for (size_t k = split.train.size(); k-- > 0;) {
        if (labels[split.train[k]] == donor_class) {
          source->push_back(split.train[k]);
          split.train.erase(split.train.begin() + k);
          --train_count[donor_class];
          break;
        }
      }
    }
    split.train.push_back(incoming);
    ++train_count[c];
  }

  std::sort(split.train.begin(), split.train.end());
  std::sort(split.valid.begin(), split.valid.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

NodeSplit split_nodes_per_class(const std::vector<int>& labels, int train_per_class,
                                int valid_per_class, std::uint64_t seed) {
  if (train_per_class < 1 || valid_per_class < 0)
    throw std::invalid_argument("split: per-class counts must be positive");
  const int n = static_cast<int>(labels.size());
  int num_classes = 0;
  for (int l : labels) num_classes = std::max(num_classes, l + 1);

  std::vector<std::vector<int>> by_class(num_classes);
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  Rng rng(seed);
  NodeSplit split;
  for (int c = 0; c < num_classes; ++c) {
    auto& ids = by_class[c];
    if (static_cast<int>(ids.size()) < train_per_class + valid_per_class)
      throw std::invalid_argument("split: class " + std::to_string(c) + " has only " +
                                  std::to_string(ids.size()) + " nodes, needs " +
                                  std::to_string(train_per_class + valid_per_class));
    std::shuffle(ids.begin(), ids.end(), rng);
    split.train.insert(split.train.end(), ids.begin(), ids.begin() + train_per_class);
    split.valid.insert(split.valid.end(), ids.begin() + train_per_class,
                       ids.begin() + train_per_class + valid_per_class);
    split.test.insert(split.test.end(), ids.begin() + train_per_class + valid_per_class, ids.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.valid.begin(), split.valid.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

EdgeSplit split_hyperedges(int num_edges, double train_ratio, double valid_ratio,
                           double test_ratio, std::uint64_t seed) {
  check_ratios(train_ratio, valid_ratio, test_ratio);
  if (num_edges < 5) throw std::invalid_argument("split: need at least 5 hyperedges");

  std::vector<int> order(num_edges);
  for (int i = 0; i < num_edges; ++i) order[i] = i;
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  int n_train = static_cast<int>(std::floor(train_ratio * num_edges));
  int n_valid = static_cast<int>(std::floor(valid_ratio * num_edges));
  int n_test = static_cast<int>(std::floor(test_ratio * num_edges));
  n_train += num_edges - (n_train + n_valid + n_test);

  EdgeSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.valid.assign(order.begin() + n_train, order.begin() + n_train + n_valid);
  split.test.assign(order.begin() + n_train + n_valid, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.valid.begin(), split.valid.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace hyperfill
