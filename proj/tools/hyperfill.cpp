#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperfill/checkpoint.hpp"
#include "hyperfill/diagnostics.hpp"
#include "hyperfill/eval.hpp"
#include "hyperfill/hypergraph.hpp"
#include "hyperfill/theory.hpp"
#include "hyperfill/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// "2..8", "2,4,6", or "5"
std::vector<int> parse_int_range(const std::string& flag, const std::string& text) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(flag + ": " + why + " in '" + text + "'");
  };
  std::vector<int> out;
  auto dots = text.find("..");
  if (dots != std::string::npos) {
    int lo = 0, hi = 0;
    try {
      lo = std::stoi(text.substr(0, dots));
      hi = std::stoi(text.substr(dots + 2));
    } catch (const std::exception&) {
      fail("expected <int>..<int>");
    }
    if (hi < lo) fail("descending range");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string term;
  while (std::getline(ss, term, ',')) {
    try {
      size_t used = 0;
      int v = std::stoi(term, &used);
      if (used != term.size()) fail("trailing characters");
      out.push_back(v);
    } catch (const std::invalid_argument&) {
      fail("expected an integer");
    } catch (const std::out_of_range&) {
      fail("value out of range");
    }
  }
  if (out.empty()) fail("empty list");
  return out;
}

// "0:0.1:1" (start:step:stop inclusive), "0.3,0.7", or "0.5"
std::vector<double> parse_double_range(const std::string& flag, const std::string& text) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(flag + ": " + why + " in '" + text + "'");
  };
  std::vector<double> out;
  if (std::count(text.begin(), text.end(), ':') == 2) {
    auto c1 = text.find(':');
    auto c2 = text.find(':', c1 + 1);
    double start = 0, step = 0, stop = 0;
    try {
      start = std::stod(text.substr(0, c1));
      step = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
      stop = std::stod(text.substr(c2 + 1));
    } catch (const std::exception&) {
      fail("expected <start>:<step>:<stop>");
    }
    if (step <= 0.0) fail("step must be positive");
    if (stop < start) fail("stop below start");
    long count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(text);
  std::string term;
  while (std::getline(ss, term, ',')) {
    try {
      size_t used = 0;
      double v = std::stod(term, &used);
      if (used != term.size()) fail("trailing characters");
      out.push_back(v);
    } catch (const std::invalid_argument&) {
      fail("expected a real number");
    } catch (const std::out_of_range&) {
      fail("value out of range");
    }
  }
  if (out.empty()) fail("empty list");
  return out;
}

// "4x100,3x20" -> 100 fours then 20 threes; a bare "4" is one hyperedge.
std::vector<int> parse_sizes(const std::string& flag, const std::string& text) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(flag + ": " + why + " in '" + text + "'");
  };
  std::vector<int> out;
  std::stringstream ss(text);
  std::string term;
  while (std::getline(ss, term, ',')) {
    if (term.empty()) fail("empty term");
    long count = 1;
    std::string size_part = term;
    auto x = term.find('x');
    if (x != std::string::npos) {
      size_part = term.substr(0, x);
      try {
        count = std::stol(term.substr(x + 1));
      } catch (const std::exception&) {
        fail("expected <size>x<count>");
      }
    }
    int size = 0;
    try {
      size = std::stoi(size_part);
    } catch (const std::exception&) {
      fail("expected <size>x<count>");
    }
    if (size < 2) fail("hyperedge size below 2");
    if (count < 1) fail("count below 1");
    for (long i = 0; i < count; ++i) out.push_back(size);
  }
  if (out.empty()) fail("empty list");
  return out;
}

// Collects a command's resolved configuration and artifact list, and writes
// manifest.json as the final step so its presence marks a completed run.
class Run {
 public:
  Run(const std::string& out_dir, const std::string& command, std::uint64_t seed)
      : dir_(out_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("--out: cannot create directory " + dir_.string());
    manifest_["command"] = command;
    manifest_["seed"] = seed;
    manifest_["config"] = json::object();
  }

  template <typename T>
  void set(const std::string& key, const T& value) {
    manifest_["config"][key] = value;
  }

  fs::path artifact(const std::string& name) {
    artifacts_.push_back(name);
    return dir_ / name;
  }

  void finish() {
    manifest_["artifacts"] = artifacts_;
    const fs::path path = dir_ / "manifest.json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << manifest_.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
    std::cout << "wrote " << path.string() << "\n";
  }

  void report(const std::string& key, const json& value) { manifest_["report"][key] = value; }

 private:
  fs::path dir_;
  json manifest_;
  std::vector<std::string> artifacts_;
};

hyperfill::Mat load_embeddings(const std::string& path, long expected_rows) {
  hyperfill::Mat z = hyperfill::load_matrix_csv(path);
  if (z.rows() != expected_rows)
    throw std::runtime_error("--embeddings: " + path + " has " + std::to_string(z.rows()) +
                             " rows, dataset has " + std::to_string(expected_rows) + " nodes");
  return z;
}

struct GenerateOpts {
  int n = 0, d = 0;
  double p = 0.5;
  std::string sizes;
  std::uint64_t seed = 0;
  std::string out;
};

void run_generate(const GenerateOpts& o) {
  hyperfill::SyntheticSpec spec;
  spec.nodes_per_class = o.n;
  spec.feature_dim = o.d;
  spec.affinity = o.p;
  spec.edge_sizes = parse_sizes("--sizes", o.sizes);
  spec.seed = o.seed;
  hyperfill::Dataset ds = hyperfill::generate_synthetic(spec);

  Run run(o.out, "generate", o.seed);
  run.set("N", o.n);
  run.set("d", o.d);
  run.set("P", o.p);
  run.set("sizes", o.sizes);
  hyperfill::save_dataset(ds, run.artifact("dataset.txt").string());
  run.report("num_nodes", ds.graph.num_nodes);
  run.report("num_hyperedges", ds.graph.edges.size());
  run.report("homophily", hyperfill::pairwise_homophily(ds.graph, ds.labels));
  run.finish();
}

struct SwapOpts {
  std::string in;
  long iterations = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void run_swap(const SwapOpts& o) {
  hyperfill::Dataset ds = hyperfill::load_dataset(o.in);
  Run run(o.out, "swap", o.seed);
  run.set("in", o.in);
  run.set("iterations", o.iterations);
  if (ds.has_labels())
    run.report("homophily_before", hyperfill::pairwise_homophily(ds.graph, ds.labels));
  ds.graph = hyperfill::node_swap(ds.graph, o.iterations, o.seed);
  if (ds.has_labels())
    run.report("homophily_after", hyperfill::pairwise_homophily(ds.graph, ds.labels));
  hyperfill::save_dataset(ds, run.artifact("dataset.txt").string());
  run.finish();
}

struct TrainOpts {
  std::string in, out;
  hyperfill::TrainConfig cfg;
  bool no_heads = false;
  bool static_augmentation = false;
};

void run_train(TrainOpts& o) {
  hyperfill::Dataset ds = hyperfill::load_dataset(o.in);
  if (!ds.has_features()) throw std::runtime_error("--in: dataset has no node features");
  o.cfg.use_heads = !o.no_heads;
  o.cfg.refresh_augmentation = !o.static_augmentation;
  o.cfg.validate();

  Run run(o.out, "train", o.cfg.seed);
  run.set("in", o.in);
  run.set("p_v", o.cfg.p_v);
  run.set("p_e", o.cfg.p_e);
  run.set("epochs", o.cfg.filling_epochs);
  run.set("warmup_epochs", o.cfg.warmup_epochs);
  run.set("warmup_mask_rate", o.cfg.warmup_mask_rate);
  run.set("warmup_edge_drop", o.cfg.warmup_edge_drop);
  run.set("lr", o.cfg.lr);
  run.set("weight_decay", o.cfg.weight_decay);
  run.set("temperature", o.cfg.temperature);
  run.set("hidden_dim", o.cfg.hidden_dim);
  run.set("embed_dim", o.cfg.embed_dim);
  run.set("head_hidden", o.cfg.head_hidden);
  run.set("head_out", o.cfg.head_out);
  run.set("dropout", o.cfg.dropout);
  run.set("use_heads", o.cfg.use_heads);
  run.set("refresh_augmentation", o.cfg.refresh_augmentation);

  std::vector<hyperfill::EpochRecord> log;
  hyperfill::Model model = hyperfill::train_model(ds.features, ds.graph, o.cfg, &log);
  hyperfill::save_checkpoint(model.to_checkpoint(), run.artifact("checkpoint.json").string());
  hyperfill::save_epoch_log_csv(log, run.artifact("training_log.csv").string());
  if (!log.empty()) run.report("final_loss", log.back().loss);
  run.finish();
}

struct EmbedOpts {
  std::string in, checkpoint, out;
  std::uint64_t seed = 0;
};

void run_embed(const EmbedOpts& o) {
  hyperfill::Dataset ds = hyperfill::load_dataset(o.in);
  if (!ds.has_features()) throw std::runtime_error("--in: dataset has no node features");
  hyperfill::Model model =
      hyperfill::Model::from_checkpoint(hyperfill::load_checkpoint(o.checkpoint));
  if (model.encoder.config.in_dim != ds.features.cols())
    throw std::runtime_error("--checkpoint: encoder input width does not match the dataset");
  hyperfill::Mat z = hyperfill::embed_nodes(ds.features, ds.graph, model.encoder);

  Run run(o.out, "embed", o.seed);
  run.set("in", o.in);
  run.set("checkpoint", o.checkpoint);
  hyperfill::save_matrix_csv(z, run.artifact("embeddings.csv").string(), "z");
  run.finish();
}

struct EvalNodeOpts {
  std::string in, embeddings, checkpoint, out;
  bool random_init = false;
  int repeats = 5;
  double train_ratio = 0.01, valid_ratio = 0.01;
  int train_per_class = 0, valid_per_class = 0;
  hyperfill::ProbeConfig probe;
  std::uint64_t seed = 0;
};

void run_eval_node(const EvalNodeOpts& o) {
  hyperfill::Dataset ds = hyperfill::load_dataset(o.in);
  if (!ds.has_labels()) throw std::runtime_error("--in: dataset has no labels");
  if (!ds.has_features() && o.embeddings.empty())
    throw std::runtime_error("--in: dataset has no features; pass --embeddings");
  if (o.repeats < 1) throw std::runtime_error("--repeats: must be >= 1");
  if (o.random_init && o.checkpoint.empty())
    throw std::runtime_error("--random-init: needs --checkpoint for the architecture");

  hyperfill::Mat z = o.embeddings.empty() ? ds.features
                                          : load_embeddings(o.embeddings, ds.graph.num_nodes);
  const std::string probe_method = o.embeddings.empty() ? "feature-probe" : "embedding-probe";

  hyperfill::Model start;
  bool fine_tuning = !o.checkpoint.empty();
  if (fine_tuning) {
    start = hyperfill::Model::from_checkpoint(hyperfill::load_checkpoint(o.checkpoint));
    if (start.encoder.config.in_dim != ds.features.cols())
      throw std::runtime_error("--checkpoint: encoder input width does not match the dataset");
  }
  const std::string tune_method = o.random_init ? "finetune-random" : "finetune";

  Run run(o.out, "eval-node", o.seed);
  run.set("in", o.in);
  run.set("embeddings", o.embeddings);
  run.set("checkpoint", o.checkpoint);
  run.set("random_init", o.random_init);
  run.set("repeats", o.repeats);
  run.set("train_ratio", o.train_ratio);
  run.set("valid_ratio", o.valid_ratio);
  run.set("train_per_class", o.train_per_class);
  run.set("valid_per_class", o.valid_per_class);
  run.set("epochs", o.probe.epochs);
  run.set("lr", o.probe.lr);
  run.set("weight_decay", o.probe.weight_decay);
  run.set("eval_every", o.probe.eval_every);

  std::vector<hyperfill::MetricRow> rows;
  for (int r = 0; r < o.repeats; ++r) {
    const std::uint64_t split_seed = hyperfill::derive_seed(o.seed, r);
    hyperfill::NodeSplit split =
        o.train_per_class > 0
            ? hyperfill::split_nodes_per_class(ds.labels, o.train_per_class, o.valid_per_class,
                                               split_seed)
            : hyperfill::split_nodes_by_ratio(ds.labels, o.train_ratio, o.valid_ratio,
                                              1.0 - o.train_ratio - o.valid_ratio, split_seed);
    const std::uint64_t eval_seed = hyperfill::derive_seed(o.seed, 10000 + r);
    hyperfill::ProbeResult probe = hyperfill::linear_probe(z, ds.labels, split, o.probe, eval_seed);
    rows.push_back({probe_method, "node-classification", eval_seed, "split-" + std::to_string(r),
                    "accuracy", probe.test_accuracy});
    if (fine_tuning) {
      hyperfill::Model init = start;
      if (o.random_init) {
        hyperfill::TrainConfig cfg = start.config;
        cfg.seed = hyperfill::derive_seed(o.seed, 20000 + r);
        init = hyperfill::Model::init(static_cast<int>(ds.features.cols()), cfg);
      }
      hyperfill::ProbeResult tuned =
          hyperfill::fine_tune(ds.features, ds.graph, init, ds.labels, split, o.probe, eval_seed);
      rows.push_back({tune_method, "node-classification", eval_seed, "split-" + std::to_string(r),
                      "accuracy", tuned.test_accuracy});
    }
  }
  hyperfill::write_metric_rows(rows, run.artifact("metrics.csv").string());
  hyperfill::write_metric_summary(rows, run.artifact("summary.json").string());
  run.finish();
}

struct EvalEdgeOpts {
  std::string in, embeddings, out;
  int repeats = 1;
  double train_ratio = 0.6, valid_ratio = 0.2;
  hyperfill::EdgeEvalConfig cfg;
  std::uint64_t seed = 0;
};

void run_eval_edge(const EvalEdgeOpts& o) {
  hyperfill::Dataset ds = hyperfill::load_dataset(o.in);
  if (!ds.has_features() && o.embeddings.empty())
    throw std::runtime_error("--in: dataset has no features; pass --embeddings");
  if (o.repeats < 1) throw std::runtime_error("--repeats: must be >= 1");
  hyperfill::Mat z = o.embeddings.empty() ? ds.features
                                          : load_embeddings(o.embeddings, ds.graph.num_nodes);
  const std::string method = o.embeddings.empty() ? "feature-maxmin" : "embedding-maxmin";

  Run run(o.out, "eval-edge", o.seed);
  run.set("in", o.in);
  run.set("embeddings", o.embeddings);
  run.set("repeats", o.repeats);
  run.set("train_ratio", o.train_ratio);
  run.set("valid_ratio", o.valid_ratio);
  run.set("epochs", o.cfg.epochs);
  run.set("lr", o.cfg.lr);
  run.set("weight_decay", o.cfg.weight_decay);
  run.set("eval_every", o.cfg.eval_every);
  run.set("hidden_dim", o.cfg.hidden_dim);
  run.set("dropout", o.cfg.dropout);

  std::vector<hyperfill::MetricRow> rows;
  for (int r = 0; r < o.repeats; ++r) {
    hyperfill::EdgeSplit split = hyperfill::split_hyperedges(
        static_cast<int>(ds.graph.edges.size()), o.train_ratio, o.valid_ratio,
        1.0 - o.train_ratio - o.valid_ratio, hyperfill::derive_seed(o.seed, r));
    const std::uint64_t eval_seed = hyperfill::derive_seed(o.seed, 10000 + r);
    hyperfill::EdgeEvalResult res =
        hyperfill::hyperedge_prediction(z, ds.graph, split, o.cfg, eval_seed);
    rows.push_back({method, "hyperedge-prediction", eval_seed, "split-" + std::to_string(r),
                    "auroc", res.test_auroc});
  }
  hyperfill::write_metric_rows(rows, run.artifact("metrics.csv").string());
  hyperfill::write_metric_summary(rows, run.artifact("summary.json").string());
  run.finish();
}

struct TheoryGridOpts {
  std::string sizes = "2..8", dims = "2..8", affinities = "0:0.1:1";
  long trials = 10000;
  int threads = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void run_theory_grid(const TheoryGridOpts& o) {
  if (o.trials < 1) throw std::runtime_error("--trials: must be >= 1");
  if (o.threads < 1) throw std::runtime_error("--threads: must be >= 1");
  auto sizes = parse_int_range("--S", o.sizes);
  auto dims = parse_int_range("--d", o.dims);
  auto affinities = parse_double_range("--P", o.affinities);
  for (int s : sizes)
    if (s < 2) throw std::runtime_error("--S: hyperedge size below 2");
  for (int d : dims)
    if (d < 1) throw std::runtime_error("--d: dimension below 1");
  for (double p : affinities)
    if (!(p >= 0.0 && p <= 1.0)) throw std::runtime_error("--P: affinity outside [0, 1]");

  auto cells = hyperfill::theory::condition_grid(sizes, dims, affinities, o.trials, o.seed,
                                                 o.threads);

  Run run(o.out, "theory-grid", o.seed);
  run.set("S", o.sizes);
  run.set("d", o.dims);
  run.set("P", o.affinities);
  run.set("trials", o.trials);
  run.set("threads", o.threads);
  const fs::path csv = run.artifact("grid.csv");
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "S,d,P,closed_form,mc_estimate,mc_stderr\n";
  for (const auto& c : cells) {
    out << c.edge_size << ',' << c.feature_dim << ',' << c.affinity << ',' << c.closed_form << ','
        << c.mc_estimate << ',' << c.mc_stderr << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + csv.string());
  double worst = 0.0;
  for (const auto& c : cells) worst = std::max(worst, std::abs(c.closed_form - c.mc_estimate));
  run.report("cells", cells.size());
  run.report("max_abs_gap", worst);
  run.finish();
}

struct DiagnoseOpts {
  std::string in, embeddings, out;
  std::uint64_t seed = 0;
};

void run_diagnose(const DiagnoseOpts& o) {
  hyperfill::Dataset ds = hyperfill::load_dataset(o.in);
  if (!ds.has_features() && o.embeddings.empty())
    throw std::runtime_error("--in: dataset has no features; pass --embeddings");
  hyperfill::Mat z = o.embeddings.empty() ? ds.features
                                          : load_embeddings(o.embeddings, ds.graph.num_nodes);

  hyperfill::SpectrumReport spectrum = hyperfill::singular_spectrum(z);
  int zero_rows = 0;
  const double unif = hyperfill::uniformity(z, &zero_rows);

  Run run(o.out, "diagnose", o.seed);
  run.set("in", o.in);
  run.set("embeddings", o.embeddings);

  const fs::path csv = run.artifact("spectrum.csv");
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "index,sigma,relative\n";
  for (long i = 0; i < spectrum.singular_values.size(); ++i)
    out << i << ',' << spectrum.singular_values(i) << ',' << spectrum.relative(i) << '\n';
  if (!out) throw std::runtime_error("failed writing " + csv.string());

  json geometry;
  geometry["uniformity"] = unif;
  geometry["effective_rank"] = spectrum.effective_rank;
  geometry["zero_norm_rows"] = zero_rows;
  geometry["alignment"] = nullptr;
  if (ds.has_labels()) geometry["alignment"] = hyperfill::alignment(z, ds.labels);
  const fs::path gpath = run.artifact("geometry.json");
  std::ofstream gout(gpath);
  if (!gout) throw std::runtime_error("cannot write " + gpath.string());
  gout << geometry.dump(2) << '\n';
  if (!gout) throw std::runtime_error("failed writing " + gpath.string());
  run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised hypergraph learning via hyperedge filling"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value config file ('#' comments); keys live under a [command] section; "
                 "command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Sample a two-class synthetic hypergraph");
  g->add_option("--N", gen.n, "Nodes per class")->required();
  g->add_option("--d", gen.d, "Feature dimension")->required();
  g->add_option("--P", gen.p, "Class affinity in [0, 1]")->required();
  g->add_option("--sizes", gen.sizes, "Hyperedge sizes, e.g. 4x100,3x20")->required();
  g->add_option("--seed", gen.seed, "RNG seed")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->callback([&]() { run_generate(gen); });

  SwapOpts swp;
  auto* s = app.add_subcommand("swap", "Corrupt hypergraph topology by member exchanges");
  s->add_option("--in", swp.in, "Input dataset file")->required();
  s->add_option("--iterations", swp.iterations, "Exchange rounds")->required();
  s->add_option("--seed", swp.seed, "RNG seed")->required();
  s->add_option("--out", swp.out, "Output directory")->required();
  s->callback([&]() { run_swap(swp); });

  TrainOpts tr;
  auto* t = app.add_subcommand("train", "Two-stage self-supervised training");
  t->add_option("--in", tr.in, "Input dataset file")->required();
  t->add_option("--p-v", tr.cfg.p_v, "Feature mask rate")->required();
  t->add_option("--p-e", tr.cfg.p_e, "Hyperedge drop rate")->required();
  t->add_option("--epochs", tr.cfg.filling_epochs, "Hyperedge-filling epochs")->required();
  t->add_option("--warmup-epochs", tr.cfg.warmup_epochs, "Reconstruction warm-up epochs");
  t->add_option("--warmup-mask-rate", tr.cfg.warmup_mask_rate, "Warm-up node mask rate");
  t->add_option("--warmup-edge-drop", tr.cfg.warmup_edge_drop, "Warm-up hyperedge drop rate");
  t->add_option("--lr", tr.cfg.lr, "Adam learning rate");
  t->add_option("--weight-decay", tr.cfg.weight_decay, "Decoupled weight decay");
  t->add_option("--temperature", tr.cfg.temperature, "Cosine temperature");
  t->add_option("--hidden", tr.cfg.hidden_dim, "Encoder hidden width");
  t->add_option("--embed-dim", tr.cfg.embed_dim, "Embedding width");
  t->add_option("--head-hidden", tr.cfg.head_hidden, "Head hidden width (0: embedding width)");
  t->add_option("--head-out", tr.cfg.head_out, "Head output width (0: embedding width)");
  t->add_option("--dropout", tr.cfg.dropout, "Dropout rate");
  t->add_flag("--no-heads", tr.no_heads, "Score embeddings directly, without heads");
  t->add_flag("--static-augmentation", tr.static_augmentation,
              "Draw one augmentation for the whole run instead of one per epoch");
  t->add_option("--seed", tr.cfg.seed, "RNG seed")->required();
  t->add_option("--out", tr.out, "Output directory")->required();
  t->callback([&]() { run_train(tr); });

  EmbedOpts em;
  auto* e = app.add_subcommand("embed", "Write node embeddings for a trained checkpoint");
  e->add_option("--in", em.in, "Input dataset file")->required();
  e->add_option("--checkpoint", em.checkpoint, "Trained checkpoint")->required();
  e->add_option("--seed", em.seed, "Recorded in the manifest; embedding is deterministic");
  e->add_option("--out", em.out, "Output directory")->required();
  e->callback([&]() { run_embed(em); });

  EvalNodeOpts en;
  auto* n = app.add_subcommand("eval-node", "Node classification probes");
  n->add_option("--in", en.in, "Input dataset file")->required();
  n->add_option("--embeddings", en.embeddings, "Probe input CSV (default: raw features)");
  n->add_option("--checkpoint", en.checkpoint, "Also fine-tune this checkpoint's encoder");
  n->add_flag("--random-init", en.random_init,
              "Fine-tune a freshly initialized encoder of the checkpoint's architecture");
  n->add_option("--repeats", en.repeats, "Independent split/seed repetitions");
  n->add_option("--train-ratio", en.train_ratio, "Train fraction");
  n->add_option("--valid-ratio", en.valid_ratio, "Validation fraction");
  n->add_option("--train-per-class", en.train_per_class,
                "Train nodes per class (overrides ratios when > 0)");
  n->add_option("--valid-per-class", en.valid_per_class, "Validation nodes per class");
  n->add_option("--epochs", en.probe.epochs, "Probe epochs");
  n->add_option("--lr", en.probe.lr, "Probe learning rate");
  n->add_option("--weight-decay", en.probe.weight_decay, "Probe weight decay");
  n->add_option("--eval-every", en.probe.eval_every, "Validation cadence in epochs");
  n->add_option("--seed", en.seed, "RNG seed")->required();
  n->add_option("--out", en.out, "Output directory")->required();
  n->callback([&]() { run_eval_node(en); });

  EvalEdgeOpts ee;
  auto* ed = app.add_subcommand("eval-edge", "Hyperedge prediction with size-matched negatives");
  ed->add_option("--in", ee.in, "Input dataset file")->required();
  ed->add_option("--embeddings", ee.embeddings, "Node embedding CSV (default: raw features)");
  ed->add_option("--repeats", ee.repeats, "Independent split/seed repetitions");
  ed->add_option("--train-ratio", ee.train_ratio, "Train fraction of hyperedges");
  ed->add_option("--valid-ratio", ee.valid_ratio, "Validation fraction of hyperedges");
  ed->add_option("--epochs", ee.cfg.epochs, "Classifier epochs");
  ed->add_option("--lr", ee.cfg.lr, "Classifier learning rate");
  ed->add_option("--weight-decay", ee.cfg.weight_decay, "Classifier weight decay");
  ed->add_option("--eval-every", ee.cfg.eval_every, "Validation cadence in epochs");
  ed->add_option("--hidden", ee.cfg.hidden_dim, "Classifier hidden width");
  ed->add_option("--dropout", ee.cfg.dropout, "Classifier dropout rate");
  ed->add_option("--seed", ee.seed, "RNG seed")->required();
  ed->add_option("--out", ee.out, "Output directory")->required();
  ed->callback([&]() { run_eval_edge(ee); });

  TheoryGridOpts tg;
  auto* th = app.add_subcommand("theory-grid",
                                "Closed-form vs Monte Carlo grid for the query-sum condition");
  th->add_option("--S", tg.sizes, "Hyperedge sizes, e.g. 2..8 or 2,4");
  th->add_option("--d", tg.dims, "Feature dimensions, e.g. 2..8");
  th->add_option("--P", tg.affinities, "Affinities, e.g. 0:0.1:1");
  th->add_option("--trials", tg.trials, "Monte Carlo trials per cell");
  th->add_option("--threads", tg.threads, "Worker threads over grid cells");
  th->add_option("--seed", tg.seed, "RNG seed")->required();
  th->add_option("--out", tg.out, "Output directory")->required();
  th->callback([&]() { run_theory_grid(tg); });

  DiagnoseOpts di;
  auto* dg = app.add_subcommand("diagnose", "Embedding spectrum and geometry metrics");
  dg->add_option("--in", di.in, "Input dataset file (labels feed alignment)")->required();
  dg->add_option("--embeddings", di.embeddings, "Node embedding CSV (default: raw features)");
  dg->add_option("--seed", di.seed, "Recorded in the manifest; diagnosis is deterministic");
  dg->add_option("--out", di.out, "Output directory")->required();
  dg->callback([&]() { run_diagnose(di); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
