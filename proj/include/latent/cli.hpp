#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latent/eval.hpp"
#include "latent/io.hpp"
#include "latent/pipeline.hpp"

// The `latent` command-line tool. Exit status: 0 success, 2 usage error, 1 runtime error.

namespace latent {

// Bad flag values detected after parsing; reported with exit status 2.
struct UsageError : Error {
  using Error::Error;
};

namespace cli_detail {

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-")
    out << text;
  else
    write_text(path, text);
}

inline std::vector<std::size_t> all_ids(std::size_t n) {
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Data lines of a text file; blank lines and # comments dropped.
inline std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

// Two whitespace-separated integer fields.
inline std::pair<long long, long long> parse_pair(const std::string& line, const std::string& path, std::size_t idx) {
  std::istringstream s(line);
  long long a = 0, b = 0;
  std::string rest;
  if (!(s >> a >> b) || (s >> rest)) throw Error(path + ": expected two integers on data line " + std::to_string(idx + 1));
  return {a, b};
}

// Options shared by every command that recovers coordinates.
struct RecoveryFlags {
  std::optional<std::size_t> m;
  std::size_t dim = 2;
  std::string engine = "direct";
  std::string unreachable = "nearest-reverse";
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void attach(CLI::App* app) {
    app->add_option("--m", m, "landmark count (default min(500, floor(n/2)))");
    app->add_option("--dim", dim, "latent dimension")->capture_default_str();
    app->add_option("--engine", engine, "direct | mp")->capture_default_str()->check(CLI::IsMember({"direct", "mp"}));
    app->add_option("--unreachable", unreachable, "nodes no landmark reaches: error | nearest-reverse")
        ->capture_default_str()
        ->check(CLI::IsMember({"error", "nearest-reverse"}));
    app->add_option("--threads", threads, "worker threads (results do not depend on it)")->capture_default_str();
  }

  RecoveryConfig config() const {
    if (threads == 0) throw UsageError("--threads must be at least 1");
    RecoveryConfig cfg;
    cfg.m = m;
    cfg.dim = dim;
    cfg.seed = seed;
    cfg.engine = parse_engine(engine);
    cfg.unreachable = parse_unreachable_policy(unreachable);
    cfg.threads = threads;
    return cfg;
  }
};

struct DatasetFlags {
  std::string kind = "two-moon";
  std::size_t n = 3000;
  std::size_t d = 2;
  std::optional<std::size_t> k;
  double noise = kDefaultNoise;

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "two-moon | uniform-square | gaussian-blobs")
        ->capture_default_str()
        ->check(CLI::IsMember({"two-moon", "uniform-square", "gaussian-blobs"}));
    app->add_option("--d", d, "latent dimension of the generator")->capture_default_str();
    app->add_option("--k", k, "neighbors per node (default paper_k(n))");
    app->add_option("--noise", noise, "two-moon noise standard deviation")->capture_default_str();
  }

  DatasetSpec spec() const {
    if (noise < 0.0) throw UsageError("--noise must be nonnegative");
    DatasetSpec s;
    s.kind = parse_hidden_kind(kind);
    s.n = n;
    s.d = d;
    s.k = k;
    s.noise = noise;
    return s;
  }
};

inline json structure_json(const DirectedGraph& g) {
  std::size_t lo = g.node_count() ? g.out_degree(0) : 0, hi = lo;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    lo = std::min(lo, g.out_degree(v));
    hi = std::max(hi, g.out_degree(v));
  }
  json j;
  j["n"] = g.node_count();
  j["arc_count"] = g.arc_count();
  j["fingerprint"] = graph_fingerprint(g);
  j["weakly_connected"] = is_weakly_connected(g);
  j["strongly_connected"] = is_strongly_connected(g);
  j["min_out_degree"] = lo;
  j["max_out_degree"] = hi;
  return j;
}

inline json summary_json(const ExperimentReport& rep, const char* role) {
  std::vector<double> test, all, ratio, acc_gap;
  for (const auto& r : rep.runs) {
    if (r.role != role) continue;
    if (r.d_g_test) test.push_back(*r.d_g_test);
    if (r.d_g_all) all.push_back(*r.d_g_all);
    if (r.d_g_test && r.variance_test) ratio.push_back(*r.d_g_test / *r.variance_test);
    if (r.accuracy_recovered && r.accuracy_baseline) acc_gap.push_back(*r.accuracy_recovered - *r.accuracy_baseline);
  }
  json j;
  j["role"] = role;
  j["count"] = test.size();
  j["median_d_g_test"] = test.empty() ? json(nullptr) : json(median(test));
  j["mean_d_g_test"] = test.empty() ? json(nullptr) : json(mean(test));
  j["median_d_g_all"] = all.empty() ? json(nullptr) : json(median(all));
  j["median_test_variance_ratio"] = ratio.empty() ? json(nullptr) : json(median(ratio));
  j["median_accuracy_gap"] = acc_gap.empty() ? json(nullptr) : json(median(acc_gap));
  return j;
}

inline std::vector<std::uint64_t> parse_seed_list(const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw UsageError("--seeds needs at least one seed");
  return seeds;
}

}  // namespace cli_detail

/**
 * Runs the tool on argv. Data goes to --out files (or `out` for "-"),
 * messages to `err`.
 */
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Recover hidden node coordinates from the structure of a geometric graph", "latent"};
  app.require_subcommand(1);
  bool timing = false;

  // generate
  auto* gen = app.add_subcommand("generate", "sample hidden coordinates and build their kNN graph");
  DatasetFlags gen_ds;
  std::uint64_t gen_seed = 0;
  bool gen_paper_k = false;
  std::string gen_out;
  std::size_t gen_threads = 1;
  gen_ds.attach(gen);
  gen->get_option("--kind")->required();
  gen->add_option("--n", gen_ds.n, "node count")->required();
  gen->add_flag("--paper-k", gen_paper_k, "k = floor(sqrt(n) ln(n) / 10) (the default)");
  gen->get_option("--k")->excludes("--paper-k");
  gen->add_option("--seed", gen_seed, "random seed")->required();
  gen->add_option("--out", gen_out, "dataset JSON (- for standard output)")->required();
  gen->add_option("--threads", gen_threads, "worker threads")->capture_default_str();

  // recover
  auto* rec = app.add_subcommand("recover", "recover coordinates of a dataset's graph");
  RecoveryFlags rec_flags;
  std::string rec_in, rec_out, rec_config_out;
  std::optional<double> rec_kappa;
  bool rec_auto = false;
  std::optional<std::uint64_t> rec_split_seed;
  rec_flags.attach(rec);
  rec->add_option("--in", rec_in, "dataset JSON")->required();
  auto* kappa_opt = rec->add_option("--kappa", rec_kappa, "fixed kappa (default 1)");
  rec->add_flag("--kappa-auto", rec_auto, "fit kappa and a rigid map on a 70% split of the true coordinates")
      ->excludes(kappa_opt);
  rec->add_option("--split-seed", rec_split_seed, "seed of the train/test split (default --seed)");
  rec->add_option("--seed", rec_flags.seed, "random seed")->required();
  rec->add_option("--out", rec_out, "coordinates CSV (- for standard output)")->required();
  rec->add_option("--config-out", rec_config_out, "resolved configuration JSON (default <out>.config.json)");

  // eval
  auto* ev = app.add_subcommand("eval", "score recovered coordinates against a dataset");
  std::string ev_in, ev_rec, ev_out;
  std::optional<std::uint64_t> ev_split_seed;
  std::optional<std::size_t> ev_k;
  ev->add_option("--in", ev_in, "dataset JSON")->required();
  ev->add_option("--recovered", ev_rec, "coordinates CSV")->required();
  ev->add_option("--out", ev_out, "metrics JSON (- for standard output)")->required();
  ev->add_option("--split-seed", ev_split_seed, "split seed (default: from <recovered>.config.json, else 0)");
  ev->add_option("--k", ev_k, "neighbors for the reconstruction score (default: the dataset's k)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "run the transductive or inductive experiment");
  ex->require_subcommand(1);
  ex->add_flag("--timing", timing, "include wall-clock seconds (makes output run-dependent)");

  auto* tr = ex->add_subcommand("transductive", "one graph per seed, 70/30 node split");
  DatasetFlags tr_ds;
  RecoveryFlags tr_flags;
  std::vector<std::uint64_t> tr_seeds{1};
  std::optional<std::uint64_t> tr_split_seed;
  std::string tr_out;
  tr_ds.attach(tr);
  tr_flags.attach(tr);
  tr->add_option("--n", tr_ds.n, "node count")->capture_default_str();
  tr->add_option("--seeds", tr_seeds, "one run per seed")->delimiter(',')->capture_default_str();
  tr->add_option("--split-seed", tr_split_seed, "split seed (default: the run's seed)");
  tr->add_option("--out", tr_out, "report JSON (- for standard output)")->required();
  tr->add_flag("--timing", timing, "include wall-clock seconds");

  auto* in = ex->add_subcommand("inductive", "fit kappa(n) on small graphs, test on a larger one");
  DatasetFlags in_ds;
  RecoveryFlags in_flags;
  std::vector<std::size_t> in_sizes{1000, 2000, 3000};
  std::size_t in_test = 6000;
  std::vector<std::uint64_t> in_seeds{1, 2, 3};
  bool in_compare = false;
  std::string in_out;
  in_ds.attach(in);
  in_flags.attach(in);
  in->add_option("--train-sizes", in_sizes, "training graph sizes")->delimiter(',')->capture_default_str();
  in->add_option("--test-size", in_test, "test graph size")->capture_default_str();
  in->add_option("--seeds", in_seeds, "seeds")->delimiter(',')->capture_default_str();
  in->add_flag("--compare-transductive", in_compare, "also run the transductive setting at the test size");
  in->add_option("--out", in_out, "report JSON (- for standard output)")->required();
  in->add_flag("--timing", timing, "include wall-clock seconds");

  // import-edgelist
  auto* im = app.add_subcommand("import-edgelist", "turn a whitespace-separated edge list into a dataset");
  std::string im_edges, im_out;
  std::optional<std::string> im_labels;
  std::optional<std::size_t> im_n;
  im->add_option("--edges", im_edges, "lines 'tail head' with 0-based ids; # starts a comment")->required();
  im->add_option("--labels", im_labels, "lines 'node label'");
  im->add_option("--n", im_n, "node count (default: largest id + 1)");
  im->add_option("--out", im_out, "dataset JSON (- for standard output)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*gen) {
      DatasetSpec spec = gen_ds.spec();
      spec.seed = gen_seed;
      if (gen_ds.k) spec.k = gen_ds.k;
      const Dataset ds = generate_dataset(spec, std::max<std::size_t>(gen_threads, 1));
      DatasetFile file;
      file.graph = ds.graph;
      file.d = ds.hidden.z.cols();
      file.z = ds.hidden.z;
      if (!ds.hidden.labels.empty()) file.labels = ds.hidden.labels;
      file.provenance = {std::string(to_string(spec.kind)), gen_seed, ds.k, spec.noise};
      emit(gen_out, dump(dataset_to_json(file)), out);
      return 0;
    }

    if (*rec) {
      if (rec_kappa && !(*rec_kappa > 0.0)) throw UsageError("kappa must be positive");
      RecoveryConfig cfg = rec_flags.config();
      const DatasetFile ds = load_dataset(rec_in);
      const std::size_t n = ds.graph.node_count();
      cfg.kappa_model = KappaModel::fixed(rec_kappa.value_or(1.0));
      if (rec_auto && !ds.z) throw UsageError("--kappa-auto needs true coordinates (z) in the dataset");

      Recovery r = recover_features(ds.graph, cfg);
      json meta;
      meta["schema_version"] = kSchemaVersion;
      meta["command"] = "recover";
      meta["input"] = rec_in;
      meta["graph_fingerprint"] = graph_fingerprint(ds.graph);
      meta["config"] = config_to_json(cfg, n);
      Matrix coords = r.coordinates;
      if (rec_auto) {
        const std::uint64_t split_seed = rec_split_seed.value_or(cfg.seed);
        const Split split = split_nodes(n, kTrainFraction, split_seed);
        const double kappa = fit_kappa_transductive(r.coordinates, select_rows(*ds.z, split.train), split.train);
        coords = fit_rigid(*ds.z, r.coordinates, split.train, true).apply(r.coordinates);
        meta["kappa"] = {{"mode", "auto"}, {"value", kappa}};
        meta["split"] = {{"seed", split_seed}, {"train_fraction", kTrainFraction}, {"train_count", split.train.size()}};
        meta["alignment"] = "scaled rigid map fitted on training nodes, applied to all nodes";
      } else {
        meta["kappa"] = {{"mode", "fixed"}, {"value", cfg.kappa_model.kappa}};
        meta["split"] = nullptr;
        meta["alignment"] = "none";
      }
      meta["landmarks"] = r.landmarks.ids;
      meta["diagnostics"] = diagnostics_to_json(r.diagnostics);
      emit(rec_out, coordinates_to_csv(coords), out);
      const std::string config_path =
          !rec_config_out.empty() ? rec_config_out : (rec_out == "-" ? std::string() : rec_out + ".config.json");
      if (!config_path.empty()) write_text(config_path, dump(meta));
      return 0;
    }

    if (*ev) {
      const DatasetFile ds = load_dataset(ev_in);
      const Matrix coords = coordinates_from_csv(read_text(ev_rec));
      const std::size_t n = ds.graph.node_count();
      if (coords.rows() != n)
        throw Error("recovered coordinates have " + std::to_string(coords.rows()) + " rows, dataset has " +
                    std::to_string(n) + " nodes");

      std::uint64_t split_seed = 0;
      std::string split_source = "default";
      const std::string sidecar = ev_rec + ".config.json";
      if (ev_split_seed) {
        split_seed = *ev_split_seed;
        split_source = "flag";
      } else if (std::filesystem::exists(sidecar)) {
        const json meta = json::parse(read_text(sidecar));
        if (meta.contains("split") && meta["split"].is_object()) {
          split_seed = meta["split"]["seed"].get<std::uint64_t>();
          split_source = "recover";
        } else if (meta.contains("config")) {
          split_seed = meta["config"]["seed"].get<std::uint64_t>();
          split_source = "recover";
        }
      }
      const Split split = split_nodes(n, kTrainFraction, split_seed);
      const auto all = all_ids(n);

      json j;
      j["schema_version"] = kSchemaVersion;
      j["command"] = "eval";
      j["inputs"] = {{"dataset", ev_in}, {"recovered", ev_rec}};
      j["structure"] = structure_json(ds.graph);
      j["split"] = {{"seed", split_seed}, {"source", split_source}, {"train_fraction", kTrainFraction}};
      j["alignment"] = "rigid map without scaling, fitted on training nodes, applied to all nodes; d_g uses all nodes";
      if (ds.z) {
        if (ds.z->cols() != coords.cols()) throw Error("recovered dimension differs from the dataset's");
        const RigidTransform map = fit_rigid(*ds.z, coords, split.train, false);
        const Matrix aligned = map.apply(coords);
        j["d_g"] = d_g(*ds.z, coords);
        j["d_g_train"] = mean_sq_error(*ds.z, aligned, split.train);
        j["d_g_test"] = mean_sq_error(*ds.z, aligned, split.test);
        j["d_g_all"] = mean_sq_error(*ds.z, aligned, all);
        j["variance_test"] = centered_variance(*ds.z, split.test);
      } else {
        for (const char* key : {"d_g", "d_g_train", "d_g_test", "d_g_all", "variance_test"}) j[key] = nullptr;
      }
      std::size_t k = 0;
      if (ev_k) {
        k = *ev_k;
      } else if (ds.provenance.k) {
        k = *ds.provenance.k;
      } else {
        k = std::max<std::size_t>(1, (ds.graph.arc_count() + n / 2) / n);
      }
      if (k >= n) throw UsageError("--k must be smaller than the node count");
      j["reconstruction_k"] = k;
      j["reconstruction_score"] = reconstruction_score(coords, ds.graph, k);
      const LogisticHyper hyper;
      j["classifier"] = {{"learning_rate", hyper.learning_rate}, {"epochs", hyper.epochs}, {"l2", hyper.l2}};
      if (ds.labels) {
        j["accuracy_recovered"] = logistic_eval(coords, *ds.labels, split.train, split.test, hyper);
        j["accuracy_baseline"] =
            logistic_eval(make_node_features(ds.graph, {}), *ds.labels, split.train, split.test, hyper);
      } else {
        j["accuracy_recovered"] = nullptr;
        j["accuracy_baseline"] = nullptr;
      }
      emit(ev_out, dump(j), out);
      return 0;
    }

    if (*tr) {
      DatasetSpec spec = tr_ds.spec();
      RecoveryConfig cfg = tr_flags.config();
      ExperimentReport rep;
      for (std::uint64_t seed : parse_seed_list(tr_seeds)) {
        spec.seed = seed;
        cfg.seed = seed;
        ExperimentReport one = run_transductive(spec, cfg, tr_split_seed.value_or(seed));
        if (rep.runs.empty()) rep = one;
        else rep.runs.insert(rep.runs.end(), one.runs.begin(), one.runs.end());
      }
      json j = report_to_json(rep, timing);
      j["command"] = "experiment transductive";
      j["seeds"] = tr_seeds;
      j["split_seed"] = tr_split_seed ? json(*tr_split_seed) : json("run seed");
      j["summary"] = json::array({summary_json(rep, "transductive")});
      emit(tr_out, dump(j), out);
      return 0;
    }

    if (*in) {
      DatasetSpec spec = in_ds.spec();
      RecoveryConfig cfg = in_flags.config();
      const auto seeds = parse_seed_list(in_seeds);
      ExperimentReport rep = run_inductive(in_sizes, in_test, spec, cfg, seeds);
      if (in_compare) {
        for (std::uint64_t seed : seeds) {
          DatasetSpec s = spec;
          s.n = in_test;
          s.seed = seed;
          RecoveryConfig c = cfg;
          c.seed = seed;
          auto one = run_transductive(s, c, seed);
          rep.runs.insert(rep.runs.end(), one.runs.begin(), one.runs.end());
        }
      }
      json j = report_to_json(rep, timing);
      j["command"] = "experiment inductive";
      j["train_sizes"] = in_sizes;
      j["test_size"] = in_test;
      j["seeds"] = seeds;
      json summary = json::array({summary_json(rep, "test")});
      if (in_compare) {
        summary.push_back(summary_json(rep, "transductive"));
        const double ind = summary[0]["mean_d_g_test"].get<double>();
        const double trans = summary[1]["mean_d_g_test"].get<double>();
        j["inductive_to_transductive_ratio"] = ind / trans;
      }
      j["summary"] = std::move(summary);
      emit(in_out, dump(j), out);
      return 0;
    }

    if (*im) {
      const auto lines = read_lines(im_edges);
      std::vector<Arc> arcs;
      std::size_t max_id = 0;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto [a, b] = parse_pair(lines[i], im_edges, i);
        if (a < 0 || b < 0) throw Error(im_edges + ": node ids must be nonnegative");
        arcs.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
        max_id = std::max({max_id, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
      }
      const std::size_t n = im_n ? *im_n : (arcs.empty() ? 0 : max_id + 1);
      DatasetFile file;
      file.graph = build_graph(n, arcs);
      file.provenance.generator = "edge-list";
      if (im_labels) {
        std::vector<std::optional<int>> labels(n);
        const auto label_lines = read_lines(*im_labels);
        for (std::size_t i = 0; i < label_lines.size(); ++i) {
          const auto [v, y] = parse_pair(label_lines[i], *im_labels, i);
          if (v < 0 || static_cast<std::size_t>(v) >= n) throw Error(*im_labels + ": node id out of range");
          if (y < 0) throw Error(*im_labels + ": labels must be nonnegative");
          labels[static_cast<std::size_t>(v)] = static_cast<int>(y);
        }
        std::vector<int> dense(n);
        for (std::size_t v = 0; v < n; ++v) {
          if (!labels[v]) throw Error(*im_labels + ": no label for node " + std::to_string(v));
          dense[v] = *labels[v];
        }
        file.labels = std::move(dense);
      }
      emit(im_out, dump(dataset_to_json(file)), out);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace latent
