#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latent/eval.hpp"
#include "latent/graph.hpp"
#include "latent/matrix.hpp"
#include "latent/pipeline.hpp"

// File formats shared by the command-line tool and external scripts.

namespace latent {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Where a dataset came from. `generator` is a dataset kind or "edge-list".
struct Provenance {
  std::string generator;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<double> noise;
};

struct DatasetFile {
  DirectedGraph graph;
  std::size_t d = 0;  // 0 when there are no hidden coordinates
  std::optional<Matrix> z;
  std::optional<std::vector<int>> labels;
  Provenance provenance;
};

// 17 significant digits, so every double round-trips.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

inline Matrix matrix_from_json(const json& j, std::size_t cols, const char* what) {
  if (!j.is_array()) throw Error(std::string(what) + " must be an array of rows");
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols)
      throw Error(std::string(what) + " row " + std::to_string(r) + " must have " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw Error(std::string(what) + " entries must be numbers");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

inline json dataset_to_json(const DatasetFile& ds) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = ds.graph.node_count();
  j["d"] = ds.d;
  json arcs = json::array();
  for (const Arc& a : ds.graph.arcs()) arcs.push_back({a.tail, a.head});
  j["arcs"] = std::move(arcs);
  if (ds.z) j["z"] = matrix_to_json(*ds.z);
  if (ds.labels) j["labels"] = *ds.labels;
  json p;
  p["generator"] = ds.provenance.generator;
  p["seed"] = ds.provenance.seed ? json(*ds.provenance.seed) : json(nullptr);
  p["k"] = ds.provenance.k ? json(*ds.provenance.k) : json(nullptr);
  p["noise"] = ds.provenance.noise ? json(*ds.provenance.noise) : json(nullptr);
  j["provenance"] = std::move(p);
  return j;
}

inline DatasetFile dataset_from_json(const json& j) {
  auto field = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw Error(std::string("dataset: missing field '") + key + "'");
    return j.at(key);
  };
  if (!j.is_object()) throw Error("dataset: top level must be an object");
  if (field("schema_version") != kSchemaVersion) throw Error("dataset: unsupported schema_version");
  if (!field("n").is_number_unsigned()) throw Error("dataset: n must be a nonnegative integer");
  const auto n = field("n").get<std::size_t>();
  std::vector<Arc> arcs;
  for (const json& a : field("arcs")) {
    if (!a.is_array() || a.size() != 2 || !a[0].is_number_unsigned() || !a[1].is_number_unsigned())
      throw Error("dataset: each arc must be [tail, head] with nonnegative integers");
    arcs.push_back({a[0].get<NodeId>(), a[1].get<NodeId>()});
  }
  DatasetFile ds;
  ds.graph = build_graph(n, arcs);
  ds.d = j.value("d", std::size_t{0});
  if (j.contains("z") && !j["z"].is_null()) {
    ds.z = matrix_from_json(j["z"], ds.d, "z");
    if (ds.z->rows() != n) throw Error("dataset: z must have one row per node");
  }
  if (j.contains("labels") && !j["labels"].is_null()) {
    ds.labels = j["labels"].get<std::vector<int>>();
    if (ds.labels->size() != n) throw Error("dataset: labels must have one entry per node");
  }
  if (j.contains("provenance")) {
    const json& p = j["provenance"];
    ds.provenance.generator = p.value("generator", std::string());
    if (p.contains("seed") && !p["seed"].is_null()) ds.provenance.seed = p["seed"].get<std::uint64_t>();
    if (p.contains("k") && !p["k"].is_null()) ds.provenance.k = p["k"].get<std::size_t>();
    if (p.contains("noise") && !p["noise"].is_null()) ds.provenance.noise = p["noise"].get<double>();
  }
  return ds;
}

inline DatasetFile load_dataset(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error("malformed dataset " + path + ": " + e.what());
  }
  try {
    return dataset_from_json(j);
  } catch (const json::exception& e) {
    throw Error("malformed dataset " + path + ": " + e.what());
  }
}

// Header node_id,c0,...,c{D-1}; one row per node in id order.
inline std::string coordinates_to_csv(const Matrix& coords) {
  std::string out = "node_id";
  for (std::size_t c = 0; c < coords.cols(); ++c) out += ",c" + std::to_string(c);
  out += '\n';
  for (std::size_t v = 0; v < coords.rows(); ++v) {
    out += std::to_string(v);
    for (double x : coords.row(v)) out += "," + format_double(x);
    out += '\n';
  }
  return out;
}

inline Matrix coordinates_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("coordinates CSV is empty");
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "node_id") throw Error("coordinates CSV: header must start with node_id");
  for (std::size_t c = 1; c < header.size(); ++c)
    if (header[c] != "c" + std::to_string(c - 1)) throw Error("coordinates CSV: bad column name " + header[c]);
  const std::size_t dim = header.size() - 1;

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream r(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(r, cell, ',')) cells.push_back(cell);
    if (cells.size() != dim + 1) throw Error("coordinates CSV: wrong field count on line " + std::to_string(line_no));
    std::size_t pos = 0;
    unsigned long long id = 0;
    try {
      id = std::stoull(cells[0], &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != cells[0].size() || id != rows.size())
      throw Error("coordinates CSV: node ids must be 0, 1, 2, ... (line " + std::to_string(line_no) + ")");
    std::vector<double> row(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      try {
        row[c] = std::stod(cells[c + 1], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != cells[c + 1].size())
        throw Error("coordinates CSV: bad number on line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  Matrix m(rows.size(), dim);
  for (std::size_t v = 0; v < rows.size(); ++v)
    for (std::size_t c = 0; c < dim; ++c) m(v, c) = rows[v][c];
  return m;
}

// FNV-1a over (n, sorted arcs); equal graphs give equal fingerprints.
inline std::string graph_fingerprint(const DirectedGraph& g) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(g.node_count());
  for (const Arc& a : g.arcs()) {
    mix(a.tail);
    mix(a.head);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json kappa_to_json(const KappaModel& k) {
  json j;
  if (k.mode == KappaModel::Mode::Fixed) {
    j["mode"] = "fixed";
    j["kappa"] = k.kappa;
  } else {
    j["mode"] = "power-law";
    j["a"] = k.a;
    j["b"] = k.b;
  }
  return j;
}

inline json config_to_json(const RecoveryConfig& cfg, std::optional<std::size_t> n = std::nullopt) {
  json j;
  if (n)
    j["m"] = cfg.landmark_count(*n);
  else
    j["m"] = cfg.m ? json(*cfg.m) : json("min(500, floor(n/2))");
  j["dim"] = cfg.dim;
  j["kappa_model"] = kappa_to_json(cfg.kappa_model);
  j["seed"] = cfg.seed;
  j["engine"] = to_string(cfg.engine);
  j["walk"] = cfg.walk == WalkKind::Lazy ? "lazy" : "plain";
  if (n)
    j["stationary_tolerance"] = cfg.tolerance(*n);
  else
    j["stationary_tolerance"] = cfg.stationary_tolerance ? json(*cfg.stationary_tolerance) : json("1/n^2");
  j["max_stationary_layers"] = cfg.max_stationary_layers;
  j["stationary_floor"] = n ? json(stationary_floor(*n)) : json("1/n");
  j["unreachable"] = to_string(cfg.unreachable);
  j["threads"] = cfg.threads;
  return j;
}

inline json diagnostics_to_json(const RecoveryDiagnostics& d) {
  json j;
  j["landmarks"] = d.landmarks;
  j["kappa"] = d.kappa;
  j["stationary_layers"] = d.stationary_layers;
  j["bellman_ford_layers"] = d.bellman_ford_layers;
  j["propagation_layers"] = d.propagation_layers;
  j["inf_entries"] = d.inf_entries;
  j["inf_landmark_pairs"] = d.inf_landmark_pairs;
  j["floored_nodes"] = d.floored_nodes;
  j["reverse_assigned"] = d.reverse_assigned;
  j["mds_spectrum"] = d.mds_spectrum;
  return j;
}

inline json dataset_spec_to_json(const DatasetSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["n"] = s.n;
  j["d"] = s.d;
  j["noise"] = s.noise;
  j["seed"] = s.seed;
  j["k"] = s.k ? json(*s.k) : json("paper_k(n)");
  return j;
}

inline json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

// Wall-clock time is opt-in so that reports stay byte-stable across runs.
inline json run_to_json(const RunRecord& r, bool timing = false) {
  json j;
  j["role"] = r.role;
  j["n"] = r.n;
  j["k"] = r.k;
  j["m"] = r.m;
  j["seed"] = r.seed;
  j["kappa"] = r.kappa;
  j["d_g_train"] = optional_number(r.d_g_train);
  j["d_g_test"] = optional_number(r.d_g_test);
  j["d_g_all"] = optional_number(r.d_g_all);
  j["variance_test"] = optional_number(r.variance_test);
  j["accuracy_recovered"] = optional_number(r.accuracy_recovered);
  j["accuracy_baseline"] = optional_number(r.accuracy_baseline);
  j["stationary_layers"] = r.stationary_layers;
  if (timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

inline json report_to_json(const ExperimentReport& rep, bool timing = false) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["setting"] = rep.setting;
  j["dataset"] = dataset_spec_to_json(rep.dataset);
  j["config"] = config_to_json(rep.config);
  j["alignment"] = rep.alignment;
  j["classifier"] = {{"learning_rate", rep.classifier.learning_rate},
                     {"epochs", rep.classifier.epochs},
                     {"l2", rep.classifier.l2}};
  json runs = json::array();
  for (const auto& r : rep.runs) runs.push_back(run_to_json(r, timing));
  j["runs"] = std::move(runs);
  j["kappa_curve"] = rep.kappa_curve ? kappa_to_json(*rep.kappa_curve) : json(nullptr);
  return j;
}

// Two-space indent plus trailing newline; the only JSON layout this tool writes.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace latent
