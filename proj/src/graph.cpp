#include "gadnr/graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gadnr/errors.hpp"

namespace gadnr {

namespace fs = std::filesystem;
using nlohmann::json;

int AttributedGraph::num_anomalies() const {
  if (!labels) return 0;
  int n = 0;
  for (int y : *labels) n += (y != 0);
  return n;
}

AttributedGraph make_graph(int num_nodes, std::vector<std::pair<int, int>> raw_edges,
                           Matrix features, std::optional<std::vector<int>> labels,
                           GraphBuildStats* stats) {
  if (num_nodes < 0) throw DataError("graph: negative node count");
  if (features.rows != num_nodes)
    throw DataError("graph: feature row count " + std::to_string(features.rows) +
                    " does not match node count " + std::to_string(num_nodes));
  if (num_nodes > 0 && features.cols < 1) throw DataError("graph: feature dimension must be >= 1");
  if (!all_finite(features)) throw DataError("graph: non-finite feature value");
  if (labels) {
    if (static_cast<int>(labels->size()) != num_nodes)
      throw DataError("graph: label count does not match node count");
    for (int y : *labels) {
      if (y != 0 && y != 1) throw DataError("graph: label values must be 0 or 1");
    }
  }

  GraphBuildStats local;
  std::vector<std::pair<int, int>> canon;
  canon.reserve(raw_edges.size());
  for (auto [u, v] : raw_edges) {
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
      throw DataError("graph: edge endpoint " + std::to_string(u < 0 || u >= num_nodes ? u : v) +
                      " out of range [0, " + std::to_string(num_nodes) + ")");
    if (u == v) {
      ++local.dropped_self_loops;
      continue;
    }
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  const auto last = std::unique(canon.begin(), canon.end());
  local.dropped_duplicates = static_cast<int>(canon.end() - last);
  canon.erase(last, canon.end());
  if (stats) *stats = local;

  AttributedGraph g;
  g.num_nodes = num_nodes;
  g.edges = std::move(canon);
  g.features = std::move(features);
  g.labels = std::move(labels);
  return g;
}

namespace {

int parse_index(const std::string& tok, const fs::path& file, int line_no) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw DataError(file.string() + ":" + std::to_string(line_no) + ": malformed node index '" +
                    tok + "'");
  return v;
}

std::ifstream open_or_throw(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open file: " + p.string());
  return in;
}

}  // namespace

AttributedGraph load_graph(const fs::path& edge_path, const fs::path& feature_path,
                           const std::optional<fs::path>& label_path, GraphBuildStats* stats) {
  // Features first: the row count defines N.
  Matrix features;
  {
    std::ifstream in = open_or_throw(feature_path);
    std::vector<double> values;
    int cols = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty())
        throw DataError(feature_path.string() + ":" + std::to_string(line_no) +
                        ": empty feature row");
      std::stringstream ss(line);
      std::string cell;
      int this_cols = 0;
      while (std::getline(ss, cell, ',')) {
        try {
          std::size_t pos = 0;
          const double v = std::stod(cell, &pos);
          while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
          if (pos != cell.size()) throw std::invalid_argument(cell);
          values.push_back(v);
        } catch (const std::exception&) {
          throw DataError(feature_path.string() + ":" + std::to_string(line_no) +
                          ": non-numeric feature '" + cell + "'");
        }
        ++this_cols;
      }
      if (cols < 0) cols = this_cols;
      if (this_cols != cols)
        throw DataError(feature_path.string() + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(cols) + " columns, got " +
                        std::to_string(this_cols));
    }
    if (cols <= 0) throw DataError(feature_path.string() + ": no feature rows");
    features.rows = static_cast<int>(values.size()) / cols;
    features.cols = cols;
    features.data = std::move(values);
  }
  const int n = features.rows;

  std::vector<std::pair<int, int>> raw;
  {
    std::ifstream in = open_or_throw(edge_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::stringstream ss(line);
      std::string a, b, extra;
      if (!(ss >> a >> b) || (ss >> extra))
        throw DataError(edge_path.string() + ":" + std::to_string(line_no) +
                        ": expected two node indices");
      raw.emplace_back(parse_index(a, edge_path, line_no), parse_index(b, edge_path, line_no));
    }
  }

  std::optional<std::vector<int>> labels;
  if (label_path) {
    std::ifstream in = open_or_throw(*label_path);
    std::vector<int> ys;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const int y = parse_index(line.substr(0, line.find_last_not_of(" \t\r") + 1), *label_path,
                                line_no);
      if (y != 0 && y != 1)
        throw DataError(label_path->string() + ":" + std::to_string(line_no) +
                        ": label must be 0 or 1");
      ys.push_back(y);
    }
    labels = std::move(ys);
  }

  return make_graph(n, std::move(raw), std::move(features), std::move(labels), stats);
}

std::vector<fs::path> save_bundle(const AttributedGraph& g, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::vector<fs::path> written;

  const auto write_or_throw = [](std::ofstream& out, const fs::path& p) {
    if (!out) throw DataError("cannot write file: " + p.string());
  };

  {
    const fs::path p = dir / "edges.txt";
    std::ofstream out(p);
    write_or_throw(out, p);
    for (auto [u, v] : g.edges) out << u << ' ' << v << '\n';
    written.push_back(p);
  }
  {
    const fs::path p = dir / "features.csv";
    std::ofstream out(p);
    write_or_throw(out, p);
    out.precision(17);
    for (int i = 0; i < g.features.rows; ++i) {
      for (int j = 0; j < g.features.cols; ++j) {
        if (j) out << ',';
        out << g.features(i, j);
      }
      out << '\n';
    }
    written.push_back(p);
  }
  if (g.labels) {
    const fs::path p = dir / "labels.txt";
    std::ofstream out(p);
    write_or_throw(out, p);
    for (int y : *g.labels) out << y << '\n';
    written.push_back(p);
  }
  {
    const fs::path p = dir / "manifest.json";
    std::ofstream out(p);
    write_or_throw(out, p);
    json m;
    m["nodes"] = g.num_nodes;
    m["features"] = g.features.cols;
    m["edges"] = g.num_edges();
    m["has_labels"] = g.labels.has_value();
    out << m.dump(2) << '\n';
    written.push_back(p);
  }
  return written;
}

AttributedGraph load_bundle(const fs::path& dir, GraphBuildStats* stats) {
  const fs::path labels = dir / "labels.txt";
  std::optional<fs::path> label_path;
  if (fs::exists(labels)) label_path = labels;
  return load_graph(dir / "edges.txt", dir / "features.csv", label_path, stats);
}

NeighborIndex build_index(const AttributedGraph& g) {
  NeighborIndex idx;
  idx.offsets.assign(g.num_nodes + 1, 0);
  for (auto [u, v] : g.edges) {
    ++idx.offsets[u + 1];
    ++idx.offsets[v + 1];
  }
  for (int i = 0; i < g.num_nodes; ++i) idx.offsets[i + 1] += idx.offsets[i];
  idx.neighbors.resize(idx.offsets[g.num_nodes]);
  std::vector<int> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
  for (auto [u, v] : g.edges) {
    idx.neighbors[cursor[u]++] = v;
    idx.neighbors[cursor[v]++] = u;
  }
  for (int u = 0; u < g.num_nodes; ++u)
    std::sort(idx.neighbors.begin() + idx.offsets[u], idx.neighbors.begin() + idx.offsets[u + 1]);
  return idx;
}

ad::SparseMatrix normalized_adjacency(const AttributedGraph& g, AdjacencyMode mode) {
  const NeighborIndex idx = build_index(g);
  ad::SparseMatrix s;
  s.rows = s.cols = g.num_nodes;
  s.row_ptr.assign(g.num_nodes + 1, 0);

  if (mode == AdjacencyMode::symmetric) {
    // Self-loops live only inside this operator, never in the edge set.
    std::vector<double> dinv(g.num_nodes);
    for (int u = 0; u < g.num_nodes; ++u) dinv[u] = 1.0 / std::sqrt(idx.degree(u) + 1.0);
    for (int u = 0; u < g.num_nodes; ++u) {
      const int deg = idx.degree(u);
      s.row_ptr[u + 1] = s.row_ptr[u] + deg + 1;
      bool self_written = false;
      for (const int* v = idx.begin(u); v != idx.end(u); ++v) {
        if (!self_written && *v > u) {
          s.col_idx.push_back(u);
          s.vals.push_back(dinv[u] * dinv[u]);
          self_written = true;
        }
        s.col_idx.push_back(*v);
        s.vals.push_back(dinv[u] * dinv[*v]);
      }
      if (!self_written) {
        s.col_idx.push_back(u);
        s.vals.push_back(dinv[u] * dinv[u]);
      }
    }
  } else {
    for (int u = 0; u < g.num_nodes; ++u) {
      const int deg = idx.degree(u);
      s.row_ptr[u + 1] = s.row_ptr[u] + deg;
      for (const int* v = idx.begin(u); v != idx.end(u); ++v) {
        s.col_idx.push_back(*v);
        s.vals.push_back(1.0 / deg);
      }
    }
  }
  return s;
}

}  // namespace gadnr
