#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "gadnr/errors.hpp"
#include "gadnr/graph.hpp"
#include "gadnr/synth.hpp"

using namespace gadnr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("gadnr_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

AttributedGraph triangle() {
  Matrix feats(3, 2);
  for (int i = 0; i < 6; ++i) feats.data[i] = i * 0.5;
  return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, feats, std::nullopt);
}

}  // namespace

TEST_CASE("load_graph parses the canonical formats") {
  const fs::path dir = temp_dir("load");
  write_file(dir / "edges.txt", "# comment line\n0 1\n1 2\n2 0\n");
  write_file(dir / "features.csv", "1.0,2.0\n3.0,4.0\n5.0,6.0\n");
  write_file(dir / "labels.txt", "0\n1\n0\n");

  const AttributedGraph g =
      load_graph(dir / "edges.txt", dir / "features.csv", dir / "labels.txt");
  CHECK(g.num_nodes == 3);
  CHECK(g.num_edges() == 3);
  CHECK(g.features(1, 1) == 4.0);
  REQUIRE(g.labels.has_value());
  CHECK((*g.labels)[1] == 1);
  CHECK(g.num_anomalies() == 1);
}

TEST_CASE("load_graph edge cases and errors") {
  const fs::path dir = temp_dir("load_err");
  write_file(dir / "features.csv", "1\n2\n3\n");

  SUBCASE("empty edge file gives an edgeless graph") {
    write_file(dir / "edges.txt", "");
    const AttributedGraph g = load_graph(dir / "edges.txt", dir / "features.csv");
    CHECK(g.num_nodes == 3);
    CHECK(g.num_edges() == 0);
  }
  SUBCASE("self-loop dropped with a warning count") {
    write_file(dir / "edges.txt", "0 0\n0 1\n");
    GraphBuildStats stats;
    const AttributedGraph g = load_graph(dir / "edges.txt", dir / "features.csv", std::nullopt,
                                         &stats);
    CHECK(g.num_edges() == 1);
    CHECK(stats.dropped_self_loops == 1);
  }
  SUBCASE("directed duplicates are symmetrized away") {
    write_file(dir / "edges.txt", "0 1\n1 0\n");
    GraphBuildStats stats;
    const AttributedGraph g = load_graph(dir / "edges.txt", dir / "features.csv", std::nullopt,
                                         &stats);
    CHECK(g.num_edges() == 1);
    CHECK(stats.dropped_duplicates == 1);
  }
  SUBCASE("malformed edge line reports file and line") {
    write_file(dir / "edges.txt", "0 1\nnot an edge\n");
    CHECK_THROWS_WITH_AS((void)load_graph(dir / "edges.txt", dir / "features.csv"),
                         doctest::Contains("edges.txt:2"), DataError);
  }
  SUBCASE("edge index beyond feature rows") {
    write_file(dir / "edges.txt", "0 7\n");
    CHECK_THROWS_AS((void)load_graph(dir / "edges.txt", dir / "features.csv"), DataError);
  }
  SUBCASE("non-numeric feature") {
    write_file(dir / "edges.txt", "");
    write_file(dir / "bad.csv", "1.0\nx\n2.0\n");
    CHECK_THROWS_WITH_AS((void)load_graph(dir / "edges.txt", dir / "bad.csv"),
                         doctest::Contains("non-numeric"), DataError);
  }
  SUBCASE("label count mismatch") {
    write_file(dir / "edges.txt", "");
    write_file(dir / "labels.txt", "0\n1\n");
    CHECK_THROWS_AS(
        (void)load_graph(dir / "edges.txt", dir / "features.csv", dir / "labels.txt"), DataError);
  }
}

TEST_CASE("save_bundle round-trips bitwise") {
  const fs::path dir = temp_dir("bundle");
  AttributedGraph g = generate_sbm({20, 20}, 0.3, 0.05, 4, 1.0, 99);
  const auto files = save_bundle(g, dir);
  CHECK(files.size() == 4);  // edges, features, labels, manifest

  const AttributedGraph back = load_bundle(dir);
  CHECK(back.num_nodes == g.num_nodes);
  CHECK(back.edges == g.edges);
  CHECK(back.features.data == g.features.data);
  CHECK(back.labels == g.labels);
}

TEST_CASE("save_bundle: 124-node synthetic bundle reloads identically") {
  const fs::path dir = temp_dir("bundle_124");
  const AttributedGraph g = generate_sbm({62, 62}, 0.04, 0.01, 28, 0.5, 124);
  REQUIRE(g.num_nodes == 124);
  const auto files = save_bundle(g, dir);
  CHECK(files.size() >= 3);  // edges, features, labels (+ manifest)
  const AttributedGraph back = load_bundle(dir);
  CHECK(back.num_nodes == 124);
  CHECK(back.edges == g.edges);
  CHECK(back.features.data == g.features.data);
  CHECK(back.labels == g.labels);
}

TEST_CASE("save_bundle without labels emits no label file") {
  const fs::path dir = temp_dir("bundle_nolabel");
  const auto files = save_bundle(triangle(), dir);
  CHECK(files.size() == 3);
  CHECK(!fs::exists(dir / "labels.txt"));
  const AttributedGraph back = load_bundle(dir);
  CHECK(!back.labels.has_value());
}

TEST_CASE("neighbor index") {
  {
    const NeighborIndex idx = build_index(triangle());
    for (int u = 0; u < 3; ++u) CHECK(idx.degree(u) == 2);
  }
  {
    // Star: center 0, leaves 1..5.
    Matrix feats(6, 1);
    const AttributedGraph g =
        make_graph(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}, feats, std::nullopt);
    const NeighborIndex idx = build_index(g);
    CHECK(idx.degree(0) == 5);
    for (int u = 1; u < 6; ++u) CHECK(idx.degree(u) == 1);
    // Adjacency is sorted and symmetric.
    for (int u = 0; u < 6; ++u)
      for (const int* v = idx.begin(u); v != idx.end(u); ++v)
        CHECK(std::find(idx.begin(*v), idx.end(*v), u) != idx.end(*v));
  }
  {
    // Degree sum equals twice the edge count.
    const AttributedGraph g = generate_sbm({30, 30}, 0.2, 0.02, 3, 0.5, 7);
    const NeighborIndex idx = build_index(g);
    int total = 0;
    for (int u = 0; u < g.num_nodes; ++u) total += idx.degree(u);
    CHECK(total == 2 * g.num_edges());
  }
}

TEST_CASE("normalized adjacency: symmetric mode") {
  {
    Matrix feats(2, 1);
    const AttributedGraph g = make_graph(2, {{0, 1}}, feats, std::nullopt);
    const ad::SparseMatrix s = normalized_adjacency(g, AdjacencyMode::symmetric);
    const Matrix dense = s.multiply(Matrix::identity(2));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(dense(i, j) == doctest::Approx(0.5));
  }
  {
    const AttributedGraph g = generate_sbm({25, 25}, 0.2, 0.05, 3, 0.5, 3);
    const ad::SparseMatrix s = normalized_adjacency(g, AdjacencyMode::symmetric);
    const Matrix dense = s.multiply(Matrix::identity(g.num_nodes));
    for (int i = 0; i < g.num_nodes; ++i)
      for (int j = 0; j < i; ++j) CHECK(std::fabs(dense(i, j) - dense(j, i)) < 1e-12);
  }
}

TEST_CASE("normalized adjacency: row-mean mode") {
  Matrix feats(4, 1);
  // Triangle {0,1,2} plus isolated node 3.
  const AttributedGraph g = make_graph(4, {{0, 1}, {1, 2}, {0, 2}}, feats, std::nullopt);
  const ad::SparseMatrix s = normalized_adjacency(g, AdjacencyMode::row_mean);
  const Matrix dense = s.multiply(Matrix::identity(4));
  for (int i = 0; i < 3; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      row_sum += dense(i, j);
      if (j < 3 && j != i) CHECK(dense(i, j) == doctest::Approx(0.5));
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int j = 0; j < 4; ++j) CHECK(dense(3, j) == 0.0);  // isolated: zero row

  // Rows of a random graph's operator sum to 1 wherever a node has neighbors.
  const AttributedGraph r = generate_sbm({20, 20}, 0.15, 0.02, 2, 0.5, 17);
  const NeighborIndex idx = build_index(r);
  const ad::SparseMatrix sr = normalized_adjacency(r, AdjacencyMode::row_mean);
  const Matrix dr = sr.multiply(Matrix::identity(r.num_nodes));
  for (int i = 0; i < r.num_nodes; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < r.num_nodes; ++j) row_sum += dr(i, j);
    if (idx.degree(i) > 0)
      CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
    else
      CHECK(row_sum == 0.0);
  }
}

TEST_CASE("cora bundle statistics when the dataset is supplied") {
  const char* dir = std::getenv("GADNR_CORA_DIR");
  fs::path root = dir ? fs::path(dir) : fs::path("data/cora");
  if (!fs::exists(root / "edges.txt")) {
    MESSAGE("cora bundle not present; skipping");
    return;
  }
  const AttributedGraph g = load_bundle(root);
  CHECK(g.num_nodes == 2708);
  CHECK(g.num_edges() == 11060 / 2);
  CHECK(g.features.cols == 1433);
  const NeighborIndex idx = build_index(g);
  double avg = 0;
  for (int u = 0; u < g.num_nodes; ++u) avg += idx.degree(u);
  avg /= g.num_nodes;
  CHECK(avg == doctest::Approx(4.1).epsilon(0.05));
}
