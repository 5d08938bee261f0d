#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "sgwn/errors.hpp"
#include "sgwn/graph.hpp"

using namespace sgwn;
using namespace sgwn::graph;

namespace {

Graph path2() { return Graph::from_edges(2, std::vector<std::pair<int, int>>{{0, 1}}); }
Graph k3() { return Graph::from_edges(3, std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}}); }

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("laplacian of small graphs") {
  Matrix expect(2, 2);
  expect << 1, -1, -1, 1;
  CHECK(laplacian(path2()).matrix() == expect);

  Matrix e3(3, 3);
  e3 << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  CHECK(laplacian(k3()).matrix() == e3);

  const Graph empty(Matrix::Zero(3, 3));
  CHECK(laplacian(empty).matrix() == Matrix::Zero(3, 3));
  CHECK(laplacian(empty).lambda_max() == 1.0);
}

TEST_CASE("invalid adjacency is rejected") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(Graph{a}, ValidationError);
  Matrix loop = Matrix::Zero(2, 2);
  loop(1, 1) = 1.0;
  CHECK_THROWS_AS(Graph{loop}, ValidationError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = bad(1, 0) = 1.0;
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(Laplacian{bad}, ValidationError);
}

TEST_CASE("eigendecompose known spectra") {
  auto s = eigendecompose(laplacian(path2()));
  CHECK(s.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.eigenvalues(1) == doctest::Approx(2.0).epsilon(1e-12));
  auto t = eigendecompose(laplacian(k3()));
  CHECK(std::abs(t.eigenvalues(0)) < 1e-12);
  CHECK(t.eigenvalues(1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(t.eigenvalues(2) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("eigendecompose reconstructs random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_connected_adjacency(10, 0.3, rng);
    const Laplacian lap = laplacian(Graph(a));
    CHECK(lap.matrix() == oracle::laplacian(a));
    const Spectrum s = eigendecompose(lap);
    const Matrix& u = s.eigenvectors;
    CHECK((u.transpose() * u - Matrix::Identity(10, 10)).norm() < 1e-10);
    const Matrix rec = u * s.eigenvalues.asDiagonal() * u.transpose();
    CHECK(oracle::rel_err(rec, lap.matrix()) < 1e-8);
    CHECK(s.eigenvalues(0) <= 1e-10);
    for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) {
      CHECK(s.eigenvalues(i) >= s.eigenvalues(i - 1));
    }
    // PSD under an independent solver, constant vector in the kernel.
    CHECK(oracle::eig(lap.matrix()).values.minCoeff() >= -1e-10);
    CHECK((lap.matrix() * Vector::Ones(10)).norm() <= 1e-12 * std::sqrt(10.0));
  }
}

TEST_CASE("eigendecompose refuses oversized graphs") {
  const Graph g(Matrix::Zero(4, 4));
  CHECK_THROWS_AS(eigendecompose(laplacian(g), 3), CapacityError);
}

TEST_CASE("lambda_max estimate") {
  CHECK(laplacian(path2()).lambda_max() == doctest::Approx(2.0 * 1.01).epsilon(1e-8));
  CHECK(laplacian(k3()).lambda_max() == doctest::Approx(3.0 * 1.01).epsilon(1e-8));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_connected_adjacency(12, 0.25, rng);
    const double exact = oracle::eig(oracle::laplacian(a)).values.maxCoeff();
    const double est = estimate_lambda_max(oracle::laplacian(a)) / kLambdaMaxInflation;
    CHECK(std::abs(est - exact) <= 0.01 * exact);
  }
}

TEST_CASE("lambda_max non-convergence carries the last iterate") {
  std::mt19937_64 rng(3);
  const Matrix l = oracle::laplacian(oracle::random_connected_adjacency(12, 0.3, rng));
  try {
    estimate_lambda_max(l, 1e-14, 1);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::isfinite(e.last_iterate()));
    CHECK(e.last_iterate() > 0.0);
  }
}

TEST_CASE("radius graph examples") {
  Matrix same(4, 6);
  for (int i = 0; i < 4; ++i) same.row(i) << 1, 2, 3, 4, 5, 6;
  CHECK(radius_graph(same, 0.5).edge_count() == 6);

  const Matrix ortho = Matrix::Identity(4, 4);
  CHECK(radius_graph(ortho, 0.1).edge_count() == 0);

  Matrix zero = Matrix::Ones(3, 4);
  zero.row(1).setZero();
  try {
    radius_graph(zero, 0.5, {"a", "b", "c"});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  CHECK_THROWS_AS(radius_graph(same, 1.5), ValidationError);
}

TEST_CASE("radius graph matches brute-force cosine") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    // A common component makes both sides of the threshold likely.
    const Matrix base = oracle::random_matrix(1, 16, rng);
    Matrix m = base.replicate(10, 1) + 0.6 * oracle::random_matrix(10, 16, rng);
    const Graph g = radius_graph(m, 0.9);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        const bool expect = i != j && oracle::brute_cosine(m.row(i), m.row(j)) > 0.9;
        CHECK((g.adjacency()(i, j) == 1.0) == expect);
      }
    }
  }
}

TEST_CASE("radius graph is scale invariant and permutation consistent") {
  std::mt19937_64 rng(8);
  const Matrix base = oracle::random_matrix(1, 20, rng);
  Matrix m = base.replicate(8, 1) + 0.7 * oracle::random_matrix(8, 20, rng);
  const Graph g = radius_graph(m, 0.8);

  Matrix scaled = m;
  scaled.row(3) *= 17.5;
  scaled.row(5) *= 0.001;
  CHECK(radius_graph(scaled, 0.8) == g);

  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix pm(8, 20);
  for (int k = 0; k < 8; ++k) pm.row(k) = m.row(perm[k]);
  CHECK(radius_graph(pm, 0.8) == g.permuted(perm));
}

TEST_CASE("max-min normalization") {
  const std::vector<double> a{0, 5, 10};
  CHECK(max_min_normalize(a) == std::vector<double>{0, 0.5, 1});
  const std::vector<double> c{3, 3, 3};
  CHECK(max_min_normalize(c) == std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(max_min_normalize(std::vector<double>{}), ValidationError);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 4);
  std::vector<double> r(200);
  for (auto& x : r) x = g(rng);
  const auto n = max_min_normalize(r);
  CHECK(*std::min_element(n.begin(), n.end()) == 0.0);
  CHECK(*std::max_element(n.begin(), n.end()) == 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[i] < r[j]) CHECK(n[i] <= n[j]);
    }
  }
}

TEST_CASE("sliding windows") {
  auto g = std::make_shared<const Graph>(Matrix::Zero(3, 3));
  std::mt19937_64 rng(2);
  const Matrix m = oracle::random_matrix(3, 2500, rng);
  CHECK(sliding_window_graphs(m.leftCols(2048), 1024, g).size() == 2);
  const auto one = sliding_window_graphs(m.leftCols(1024), 1024, g);
  REQUIRE(one.size() == 1);
  CHECK(one[0].features == m.leftCols(1024));
  const auto two = sliding_window_graphs(m, 1024, g, 7);
  REQUIRE(two.size() == 2);
  CHECK(two[1].features == m.middleCols(1024, 1024));
  CHECK(two[1].label == 7);
  CHECK_THROWS_AS(sliding_window_graphs(m.leftCols(100), 1024, g), ValidationError);
}

TEST_CASE("graph json round trip") {
  const Graph g = Graph::from_edges(4, std::vector<std::pair<int, int>>{{0, 1}, {1, 3}},
                                    {"a", "b", "c", "d"});
  const auto doc = g.to_json();
  CHECK(doc["edges"] == nlohmann::json::parse("[[0,1],[1,3]]"));
  CHECK(Graph::from_json(doc) == g);
  auto bad = doc;
  bad["edges"] = nlohmann::json::parse("[[1,0]]");
  CHECK_THROWS_AS(Graph::from_json(bad), ValidationError);
}

}
