#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sgwn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace graph {

/// Undirected, unweighted sensor network. Adjacency entries are 0 or 1, the
/// matrix is symmetric and has a zero diagonal.
class Graph {
 public:
  explicit Graph(Matrix adjacency, std::vector<std::string> labels = {});

  static Graph from_edges(int num_nodes, std::span<const std::pair<int, int>> edges,
                          std::vector<std::string> labels = {});

  int num_nodes() const noexcept { return static_cast<int>(adjacency_.rows()); }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Edge list with i < j, lexicographic order.
  std::vector<std::pair<int, int>> edges() const;
  std::size_t edge_count() const;
  Vector degrees() const;

  /// Relabels nodes so that new node k is old node perm[k].
  Graph permuted(std::span<const int> perm) const;

  nlohmann::json to_json() const;
  static Graph from_json(const nlohmann::json& doc);

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.adjacency_ == b.adjacency_ && a.labels_ == b.labels_;
  }

 private:
  Matrix adjacency_;
  std::vector<std::string> labels_;
};

/// Combinatorial Laplacian L = D - A with a cached spectral bound.
class Laplacian {
 public:
  /// Validates symmetry and zero row sums, then estimates lambda_max.
  explicit Laplacian(Matrix matrix);

  const Matrix& matrix() const noexcept { return matrix_; }
  int num_nodes() const noexcept { return static_cast<int>(matrix_.rows()); }

  /// Upper bound used to design kernels: the inflated power-iteration estimate,
  /// or 1.0 when the graph has no edges (spectrum {0}).
  double lambda_max() const noexcept { return lambda_max_; }

 private:
  Matrix matrix_;
  double lambda_max_;
};

struct Spectrum {
  Vector eigenvalues;  // ascending, clamped at zero
  Matrix eigenvectors; // columns orthonormal
};

struct GraphSample {
  std::shared_ptr<const Graph> graph;
  Matrix features;  // N x d
  int label = -1;
};

inline constexpr int kDefaultOracleLimit = 256;
inline constexpr double kLambdaMaxInflation = 1.01;

Laplacian laplacian(const Graph& graph);

/// Dense symmetric eigendecomposition. Test oracle only; refuses N > limit.
Spectrum eigendecompose(const Laplacian& lap, int limit = kDefaultOracleLimit);

/// Power iteration. The returned value is the converged Rayleigh quotient times
/// kLambdaMaxInflation. Throws NumericalError (carrying the last quotient) when
/// the residual test fails after max_iter steps.
double estimate_lambda_max(const Matrix& lap, double tol = 1e-10, int max_iter = 100000);

/// Edge (i, j), i != j, iff cosine similarity of rows i and j exceeds epsilon.
Graph radius_graph(const Matrix& measurements, double epsilon,
                   std::vector<std::string> labels = {});

double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// (x - min) / (max - min); a constant input maps to zeros.
std::vector<double> max_min_normalize(std::span<const double> signal);

/// Row-wise max_min_normalize.
Matrix normalize_rows(const Matrix& measurements);

/// Non-overlapping windows of `window` columns; floor(P / window) samples.
std::vector<GraphSample> sliding_window_graphs(const Matrix& measurements, int window,
                                               std::shared_ptr<const Graph> structure,
                                               int label = -1);

}  // namespace graph
}  // namespace sgwn
