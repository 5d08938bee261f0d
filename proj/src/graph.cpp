#include "sgwn/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "sgwn/errors.hpp"

namespace sgwn::graph {

namespace {

void validate_adjacency(const Matrix& a) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    throw ValidationError("adjacency must be a non-empty square matrix");
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) {
      throw ValidationError("adjacency has a self-loop at node " + std::to_string(i));
    }
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double v = a(i, j);
      if (v != 0.0 && v != 1.0) {
        throw ValidationError("adjacency entries must be 0 or 1");
      }
      if (v != a(j, i)) {
        throw ValidationError("adjacency is not symmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

Graph::Graph(Matrix adjacency, std::vector<std::string> labels)
    : adjacency_(std::move(adjacency)), labels_(std::move(labels)) {
  validate_adjacency(adjacency_);
  if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != adjacency_.rows()) {
    throw ValidationError("label count does not match node count");
  }
}

Graph Graph::from_edges(int num_nodes, std::span<const std::pair<int, int>> edges,
                        std::vector<std::string> labels) {
  if (num_nodes < 1) throw ValidationError("graph needs at least one node");
  Matrix a = Matrix::Zero(num_nodes, num_nodes);
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= num_nodes || j >= num_nodes) {
      throw ValidationError("edge endpoint out of range");
    }
    if (i == j) throw ValidationError("self-loop edge at node " + std::to_string(i));
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return Graph(std::move(a), std::move(labels));
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < num_nodes(); ++i) {
    for (int j = i + 1; j < num_nodes(); ++j) {
      if (adjacency_(i, j) != 0.0) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t Graph::edge_count() const { return edges().size(); }

Vector Graph::degrees() const { return adjacency_.rowwise().sum(); }

Graph Graph::permuted(std::span<const int> perm) const {
  const int n = num_nodes();
  if (static_cast<int>(perm.size()) != n) throw ValidationError("permutation size mismatch");
  Matrix a(n, n);
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = adjacency_(perm[i], perm[j]);
    if (!labels_.empty()) labels.push_back(labels_[perm[i]]);
  }
  return Graph(std::move(a), std::move(labels));
}

nlohmann::json Graph::to_json() const {
  nlohmann::json doc;
  doc["n"] = num_nodes();
  auto edge_list = nlohmann::json::array();
  for (auto [i, j] : edges()) edge_list.push_back({i, j});
  doc["edges"] = std::move(edge_list);
  doc["labels"] = labels_;
  return doc;
}

Graph Graph::from_json(const nlohmann::json& doc) {
  try {
    const int n = doc.at("n").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("edge must be a pair");
      const int i = e[0].get<int>();
      const int j = e[1].get<int>();
      if (i >= j) throw ValidationError("edges must be listed once with i < j");
      edges.emplace_back(i, j);
    }
    std::vector<std::string> labels;
    if (doc.contains("labels")) labels = doc.at("labels").get<std::vector<std::string>>();
    return from_edges(n, edges, std::move(labels));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed graph document: ") + e.what());
  }
}

Laplacian::Laplacian(Matrix matrix) : matrix_(std::move(matrix)), lambda_max_(1.0) {
  if (matrix_.rows() < 1 || matrix_.rows() != matrix_.cols()) {
    throw ValidationError("Laplacian must be a non-empty square matrix");
  }
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("Laplacian is not symmetric");
  }
  if (matrix_.rowwise().sum().cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("Laplacian rows must sum to zero");
  }
  const double estimate = estimate_lambda_max(matrix_);
  if (estimate > 0.0) lambda_max_ = estimate;
}

Laplacian laplacian(const Graph& graph) {
  const Matrix& a = graph.adjacency();
  Matrix l = -a;
  l.diagonal() = a.rowwise().sum();
  return Laplacian(std::move(l));
}

Spectrum eigendecompose(const Laplacian& lap, int limit) {
  if (lap.num_nodes() > limit) {
    throw CapacityError("eigendecomposition limited to " + std::to_string(limit) +
                        " nodes, got " + std::to_string(lap.num_nodes()));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(lap.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigensolver failed");
  }
  Spectrum s{solver.eigenvalues(), solver.eigenvectors()};
  // Laplacian spectra are nonnegative; negatives here are rounding noise.
  s.eigenvalues = s.eigenvalues.cwiseMax(0.0);
  return s;
}

double estimate_lambda_max(const Matrix& lap, double tol, int max_iter) {
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  const Eigen::Index n = lap.rows();
  std::mt19937_64 rng(0x5eed0000ULL + static_cast<std::uint64_t>(n));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = unit(rng);
  v.normalize();

  double rho = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = lap * v;
    rho = v.dot(w);
    const double residual = (w - rho * v).norm();
    if (!std::isfinite(rho)) throw NumericalError("power iteration diverged", rho);
    if (residual <= tol * std::abs(rho)) return rho * kLambdaMaxInflation;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
  }
  throw NumericalError("power iteration did not converge in " + std::to_string(max_iter) +
                           " iterations",
                       rho);
}

double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

Graph radius_graph(const Matrix& measurements, double epsilon, std::vector<std::string> labels) {
  const Eigen::Index s = measurements.rows();
  if (s < 1) throw ValidationError("radius graph needs at least one sensor");
  if (!(epsilon >= -1.0 && epsilon <= 1.0)) {
    throw ValidationError("epsilon must lie in [-1, 1]");
  }
  Vector norms = measurements.rowwise().norm();
  for (Eigen::Index i = 0; i < s; ++i) {
    if (norms(i) == 0.0) {
      const std::string name = i < static_cast<Eigen::Index>(labels.size())
                                   ? labels[i]
                                   : "sensor " + std::to_string(i);
      throw ValidationError("zero-norm measurement row: " + name);
    }
  }
  Matrix a = Matrix::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = i + 1; j < s; ++j) {
      const double c = measurements.row(i).dot(measurements.row(j)) / (norms(i) * norms(j));
      if (c > epsilon) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  return Graph(std::move(a), std::move(labels));
}

std::vector<double> max_min_normalize(std::span<const double> signal) {
  if (signal.empty()) throw ValidationError("cannot normalize an empty signal");
  const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(signal.size(), 0.0);
  if (range == 0.0) return out;
  std::transform(signal.begin(), signal.end(), out.begin(),
                 [&](double x) { return (x - min) / range; });
  return out;
}

Matrix normalize_rows(const Matrix& measurements) {
  Matrix out(measurements.rows(), measurements.cols());
  std::vector<double> row(measurements.cols());
  for (Eigen::Index i = 0; i < measurements.rows(); ++i) {
    for (Eigen::Index j = 0; j < measurements.cols(); ++j) row[j] = measurements(i, j);
    const auto normalized = max_min_normalize(row);
    for (Eigen::Index j = 0; j < measurements.cols(); ++j) out(i, j) = normalized[j];
  }
  return out;
}

std::vector<GraphSample> sliding_window_graphs(const Matrix& measurements, int window,
                                               std::shared_ptr<const Graph> structure,
                                               int label) {
  if (window < 1) throw ValidationError("window length must be positive");
  if (window > measurements.cols()) {
    throw ValidationError("window length " + std::to_string(window) +
                          " exceeds record length " + std::to_string(measurements.cols()));
  }
  if (structure && structure->num_nodes() != measurements.rows()) {
    throw ValidationError("graph node count does not match sensor count");
  }
  const Eigen::Index count = measurements.cols() / window;
  std::vector<GraphSample> out;
  out.reserve(count);
  for (Eigen::Index m = 0; m < count; ++m) {
    out.push_back({structure, measurements.middleCols(m * window, window), label});
  }
  return out;
}

}  // namespace sgwn::graph
