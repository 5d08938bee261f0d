#pragma once
// Reference computations used only by tests. Everything here is written
// directly from definitions and avoids the library code it checks.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Random graph that is connected: a random spanning path plus extra edges
/// with probability p.
inline Matrix random_connected_adjacency(int n, double p, std::mt19937_64& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    a(perm[i], perm[i + 1]) = 1.0;
    a(perm[i + 1], perm[i]) = 1.0;
  }
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (coin(rng)) a(i, j) = a(j, i) = 1.0;
    }
  }
  return a;
}

inline Matrix laplacian(const Matrix& a) {
  const auto n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && a(i, j) != 0.0) {
        l(i, j) = -1.0;
        l(i, i) += 1.0;
      }
    }
  }
  return l;
}

struct Eig {
  Vector values;
  Matrix vectors;
};

inline Eig eig(const Matrix& l) {
  Eigen::SelfAdjointEigenSolver<Matrix> s(l);
  return {s.eigenvalues(), s.eigenvectors()};
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline double brute_cosine(const Vector& a, const Vector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a(i) * b(i);
    na += a(i) * a(i);
    nb += b(i) * b(i);
  }
  return dot / std::sqrt(na * nb);
}

// Kernels straight from their closed forms.
inline double mexican_g(double x) { return x * std::exp(-x); }
inline double mexican_h(double lambda, double q, double lambda_max) {
  const double r = q * lambda / (0.6 * lambda_max);
  return std::exp(-1.0) * std::exp(-std::pow(r, 4));
}
inline std::vector<double> scales(double lambda_max, double q, int j) {
  const double a1 = 1.0 / lambda_max;
  const double aj = 2.0 * q / lambda_max;
  std::vector<double> out;
  for (int i = 0; i < j; ++i) {
    out.push_back(j == 1 ? a1 : a1 * std::pow(aj / a1, static_cast<double>(i) / (j - 1)));
  }
  return out;
}

/// U diag(f(lambda)) U^T.
inline Matrix spectral_filter(const Eig& e, const std::function<double(double)>& f) {
  Vector d(e.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(std::max(e.values(i), 0.0));
  return e.vectors * d.asDiagonal() * e.vectors.transpose();
}

/// Stacked mexican-hat analysis operator, (J+1) N x N.
inline Matrix mexican_stack(const Eig& e, double lambda_max, int j, double q = 2.0) {
  const auto n = e.values.size();
  const auto a = scales(lambda_max, q, j);
  Matrix w(n * (j + 1), n);
  w.topRows(n) = spectral_filter(e, [&](double l) { return mexican_h(l, q, lambda_max); });
  for (int s = 0; s < j; ++s) {
    w.middleRows(n * (s + 1), n) = spectral_filter(e, [&](double l) { return mexican_g(a[s] * l); });
  }
  return w;
}

/// Central difference of f at x along coordinate i of a flat buffer.
inline double central_difference(const std::function<double()>& f, double* x, double h) {
  const double keep = *x;
  *x = keep + h;
  const double up = f();
  *x = keep - h;
  const double down = f();
  *x = keep;
  return (up - down) / (2.0 * h);
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double denom = b.norm();
  return denom == 0.0 ? a.norm() : (a - b).norm() / denom;
}

}  // namespace oracle
