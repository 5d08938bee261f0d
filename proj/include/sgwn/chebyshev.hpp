#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "sgwn/graph.hpp"
#include "sgwn/kernels.hpp"

namespace sgwn::chebyshev {

/// max(500, 8 (K + 1)) midpoint nodes on [0, pi].
int default_quad_points(int order);

/// Shifted Chebyshev coefficients c_0..c_K of f on [0, lambda_max], by the
/// midpoint rule in theta. The series is c_0 / 2 + sum_{k>=1} c_k T_k.
/// quad_points <= 0 selects default_quad_points(order).
Vector cheb_coeffs(const std::function<double(double)>& f, double lambda_max, int order,
                   int quad_points = 0);

/// Scalar series value at lambda (shifted argument).
double cheb_eval(const Vector& coeffs, double lambda_max, double lambda);

struct ChebyshevCoefficients {
  std::vector<Vector> bands;  // each of length order + 1
  int order = 0;
  double lambda_max = 0.0;
};

/// Matrix-free polynomial filter bank over one Laplacian.
class ChebyshevOperator {
 public:
  ChebyshevOperator(ChebyshevCoefficients coeffs, std::shared_ptr<const graph::Laplacian> lap);

  int band_count() const noexcept { return static_cast<int>(coeffs_.bands.size()); }
  int order() const noexcept { return coeffs_.order; }
  int num_nodes() const noexcept { return lap_->num_nodes(); }
  double lambda_max() const noexcept { return coeffs_.lambda_max; }
  const ChebyshevCoefficients& coefficients() const noexcept { return coeffs_; }
  const graph::Laplacian& laplacian() const noexcept { return *lap_; }

  /// All bands in one recurrence pass over the columns of X.
  std::vector<Matrix> apply(const Matrix& x) const;
  Matrix apply_band(int band, const Matrix& x) const;

 private:
  void check_rows(const Matrix& x) const;

  ChebyshevCoefficients coeffs_;
  std::shared_ptr<const graph::Laplacian> lap_;
};

ChebyshevOperator build_operator(const kernels::KernelSpec& spec,
                                 std::shared_ptr<const graph::Laplacian> lap, int order);

/// U f_b(Lambda) U^T for band b. Dense; oracle path.
Matrix exact_band_matrix(const kernels::KernelSpec& spec, const graph::Spectrum& spectrum, int band);

/// Per-band U f_b(Lambda) U^T X.
std::vector<Matrix> exact_apply(const kernels::KernelSpec& spec, const graph::Spectrum& spectrum,
                                const Matrix& x);

}  // namespace sgwn::chebyshev
