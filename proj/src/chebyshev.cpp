#include "sgwn/chebyshev.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sgwn/errors.hpp"

namespace sgwn::chebyshev {

int default_quad_points(int order) { return std::max(500, 8 * (order + 1)); }

Vector cheb_coeffs(const std::function<double(double)>& f, double lambda_max, int order,
                   int quad_points) {
  if (order < 1) throw ValidationError("Chebyshev order must be at least 1");
  if (!(lambda_max > 0.0)) throw ValidationError("lambda_max must be positive");
  if (quad_points <= 0) quad_points = default_quad_points(order);
  if (quad_points < 4 * (order + 1)) {
    throw ValidationError("need at least 4 (K + 1) quadrature points");
  }
  const double half = lambda_max / 2.0;
  Vector samples(quad_points);
  Vector nodes(quad_points);
  for (int i = 0; i < quad_points; ++i) {
    const double theta = (i + 0.5) * std::numbers::pi / quad_points;
    const double value = f(half * (std::cos(theta) + 1.0));
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "kernel is not finite at quadrature node theta = " << theta;
      throw NumericalError(msg.str(), value);
    }
    nodes(i) = theta;
    samples(i) = value;
  }
  Vector c(order + 1);
  for (int k = 0; k <= order; ++k) {
    double sum = 0.0;
    for (int i = 0; i < quad_points; ++i) sum += std::cos(k * nodes(i)) * samples(i);
    c(k) = 2.0 * sum / quad_points;
  }
  return c;
}

double cheb_eval(const Vector& coeffs, double lambda_max, double lambda) {
  const double y = 2.0 * lambda / lambda_max - 1.0;
  double t_prev = 1.0;
  double t_cur = y;
  double out = 0.5 * coeffs(0);
  if (coeffs.size() > 1) out += coeffs(1) * t_cur;
  for (Eigen::Index k = 2; k < coeffs.size(); ++k) {
    const double t_next = 2.0 * y * t_cur - t_prev;
    out += coeffs(k) * t_next;
    t_prev = t_cur;
    t_cur = t_next;
  }
  return out;
}

ChebyshevOperator::ChebyshevOperator(ChebyshevCoefficients coeffs,
                                     std::shared_ptr<const graph::Laplacian> lap)
    : coeffs_(std::move(coeffs)), lap_(std::move(lap)) {
  if (!lap_) throw ValidationError("Chebyshev operator needs a Laplacian");
  if (coeffs_.bands.empty()) throw ValidationError("Chebyshev operator needs at least one band");
  for (const auto& band : coeffs_.bands) {
    if (band.size() != coeffs_.order + 1) {
      throw ValidationError("each band needs K + 1 coefficients");
    }
    if (!band.allFinite()) throw NumericalError("non-finite Chebyshev coefficient");
  }
}

void ChebyshevOperator::check_rows(const Matrix& x) const {
  if (x.rows() != num_nodes()) {
    throw ValidationError("signal has " + std::to_string(x.rows()) + " rows, graph has " +
                          std::to_string(num_nodes()) + " nodes");
  }
}

std::vector<Matrix> ChebyshevOperator::apply(const Matrix& x) const {
  check_rows(x);
  const Matrix& l = lap_->matrix();
  const double s = 2.0 / coeffs_.lambda_max;
  const int nb = band_count();

  std::vector<Matrix> out(nb);
  Matrix t_prev = x;
  Matrix t_cur = s * (l * x) - x;
  for (int b = 0; b < nb; ++b) {
    out[b] = 0.5 * coeffs_.bands[b](0) * t_prev + coeffs_.bands[b](1) * t_cur;
  }
  Matrix t_next(x.rows(), x.cols());
  for (int k = 2; k <= coeffs_.order; ++k) {
    t_next.noalias() = 2.0 * s * (l * t_cur);
    t_next -= 2.0 * t_cur + t_prev;
    for (int b = 0; b < nb; ++b) out[b] += coeffs_.bands[b](k) * t_next;
    std::swap(t_prev, t_cur);
    std::swap(t_cur, t_next);
  }
  return out;
}

Matrix ChebyshevOperator::apply_band(int band, const Matrix& x) const {
  check_rows(x);
  if (band < 0 || band >= band_count()) throw ValidationError("band index out of range");
  const Vector& c = coeffs_.bands[band];
  const Matrix& l = lap_->matrix();
  const double s = 2.0 / coeffs_.lambda_max;

  Matrix t_prev = x;
  Matrix t_cur = s * (l * x) - x;
  Matrix out = 0.5 * c(0) * t_prev + c(1) * t_cur;
  Matrix t_next(x.rows(), x.cols());
  for (int k = 2; k <= coeffs_.order; ++k) {
    t_next.noalias() = 2.0 * s * (l * t_cur);
    t_next -= 2.0 * t_cur + t_prev;
    out += c(k) * t_next;
    std::swap(t_prev, t_cur);
    std::swap(t_cur, t_next);
  }
  return out;
}

ChebyshevOperator build_operator(const kernels::KernelSpec& spec,
                                 std::shared_ptr<const graph::Laplacian> lap, int order) {
  if (!lap) throw ValidationError("build_operator needs a Laplacian");
  if (order < 1) throw ValidationError("Chebyshev order must be at least 1");
  if (spec.lambda_max() != lap->lambda_max()) {
    throw ConfigError("kernel lambda_max " + std::to_string(spec.lambda_max()) +
                      " does not match the Laplacian estimate " +
                      std::to_string(lap->lambda_max()));
  }
  ChebyshevCoefficients coeffs;
  coeffs.order = order;
  coeffs.lambda_max = spec.lambda_max();
  for (int b = 0; b < spec.band_count(); ++b) {
    coeffs.bands.push_back(cheb_coeffs(spec.band_function(b), spec.lambda_max(), order));
  }
  return ChebyshevOperator(std::move(coeffs), std::move(lap));
}

Matrix exact_band_matrix(const kernels::KernelSpec& spec, const graph::Spectrum& spectrum,
                         int band) {
  Vector response(spectrum.eigenvalues.size());
  for (Eigen::Index l = 0; l < response.size(); ++l) {
    response(l) = spec.band(band, spectrum.eigenvalues(l));
  }
  return spectrum.eigenvectors * response.asDiagonal() * spectrum.eigenvectors.transpose();
}

std::vector<Matrix> exact_apply(const kernels::KernelSpec& spec, const graph::Spectrum& spectrum,
                                const Matrix& x) {
  if (x.rows() != spectrum.eigenvectors.rows()) {
    throw ValidationError("signal rows do not match the spectrum size");
  }
  const Matrix projected = spectrum.eigenvectors.transpose() * x;
  std::vector<Matrix> out;
  out.reserve(spec.band_count());
  for (int b = 0; b < spec.band_count(); ++b) {
    Vector response(spectrum.eigenvalues.size());
    for (Eigen::Index l = 0; l < response.size(); ++l) {
      response(l) = spec.band(b, spectrum.eigenvalues(l));
    }
    out.push_back(spectrum.eigenvectors * (response.asDiagonal() * projected));
  }
  return out;
}

}  // namespace sgwn::chebyshev
