#include "sgwn/sgwt.hpp"

#include "sgwn/errors.hpp"

namespace sgwn::sgwt {

std::string to_string(Mode mode) { return mode == Mode::exact ? "exact" : "chebyshev"; }

Mode parse_mode(const std::string& name) {
  if (name == "exact") return Mode::exact;
  if (name == "chebyshev") return Mode::chebyshev;
  throw ConfigError("unknown transform mode '" + name + "'");
}

std::string Provenance::to_string() const {
  if (mode == Mode::exact) return "exact";
  return "chebyshev(" + std::to_string(order) + ")";
}

Transform Transform::chebyshev(const kernels::KernelSpec& spec,
                               std::shared_ptr<const graph::Laplacian> lap, int order) {
  auto op = chebyshev::build_operator(spec, lap, order);
  Transform t(spec, op.num_nodes(), {Mode::chebyshev, order});
  t.op_.emplace(std::move(op));
  return t;
}

Transform Transform::exact(const kernels::KernelSpec& spec, const graph::Spectrum& spectrum) {
  Transform t(spec, static_cast<int>(spectrum.eigenvalues.size()), {Mode::exact, 0});
  for (int b = 0; b < spec.band_count(); ++b) {
    t.dense_.push_back(chebyshev::exact_band_matrix(spec, spectrum, b));
  }
  return t;
}

Transform Transform::for_graph(const graph::Graph& g, kernels::KernelFamily family,
                               int num_scales, double q, Mode mode, int order) {
  auto lap = std::make_shared<const graph::Laplacian>(graph::laplacian(g));
  const auto spec = kernels::make_kernel(family, lap->lambda_max(), num_scales, q);
  if (mode == Mode::exact) return exact(spec, graph::eigendecompose(*lap));
  return chebyshev(spec, std::move(lap), order);
}

WaveletCoefficients Transform::forward(const Matrix& x) const {
  if (x.rows() != num_nodes_) throw ValidationError("signal rows do not match graph size");
  WaveletCoefficients out;
  out.provenance = provenance_;
  if (op_) {
    out.bands = op_->apply(x);
  } else {
    out.bands.reserve(dense_.size());
    for (const auto& f : dense_) out.bands.push_back(f * x);
  }
  return out;
}

Matrix Transform::filter_band(int band, const Matrix& x) const {
  if (band < 0 || band >= band_count()) throw ValidationError("band index out of range");
  if (x.rows() != num_nodes_) throw ValidationError("signal rows do not match graph size");
  if (op_) return op_->apply_band(band, x);
  return dense_[band] * x;
}

Matrix Transform::adjoint(const WaveletCoefficients& c) const {
  if (c.band_count() != band_count()) {
    throw ValidationError("coefficient stack has " + std::to_string(c.band_count()) +
                          " bands, operator has " + std::to_string(band_count()));
  }
  Matrix out = filter_band(0, c.bands[0]);
  for (int b = 1; b < band_count(); ++b) {
    if (c.bands[b].rows() != c.bands[0].rows() || c.bands[b].cols() != c.bands[0].cols()) {
      throw ValidationError("coefficient bands differ in shape");
    }
    out += filter_band(b, c.bands[b]);
  }
  return out;
}

WaveletCoefficients diag_filter(const WaveletCoefficients& c, const Vector& theta) {
  if (c.bands.empty()) throw ValidationError("empty coefficient stack");
  const Eigen::Index n = c.bands[0].rows();
  if (theta.size() != c.band_count() * n) {
    throw ValidationError("theta length " + std::to_string(theta.size()) + " != B * N = " +
                          std::to_string(c.band_count() * n));
  }
  WaveletCoefficients out;
  out.provenance = c.provenance;
  out.bands.reserve(c.bands.size());
  for (int b = 0; b < c.band_count(); ++b) {
    out.bands.push_back(theta.segment(b * n, n).asDiagonal() * c.bands[b]);
  }
  return out;
}

double inner_product(const WaveletCoefficients& a, const WaveletCoefficients& b) {
  if (a.band_count() != b.band_count()) throw ValidationError("band count mismatch");
  double sum = 0.0;
  for (int i = 0; i < a.band_count(); ++i) sum += a.bands[i].cwiseProduct(b.bands[i]).sum();
  return sum;
}

}  // namespace sgwn::sgwt
