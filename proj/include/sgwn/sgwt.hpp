#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgwn/chebyshev.hpp"
#include "sgwn/graph.hpp"
#include "sgwn/kernels.hpp"

namespace sgwn::sgwt {

enum class Mode { exact, chebyshev };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

struct Provenance {
  Mode mode = Mode::exact;
  int order = 0;  // Chebyshev order; 0 in exact mode

  std::string to_string() const;  // "exact" or "chebyshev(K)"
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Band stack [scaling; a_1; ...; a_J], each band N x d.
struct WaveletCoefficients {
  std::vector<Matrix> bands;
  Provenance provenance;

  int band_count() const noexcept { return static_cast<int>(bands.size()); }
};

/// The stacked operator W = [h(L); g(a_1 L); ...; g(a_J L)] in either exact
/// (eigendecomposition) or Chebyshev form.
class Transform {
 public:
  static Transform chebyshev(const kernels::KernelSpec& spec,
                             std::shared_ptr<const graph::Laplacian> lap, int order);
  static Transform exact(const kernels::KernelSpec& spec, const graph::Spectrum& spectrum);

  /// Builds the Laplacian, kernel and operator for a graph in one step.
  static Transform for_graph(const graph::Graph& g, kernels::KernelFamily family, int num_scales,
                             double q, Mode mode, int order);

  int band_count() const noexcept { return kernel_.band_count(); }
  int num_nodes() const noexcept { return num_nodes_; }
  const kernels::KernelSpec& kernel() const noexcept { return kernel_; }
  Provenance provenance() const noexcept { return provenance_; }

  WaveletCoefficients forward(const Matrix& x) const;
  /// sum_b f_b(L) C_b.
  Matrix adjoint(const WaveletCoefficients& c) const;
  Matrix filter_band(int band, const Matrix& x) const;

 private:
  Transform(kernels::KernelSpec spec, int num_nodes, Provenance provenance)
      : kernel_(std::move(spec)), num_nodes_(num_nodes), provenance_(provenance) {}

  kernels::KernelSpec kernel_;
  int num_nodes_;
  Provenance provenance_;
  std::optional<chebyshev::ChebyshevOperator> op_;
  std::vector<Matrix> dense_;  // exact mode band matrices
};

/// Scales row n of band b by theta[b * N + n].
WaveletCoefficients diag_filter(const WaveletCoefficients& c, const Vector& theta);

double inner_product(const WaveletCoefficients& a, const WaveletCoefficients& b);

}  // namespace sgwn::sgwt
