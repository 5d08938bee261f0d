#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgwn::kernels {

enum class KernelFamily { mexican_hat, cubic_spline, heat };

std::string_view to_string(KernelFamily family);
KernelFamily parse_family(std::string_view name);

struct CubicSplineParams {
  double alpha = 2.0;
  double beta = 2.0;
  double lam1 = 1.0;
  double lam2 = 2.0;
};

/// A scaling kernel h (absent for the heat family) plus a wavelet kernel g
/// sampled at ascending scales a_1 < ... < a_J. Immutable.
///
/// Bands are indexed in transform order: band 0 is h when present, followed
/// by g(a_1 .), ..., g(a_J .).
class KernelSpec {
 public:
  KernelFamily family() const noexcept { return family_; }
  const std::vector<double>& scales() const noexcept { return scales_; }
  int num_scales() const noexcept { return static_cast<int>(scales_.size()); }
  double q() const noexcept { return q_; }
  double gamma() const noexcept { return gamma_; }
  double lambda_max() const noexcept { return lambda_max_; }
  const CubicSplineParams& cubic() const noexcept { return cubic_; }

  bool has_scaling() const noexcept { return family_ != KernelFamily::heat; }
  int band_count() const noexcept { return num_scales() + (has_scaling() ? 1 : 0); }

  /// Mother wavelet kernel g(x).
  double mother(double x) const;
  /// g(a_j * lambda), zero-based scale index.
  double wavelet(int j, double lambda) const;
  /// h(lambda). Throws ConfigError for the heat family.
  double scaling(double lambda) const;
  double band(int b, double lambda) const;
  std::function<double(double)> band_function(int b) const;

 private:
  friend KernelSpec mexican_hat(double, double, int);
  friend KernelSpec cubic_spline(double, double, int, CubicSplineParams);
  friend KernelSpec heat(double, int);

  KernelSpec(KernelFamily family, std::vector<double> scales, double q, double lambda_max)
      : family_(family), scales_(std::move(scales)), q_(q), lambda_max_(lambda_max) {}

  KernelFamily family_;
  std::vector<double> scales_;
  double q_;
  double gamma_ = 0.0;
  double lambda_max_;
  CubicSplineParams cubic_{};
};

/// a_1 = 1/lambda_max, a_J = 2/lambda_min with lambda_min = lambda_max/Q,
/// geometric in between.
std::vector<double> scales(double lambda_max, double q, int num_scales);

KernelSpec mexican_hat(double q, double lambda_max, int num_scales);
KernelSpec cubic_spline(double q, double lambda_max, int num_scales, CubicSplineParams params = {});
KernelSpec heat(double lambda_max, int num_scales);
KernelSpec make_kernel(KernelFamily family, double lambda_max, int num_scales, double q = 2.0);

struct AdmissibilityReport {
  double probe = 0.0;
  std::vector<double> g_at_zero;   // per scale
  std::vector<double> g_at_probe;  // per scale
  std::optional<double> h_at_zero;
  std::optional<double> h_at_probe;
  std::vector<std::string> failures;
  bool passed() const noexcept { return failures.empty(); }
};

inline constexpr double kDefaultProbeFactor = 1e4;

/// Checks g(0) = 0, g(inf) = 0, h(0) > 0, h(inf) = 0 numerically. The probe
/// defaults to kDefaultProbeFactor * lambda_max. Never throws.
AdmissibilityReport check_admissibility(const KernelSpec& spec,
                                        std::optional<double> lambda_probe = std::nullopt);

struct FrameProfile {
  std::vector<double> lambda;
  std::vector<double> h;                // empty without a scaling kernel
  std::vector<std::vector<double>> g;   // g[j][i] = g(a_j lambda_i)
  std::vector<double> sum_sq;
  double lower = 0.0;  // min of sum_sq over (0, lambda_max]
  double upper = 0.0;  // max of sum_sq over (0, lambda_max]
};

FrameProfile frame_profile(const KernelSpec& spec, int grid);

}  // namespace sgwn::kernels
