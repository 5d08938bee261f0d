#include "sgwn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgwn/errors.hpp"

namespace sgwn::kernels {

namespace {

constexpr int kGammaGrid = 10000;
constexpr double kZeroTol = 1e-12;
constexpr double kDecayTol = 1e-6;

void validate_design(double lambda_max, double q, int num_scales) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw ValidationError("lambda_max must be positive and finite");
  }
  if (!(q > 1.0)) throw ValidationError("Q must exceed 1");
  if (num_scales < 1) throw ValidationError("at least one scale is required");
}

double cubic_mother(const CubicSplineParams& p, double x) {
  if (x < p.lam1) return std::pow(p.lam1, -p.alpha) * std::pow(x, p.alpha);
  if (x <= p.lam2) return -5.0 + x * (11.0 + x * (-6.0 + x));
  // Printed as lam2^-beta * x^beta, which grows without bound; this form is the
  // decaying branch that also matches s(lam2) = 1 at the junction.
  return std::pow(p.lam2, p.beta) * std::pow(x, -p.beta);
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::mexican_hat: return "mexican_hat";
    case KernelFamily::cubic_spline: return "cubic_spline";
    case KernelFamily::heat: return "heat";
  }
  return "unknown";
}

KernelFamily parse_family(std::string_view name) {
  if (name == "mexican_hat") return KernelFamily::mexican_hat;
  if (name == "cubic_spline") return KernelFamily::cubic_spline;
  if (name == "heat") return KernelFamily::heat;
  throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

double KernelSpec::mother(double x) const {
  x = std::max(x, 0.0);
  switch (family_) {
    case KernelFamily::mexican_hat: return x * std::exp(-x);
    case KernelFamily::cubic_spline: return cubic_mother(cubic_, x);
    case KernelFamily::heat: return std::exp(-x);
  }
  return 0.0;
}

double KernelSpec::wavelet(int j, double lambda) const {
  return mother(scales_.at(static_cast<std::size_t>(j)) * std::max(lambda, 0.0));
}

double KernelSpec::scaling(double lambda) const {
  if (!has_scaling()) {
    throw ConfigError("the heat kernel family has no scaling kernel");
  }
  lambda = std::max(lambda, 0.0);
  // The first-power variant gamma * exp(-Q lambda / (0.6 lambda_max)) also
  // appears in print; the fourth power gives the flat low-pass shoulder.
  const double r = q_ * lambda / (0.6 * lambda_max_);
  return gamma_ * std::exp(-(r * r) * (r * r));
}

double KernelSpec::band(int b, double lambda) const {
  if (b < 0 || b >= band_count()) throw ValidationError("band index out of range");
  if (has_scaling()) return b == 0 ? scaling(lambda) : wavelet(b - 1, lambda);
  return wavelet(b, lambda);
}

std::function<double(double)> KernelSpec::band_function(int b) const {
  if (b < 0 || b >= band_count()) throw ValidationError("band index out of range");
  return [spec = *this, b](double lambda) { return spec.band(b, lambda); };
}

std::vector<double> scales(double lambda_max, double q, int num_scales) {
  validate_design(lambda_max, q, num_scales);
  const double lambda_min = lambda_max / q;
  const double first = 1.0 / lambda_max;
  const double last = 2.0 / lambda_min;
  std::vector<double> out(static_cast<std::size_t>(num_scales));
  out[0] = first;
  for (int j = 1; j < num_scales; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(num_scales - 1);
    out[j] = first * std::pow(last / first, t);
  }
  return out;
}

KernelSpec mexican_hat(double q, double lambda_max, int num_scales) {
  KernelSpec spec(KernelFamily::mexican_hat, scales(lambda_max, q, num_scales), q, lambda_max);
  spec.gamma_ = std::exp(-1.0);  // max of x e^-x, at x = 1
  return spec;
}

KernelSpec cubic_spline(double q, double lambda_max, int num_scales, CubicSplineParams params) {
  if (!(params.lam1 > 0.0 && params.lam1 < params.lam2)) {
    throw ValidationError("cubic spline needs 0 < lam1 < lam2");
  }
  KernelSpec spec(KernelFamily::cubic_spline, scales(lambda_max, q, num_scales), q, lambda_max);
  spec.cubic_ = params;
  const double upper = q * lambda_max;
  double best = 0.0;
  for (int i = 0; i < kGammaGrid; ++i) {
    const double x = upper * static_cast<double>(i) / static_cast<double>(kGammaGrid - 1);
    best = std::max(best, cubic_mother(params, x));
  }
  spec.gamma_ = best;
  return spec;
}

KernelSpec heat(double lambda_max, int num_scales) {
  constexpr double q = 2.0;
  return KernelSpec(KernelFamily::heat, scales(lambda_max, q, num_scales), q, lambda_max);
}

KernelSpec make_kernel(KernelFamily family, double lambda_max, int num_scales, double q) {
  switch (family) {
    case KernelFamily::mexican_hat: return mexican_hat(q, lambda_max, num_scales);
    case KernelFamily::cubic_spline: return cubic_spline(q, lambda_max, num_scales);
    case KernelFamily::heat: return heat(lambda_max, num_scales);
  }
  throw ConfigError("unknown kernel family");
}

AdmissibilityReport check_admissibility(const KernelSpec& spec, std::optional<double> lambda_probe) {
  AdmissibilityReport report;
  report.probe = lambda_probe.value_or(kDefaultProbeFactor * spec.lambda_max());
  for (int j = 0; j < spec.num_scales(); ++j) {
    const double at_zero = spec.wavelet(j, 0.0);
    const double at_probe = spec.wavelet(j, report.probe);
    report.g_at_zero.push_back(at_zero);
    report.g_at_probe.push_back(at_probe);
    if (!(std::abs(at_zero) <= kZeroTol)) {
      report.failures.push_back("g(a_" + std::to_string(j + 1) + " * 0) = " +
                                std::to_string(at_zero) + " is not zero");
    }
    if (!(std::abs(at_probe) <= kDecayTol)) {
      report.failures.push_back("g(a_" + std::to_string(j + 1) +
                                " * probe) does not decay: " + std::to_string(at_probe));
    }
  }
  if (spec.has_scaling()) {
    report.h_at_zero = spec.scaling(0.0);
    report.h_at_probe = spec.scaling(report.probe);
    if (!(*report.h_at_zero > 0.0)) report.failures.push_back("h(0) is not positive");
    if (!(std::abs(*report.h_at_probe) <= kDecayTol)) {
      report.failures.push_back("h(probe) does not decay");
    }
  }
  return report;
}

FrameProfile frame_profile(const KernelSpec& spec, int grid) {
  if (grid < 2) throw ValidationError("frame profile grid needs at least 2 points");
  FrameProfile out;
  out.g.assign(static_cast<std::size_t>(spec.num_scales()), {});
  out.lower = std::numeric_limits<double>::infinity();
  out.upper = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double lambda = spec.lambda_max() * static_cast<double>(i) / static_cast<double>(grid - 1);
    out.lambda.push_back(lambda);
    double total = 0.0;
    if (spec.has_scaling()) {
      const double h = spec.scaling(lambda);
      out.h.push_back(h);
      total += h * h;
    }
    for (int j = 0; j < spec.num_scales(); ++j) {
      const double g = spec.wavelet(j, lambda);
      out.g[j].push_back(g);
      total += g * g;
    }
    out.sum_sq.push_back(total);
    if (i > 0) {
      out.lower = std::min(out.lower, total);
      out.upper = std::max(out.upper, total);
    }
  }
  return out;
}

}  // namespace sgwn::kernels
