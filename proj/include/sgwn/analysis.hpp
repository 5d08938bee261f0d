#pragma once

#include <span>
#include <string>
#include <vector>

#include "sgwn/graph.hpp"
#include "sgwn/nn.hpp"

namespace sgwn::analysis {

struct SesResult {
  std::vector<double> frequency;  // Hz, floor(n/2) + 1 bins
  std::vector<double> magnitude;
  double fs = 0.0;
  std::string source = "raw";  // raw | scaling | wavelet_j | layer_output
};

inline constexpr int kMinSesLength = 16;
inline constexpr double kDefaultProminence = 3.0;
inline constexpr int kMedianHalfWidth = 64;  // bins either side of the peak

/// Spectrum of the mean-removed squared envelope |x + i H[x]|^2, scaled by 1/n.
SesResult squared_envelope_spectrum(std::span<const double> signal, double fs,
                                    std::string source = "raw");

struct LocateReport {
  bool located = false;
  double target_hz = 0.0;
  double peak_hz = 0.0;
  int peak_bin = 0;
  double magnitude = 0.0;
  double median = 0.0;     // over non-DC bins within kMedianHalfWidth of the peak
  double prominence = 0.0;  // magnitude / median, 0 when both vanish
};

/// Largest bin within +-tol_bins of the target, compared against kappa times
/// the median magnitude of the surrounding bins.
LocateReport locate_fault_frequency(const SesResult& ses, double target_hz, int tol_bins = 1,
                                    double kappa = kDefaultProminence);

/// Largest non-DC bin.
LocateReport dominant_peak(const SesResult& ses);

/// (1 + depth cos(2 pi fm t)) cos(2 pi fc t).
std::vector<double> am_test_vector(int length, double fs, double carrier_hz, double modulation_hz,
                                   double depth = 0.5);

/// SES of every first-layer band at `node` (after the diagonal filter, before
/// the adjoint), then of the first layer's output at that node.
std::vector<SesResult> feature_ses_report(const nn::SgwnModel& model,
                                          const graph::GraphSample& sample, int node, double fs);

}  // namespace sgwn::analysis
