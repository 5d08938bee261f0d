#include "sgwn/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "sgwn/errors.hpp"

namespace sgwn::analysis {

namespace {

// Plan creation in FFTW is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwFree>(p);
}

void forward_real(const double* x, std::size_t n, fftw_complex* out) {
  auto in = fftw_buffer<double>(n);
  std::copy(x, x + n, in.get());
  fftw_plan plan;
  {
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(plan_mutex());
  fftw_destroy_plan(plan);
}

void inverse_complex(fftw_complex* data, std::size_t n) {
  fftw_plan plan;
  {
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(plan_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

SesResult squared_envelope_spectrum(std::span<const double> signal, double fs, std::string source) {
  const std::size_t n = signal.size();
  if (n < static_cast<std::size_t>(kMinSesLength)) {
    throw ValidationError("SES needs at least " + std::to_string(kMinSesLength) + " samples, got " +
                          std::to_string(n));
  }
  if (!(fs > 0.0)) throw ValidationError("sampling frequency must be positive");
  const std::size_t half = n / 2 + 1;

  auto spec = fftw_buffer<fftw_complex>(half);
  forward_real(signal.data(), n, spec.get());

  auto analytic = fftw_buffer<fftw_complex>(n);
  for (std::size_t k = 0; k < n; ++k) analytic[k][0] = analytic[k][1] = 0.0;
  analytic[0][0] = spec[0][0];
  analytic[0][1] = spec[0][1];
  const std::size_t positive_end = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
  for (std::size_t k = 1; k < positive_end; ++k) {
    analytic[k][0] = 2.0 * spec[k][0];
    analytic[k][1] = 2.0 * spec[k][1];
  }
  if (n % 2 == 0) {
    analytic[n / 2][0] = spec[n / 2][0];
    analytic[n / 2][1] = spec[n / 2][1];
  }
  inverse_complex(analytic.get(), n);

  std::vector<double> envelope(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = analytic[i][0] * inv_n;
    const double im = analytic[i][1] * inv_n;
    envelope[i] = re * re + im * im;
    mean += envelope[i];
  }
  mean *= inv_n;
  for (double& e : envelope) e -= mean;

  forward_real(envelope.data(), n, spec.get());
  SesResult out;
  out.fs = fs;
  out.source = std::move(source);
  out.frequency.resize(half);
  out.magnitude.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    out.frequency[k] = static_cast<double>(k) * fs / static_cast<double>(n);
    out.magnitude[k] = std::hypot(spec[k][0], spec[k][1]) * inv_n;
  }
  return out;
}

namespace {

// The squared envelope of broadband noise is not flat (it rises toward DC), so
// the reference level is the median of the bins around the peak, not of the
// whole spectrum.
double local_median(const SesResult& ses, int bin) {
  const int last = static_cast<int>(ses.magnitude.size()) - 1;
  const int lo = std::max(1, bin - kMedianHalfWidth);
  const int hi = std::min(last, bin + kMedianHalfWidth);
  std::vector<double> m(ses.magnitude.begin() + lo, ses.magnitude.begin() + hi + 1);
  const std::size_t mid = m.size() / 2;
  std::nth_element(m.begin(), m.begin() + static_cast<long>(mid), m.end());
  if (m.size() % 2 == 1) return m[mid];
  const double upper = m[mid];
  const double lower = *std::max_element(m.begin(), m.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

LocateReport report_for(const SesResult& ses, int bin, double target, double kappa) {
  LocateReport r;
  r.target_hz = target;
  r.peak_bin = bin;
  r.peak_hz = ses.frequency[bin];
  r.magnitude = ses.magnitude[bin];
  r.median = local_median(ses, bin);
  if (r.median > 0.0) {
    r.prominence = r.magnitude / r.median;
  } else {
    r.prominence = r.magnitude > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.located = r.magnitude > 0.0 && r.magnitude > kappa * r.median;
  return r;
}

}  // namespace

LocateReport locate_fault_frequency(const SesResult& ses, double target_hz, int tol_bins,
                                    double kappa) {
  if (ses.magnitude.size() < 2) throw ValidationError("SES has no frequency bins");
  if (tol_bins < 0) throw ValidationError("tolerance must be nonnegative");
  const int last = static_cast<int>(ses.magnitude.size()) - 1;
  const double n = 2.0 * last;  // even-length equivalent bin spacing
  const double df = ses.frequency.size() > 1 ? ses.frequency[1] : ses.fs / n;
  const int center = static_cast<int>(std::lround(target_hz / df));
  const int lo = std::clamp(center - tol_bins, 1, last);
  const int hi = std::clamp(center + tol_bins, 1, last);
  int best = lo;
  for (int k = lo + 1; k <= hi; ++k) {
    if (ses.magnitude[k] > ses.magnitude[best]) best = k;
  }
  return report_for(ses, best, target_hz, kappa);
}

LocateReport dominant_peak(const SesResult& ses) {
  if (ses.magnitude.size() < 2) throw ValidationError("SES has no frequency bins");
  int best = 1;
  for (int k = 2; k < static_cast<int>(ses.magnitude.size()); ++k) {
    if (ses.magnitude[k] > ses.magnitude[best]) best = k;
  }
  auto r = report_for(ses, best, ses.frequency[best], kDefaultProminence);
  return r;
}

std::vector<double> am_test_vector(int length, double fs, double carrier_hz, double modulation_hz,
                                   double depth) {
  if (length < 1) throw ValidationError("length must be positive");
  std::vector<double> x(length);
  for (int i = 0; i < length; ++i) {
    const double t = i / fs;
    x[i] = (1.0 + depth * std::cos(2.0 * std::numbers::pi * modulation_hz * t)) *
           std::cos(2.0 * std::numbers::pi * carrier_hz * t);
  }
  return x;
}

std::vector<SesResult> feature_ses_report(const nn::SgwnModel& model,
                                          const graph::GraphSample& sample, int node, double fs) {
  if (node < 0 || node >= model.num_nodes()) {
    throw ValidationError("node " + std::to_string(node) + " out of range [0, " +
                          std::to_string(model.num_nodes()) + ")");
  }
  if (sample.features.rows() != model.num_nodes()) {
    throw ValidationError("sample does not match the model graph");
  }
  const auto bands = model.first_layer_bands(sample.features);
  const bool scaling = model.transform().kernel().has_scaling();
  std::vector<SesResult> out;
  std::vector<double> row(sample.features.cols());
  for (int b = 0; b < bands.band_count(); ++b) {
    for (Eigen::Index t = 0; t < bands.bands[b].cols(); ++t) row[t] = bands.bands[b](node, t);
    const std::string name = (scaling && b == 0) ? "scaling"
                                                 : "wavelet_" + std::to_string(scaling ? b : b + 1);
    out.push_back(squared_envelope_spectrum(row, fs, name));
  }
  const Matrix h = model.layer_forward(0, sample.features);
  for (Eigen::Index t = 0; t < h.cols(); ++t) row[t] = h(node, t);
  out.push_back(squared_envelope_spectrum(row, fs, "layer_output"));
  return out;
}

}  // namespace sgwn::analysis
