#include "sgwn/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "sgwn/errors.hpp"
#include "sgwn/io.hpp"
#include "sgwn/seeds.hpp"

namespace sgwn::data {

SyntheticSpec SyntheticSpec::defaults() {
  SyntheticSpec s;
  s.classes = {
      {"healthy", 2000.0, 0.0, 0.0, {1.0, 1.0, 1.0, 1.0, 1.0}, 0.3},
      {"fault_a", 3000.0, 240.0, 1200.0, {1.0, 0.8, 0.6, 0.8, 1.0}, 0.1},
      {"fault_b", 4000.0, 518.03, 1500.0, {0.6, 0.8, 1.0, 0.8, 0.6}, 0.1},
      {"fault_c", 5000.0, 800.0, 2000.0, {1.0, 1.0, 1.0, 1.0, 1.0}, 0.1},
  };
  return s;
}

void SyntheticSpec::validate() const {
  if (sensors < 2) throw ValidationError("need at least 2 sensors");
  if (!(fs > 0.0)) throw ValidationError("sampling frequency must be positive");
  if (record_length < 1) throw ValidationError("record length must be positive");
  if (classes.size() < 2) throw ValidationError("need at least 2 classes");
  const double nyquist = fs / 2.0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& k = classes[c];
    const std::string where = "class " + std::to_string(c) + " (" + k.name + ")";
    if (k.name.empty()) throw ValidationError("class " + std::to_string(c) + " has no name");
    if (!(k.carrier_hz > 0.0 && k.carrier_hz < nyquist)) {
      throw ValidationError(where + ": carrier must lie in (0, fs/2)");
    }
    if (!(k.fault_hz >= 0.0 && k.fault_hz < nyquist)) {
      throw ValidationError(where + ": fault frequency must lie in [0, fs/2)");
    }
    if (k.fault_hz > 0.0 && !(k.decay > 0.0)) {
      throw ValidationError(where + ": impulsive classes need a positive decay rate");
    }
    if (static_cast<int>(k.coupling.size()) != sensors) {
      throw ValidationError(where + ": coupling needs one amplitude per sensor");
    }
    if (!(k.noise >= 0.0)) throw ValidationError(where + ": noise must be nonnegative");
  }
}

nlohmann::json SyntheticSpec::to_json() const {
  nlohmann::json doc;
  doc["sensors"] = sensors;
  doc["fs"] = fs;
  doc["record_length"] = record_length;
  doc["phase_step"] = phase_step;
  doc["seed"] = seed;
  doc["classes"] = nlohmann::json::array();
  for (const auto& c : classes) {
    doc["classes"].push_back({{"name", c.name},
                              {"carrier_hz", c.carrier_hz},
                              {"fault_hz", c.fault_hz},
                              {"decay", c.decay},
                              {"coupling", c.coupling},
                              {"noise", c.noise}});
  }
  return doc;
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& doc) {
  SyntheticSpec s;
  s.sensors = doc.at("sensors").get<int>();
  s.fs = doc.at("fs").get<double>();
  s.record_length = doc.at("record_length").get<int>();
  s.phase_step = doc.at("phase_step").get<double>();
  s.seed = doc.at("seed").get<std::uint64_t>();
  for (const auto& c : doc.at("classes")) {
    s.classes.push_back({c.at("name").get<std::string>(), c.at("carrier_hz").get<double>(),
                         c.at("fault_hz").get<double>(), c.at("decay").get<double>(),
                         c.at("coupling").get<std::vector<double>>(), c.at("noise").get<double>()});
  }
  return s;
}

std::string SyntheticSpec::hash() const { return io::content_hash(to_json().dump()); }

std::vector<Matrix> synthesize(const SyntheticSpec& spec) {
  spec.validate();
  const int p = spec.record_length;
  const std::uint64_t base = derive_seed(spec.seed, "dataset");
  std::vector<Matrix> out;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const auto& k = spec.classes[c];
    Vector envelope = Vector::Ones(p);
    if (k.fault_hz > 0.0) {
      envelope.setZero();
      const double period = 1.0 / k.fault_hz;
      const double last_t = (p - 1) / spec.fs;
      const int tail = static_cast<int>(10.0 * spec.fs / k.decay);
      for (long i = 0;; ++i) {
        const double t0 = i * period;
        if (t0 >= last_t) break;
        const long start = std::lround(t0 * spec.fs);
        const long stop = std::min<long>(p, start + tail);
        for (long n = start; n < stop; ++n) envelope(n) += std::exp(-k.decay * (n - start) / spec.fs);
      }
    }
    std::mt19937_64 rng(splitmix64(base + c));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix rec(spec.sensors, p);
    for (int s = 0; s < spec.sensors; ++s) {
      const double phase = s * spec.phase_step;
      for (int n = 0; n < p; ++n) {
        const double t = n / spec.fs;
        rec(s, n) = k.coupling[s] * envelope(n) *
                        std::cos(2.0 * std::numbers::pi * k.carrier_hz * t + phase) +
                    k.noise * gauss(rng);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

int reference_class(const SyntheticSpec& spec) {
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    if (spec.classes[c].fault_hz == 0.0) return static_cast<int>(c);
  }
  return 0;
}

std::vector<double> add_noise(std::span<const double> signal, double snr_db, std::uint64_t seed) {
  if (signal.empty()) throw ValidationError("cannot add noise to an empty signal");
  if (!std::isfinite(snr_db)) throw ValidationError("SNR must be finite");
  double ps = 0.0;
  for (double x : signal) ps += x * x;
  ps /= static_cast<double>(signal.size());
  if (!(ps > 0.0)) throw ValidationError("signal has zero power");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> w(signal.size());
  double pw = 0.0;
  for (double& x : w) {
    x = gauss(rng);
    pw += x * x;
  }
  pw /= static_cast<double>(w.size());
  const double scale = std::sqrt(ps / (pw * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = signal[i] + scale * w[i];
  return out;
}

nlohmann::json Dataset::metadata() const {
  nlohmann::json doc;
  doc["spec"] = spec;
  doc["spec_hash"] = spec_hash;
  doc["fs"] = fs;
  doc["epsilon"] = epsilon;
  doc["window"] = window;
  doc["class_names"] = class_names;
  doc["fault_frequencies"] = fault_frequencies;
  doc["graph"] = graph ? graph->to_json() : nlohmann::json();
  doc["count"] = samples.size();
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(s.label);
  doc["labels"] = labels;
  doc["split"] = {{"train", train_indices}, {"test", test_indices}};
  doc["warnings"] = warnings;
  return doc;
}

Dataset build_dataset(const SyntheticSpec& spec, int window, double epsilon, int samples_per_class) {
  spec.validate();
  if (window < 1) throw ValidationError("window must be positive");
  if (samples_per_class < 1) throw ValidationError("samples per class must be positive");
  if (static_cast<long long>(window) * samples_per_class > spec.record_length) {
    throw ValidationError("record length " + std::to_string(spec.record_length) + " holds only " +
                          std::to_string(spec.record_length / window) + " windows of " +
                          std::to_string(window) + ", " + std::to_string(samples_per_class) +
                          " requested");
  }
  const auto records = synthesize(spec);
  std::vector<Matrix> normalized;
  for (const auto& r : records) normalized.push_back(graph::normalize_rows(r));

  Dataset ds;
  ds.fs = spec.fs;
  ds.epsilon = epsilon;
  ds.window = window;
  ds.spec = spec.to_json();
  ds.spec_hash = spec.hash();
  std::vector<std::string> sensor_names;
  for (int s = 0; s < spec.sensors; ++s) sensor_names.push_back("sensor" + std::to_string(s + 1));
  const int ref = reference_class(spec);
  if (spec.classes[ref].fault_hz != 0.0) {
    ds.warnings.push_back("no healthy class; graph built from class " + spec.classes[ref].name);
  }
  ds.graph = std::make_shared<const graph::Graph>(
      graph::radius_graph(normalized[ref], epsilon, sensor_names));
  if (ds.graph->edge_count() == 0) {
    ds.warnings.push_back("epsilon " + io::format_double(epsilon) + " yields an edgeless graph");
  }
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    ds.class_names.push_back(spec.classes[c].name);
    ds.fault_frequencies.push_back(spec.classes[c].fault_hz);
    auto windows = graph::sliding_window_graphs(normalized[c], window, ds.graph, static_cast<int>(c));
    windows.resize(samples_per_class);
    for (auto& w : windows) ds.samples.push_back(std::move(w));
  }

  std::vector<int> order(ds.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(spec.seed, "split"));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(kTrainFraction * order.size() + 1e-9));
  ds.train_indices.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  ds.test_indices.assign(order.begin() + static_cast<long>(n_train), order.end());
  std::sort(ds.train_indices.begin(), ds.train_indices.end());
  std::sort(ds.test_indices.begin(), ds.test_indices.end());
  return ds;
}

Dataset with_noise(const Dataset& ds, double snr_db, std::uint64_t seed) {
  Dataset out = ds;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    Matrix& x = out.samples[i].features;
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
      const double mean = x.row(n).mean();
      std::vector<double> ac(x.cols());
      double power = 0.0;
      for (Eigen::Index t = 0; t < x.cols(); ++t) {
        ac[t] = x(n, t) - mean;
        power += ac[t] * ac[t];
      }
      if (power == 0.0) continue;
      const auto noisy = add_noise(ac, snr_db, splitmix64(seed + i * x.rows() + n));
      for (Eigen::Index t = 0; t < x.cols(); ++t) x(n, t) = noisy[t] + mean;
    }
  }
  out.warnings.push_back("noise added at " + io::format_double(snr_db) + " dB");
  return out;
}

namespace {

constexpr std::string_view kMagic = "SGWD";

}  // namespace

std::string encode_dataset(const Dataset& ds) {
  const std::string meta = ds.metadata().dump();
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kDatasetVersion);
  w.u64(meta.size());
  w.bytes(meta);
  for (const auto& s : ds.samples) {
    // node-major: row n, then time
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = s.features;
    w.f64s(rm.data(), static_cast<std::size_t>(rm.size()));
  }
  return w.take();
}

Dataset decode_dataset(std::string_view bytes) {
  io::ByteReader r(bytes);
  if (r.bytes(4, "magic") != kMagic) throw FormatError("not an SGWD dataset", 0);
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version), version_at);
  }
  const std::uint64_t length = r.u64("metadata length");
  const std::size_t meta_at = r.offset();
  const auto text = r.bytes(length, "metadata");

  Dataset ds;
  std::vector<int> labels;
  std::size_t count = 0;
  try {
    const auto meta = nlohmann::json::parse(text);
    ds.spec = meta.at("spec");
    ds.spec_hash = meta.at("spec_hash").get<std::string>();
    ds.fs = meta.at("fs").get<double>();
    ds.epsilon = meta.at("epsilon").get<double>();
    ds.window = meta.at("window").get<int>();
    ds.class_names = meta.at("class_names").get<std::vector<std::string>>();
    ds.fault_frequencies = meta.at("fault_frequencies").get<std::vector<double>>();
    ds.graph = std::make_shared<const graph::Graph>(graph::Graph::from_json(meta.at("graph")));
    count = meta.at("count").get<std::size_t>();
    labels = meta.at("labels").get<std::vector<int>>();
    ds.train_indices = meta.at("split").at("train").get<std::vector<int>>();
    ds.test_indices = meta.at("split").at("test").get<std::vector<int>>();
    ds.warnings = meta.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad dataset metadata: ") + e.what(), meta_at);
  } catch (const ValidationError& e) {
    throw FormatError(std::string("bad dataset metadata: ") + e.what(), meta_at);
  }
  if (labels.size() != count || ds.window < 1) {
    throw FormatError("dataset metadata is inconsistent", meta_at);
  }
  for (int idx : ds.train_indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= count) throw FormatError("split index out of range", meta_at);
  }
  for (int idx : ds.test_indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= count) throw FormatError("split index out of range", meta_at);
  }
  const int n = ds.graph->num_nodes();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf(n, ds.window);
  ds.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    r.f64s(buf.data(), static_cast<std::size_t>(buf.size()), "sample data");
    ds.samples.push_back({ds.graph, Matrix(buf), labels[i]});
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after sample data", r.offset());
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  io::write_file(path, encode_dataset(ds));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(io::read_file(path)); }

}  // namespace sgwn::data
