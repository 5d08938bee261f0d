#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgwn/graph.hpp"

namespace sgwn::data {

struct ClassSpec {
  std::string name;
  double carrier_hz = 0.0;
  double fault_hz = 0.0;  // 0 for a healthy class
  double decay = 0.0;     // impulse decay rate, 1/s
  std::vector<double> coupling;  // amplitude per sensor
  double noise = 0.0;            // white-noise standard deviation
};

struct SyntheticSpec {
  int sensors = 5;
  double fs = 20480.0;
  int record_length = 64000;
  double phase_step = 1.0471975511965976;  // carrier phase lag between adjacent sensors
  std::uint64_t seed = 0;
  std::vector<ClassSpec> classes;

  /// Five sensors, one healthy class and three impulsive fault classes.
  static SyntheticSpec defaults();

  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticSpec from_json(const nlohmann::json& doc);
  /// Hash of the canonical JSON form.
  std::string hash() const;
};

/// One S x P record per class.
std::vector<Matrix> synthesize(const SyntheticSpec& spec);

/// Index of the class used to build the graph: the first with fault_hz == 0,
/// else class 0.
int reference_class(const SyntheticSpec& spec);

/// signal + w with 10 log10(P_s / P_w) == snr_db for the drawn w.
std::vector<double> add_noise(std::span<const double> signal, double snr_db, std::uint64_t seed);

inline constexpr double kTrainFraction = 0.8;

struct Dataset {
  std::shared_ptr<const graph::Graph> graph;
  std::vector<graph::GraphSample> samples;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  std::vector<std::string> class_names;
  std::vector<double> fault_frequencies;
  double fs = 0.0;
  double epsilon = 0.0;
  int window = 0;
  std::string spec_hash;
  nlohmann::json spec;  // generating spec, informational
  std::vector<std::string> warnings;

  int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
  int num_nodes() const noexcept { return graph ? graph->num_nodes() : 0; }
  int feature_dim() const noexcept { return window; }
  nlohmann::json metadata() const;
};

Dataset build_dataset(const SyntheticSpec& spec, int window, double epsilon, int samples_per_class);

/// Copy with noise added to every node row of every sample at snr_db. The
/// noise power is matched to the row's power about its mean; the mean is kept.
Dataset with_noise(const Dataset& ds, double snr_db, std::uint64_t seed);

inline constexpr std::uint32_t kDatasetVersion = 1;

std::string encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::string_view bytes);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace sgwn::data
