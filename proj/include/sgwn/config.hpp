#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgwn/data.hpp"
#include "sgwn/kernels.hpp"
#include "sgwn/nn.hpp"
#include "sgwn/sgwt.hpp"

namespace sgwn::config {

/// Flat key -> value map. Values are JSON scalars or arrays of scalars.
using Table = std::map<std::string, nlohmann::json>;

/// Parses `key = value` lines. `[section]` headers prefix later keys with
/// "section.". '#' starts a comment outside quotes. Values: "quoted", true,
/// false, integers, floats, [a, b, ...], or a bare word taken as a string.
Table parse(std::string_view text, const std::string& source = "<config>");

nlohmann::json parse_value(std::string_view raw);

/// "key=value".
std::pair<std::string, nlohmann::json> parse_override(std::string_view text);

struct Settings {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output_dir;

  data::SyntheticSpec synthetic;
  int window = 256;
  double epsilon = 0.9;
  int samples_per_class = 250;
  std::filesystem::path dataset_path;
  std::filesystem::path checkpoint_path;

  nn::ModelConfig model;
  nn::TrainConfig train;
  double lambda_max = 2.0;

  int filter_grid = 501;
  int transform_sample = 0;

  std::string ses_source = "am";
  double am_carrier_hz = 2000.0;
  double am_modulation_hz = 50.0;
  double am_depth = 0.5;
  int am_length = 20480;
  double ses_fs = 20480.0;
  std::optional<double> ses_target_hz;
  int ses_tol_bins = 1;
  std::optional<int> ses_sample;
  int ses_node = 0;

  std::vector<int> depths{2, 10};
  std::vector<int> j_values{2, 3, 4, 5, 6};
  std::vector<int> k_values{2};
  std::vector<std::optional<double>> snr_list{0.0, -5.0};
  std::vector<kernels::KernelFamily> families;
  std::vector<sgwt::Mode> modes;
  int jobs = 1;
  int repeats = 1;
  bool baseline_batchnorm = false;
  bool svg = true;

  nlohmann::json resolved;  // every key with its effective value
};

/// Schema-checks the table and fills defaults. Throws ConfigError naming the
/// offending key.
Settings resolve(const Table& table);

/// Key, kind and default of every recognized key, for help output.
std::vector<std::pair<std::string, std::string>> describe_keys();

}  // namespace sgwn::config
