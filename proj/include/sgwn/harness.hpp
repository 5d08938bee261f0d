#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgwn/data.hpp"
#include "sgwn/nn.hpp"

namespace sgwn::harness {

/// Model shape taken from the dataset (classes, feature dimension).
nn::ModelConfig model_for(const data::Dataset& ds, nn::ModelConfig base);

struct TrainOutcome {
  nn::SgwnModel model;
  std::vector<nn::EpochRecord> history;
  nn::Evaluation test;
  double seconds = 0.0;
};

/// Initializes from derive_seed(train.seed, "init") and trains on the
/// dataset's stored split.
TrainOutcome train_model(const data::Dataset& ds, const nn::ModelConfig& model,
                         const nn::TrainConfig& train, const nn::EpochCallback& on_epoch = {});

/// Runs fn(0..count-1) on up to `jobs` threads. Each cell writes only its own
/// slot, so results do not depend on scheduling.
void run_cells(int count, int jobs, const std::function<void(int)>& fn);

struct DepthRow {
  std::string model;  // "sgwn" or "lowpass"
  int depth = 0;
  double test_accuracy = 0.0;
  double final_loss = 0.0;
};

std::vector<DepthRow> depth_sweep(const data::Dataset& ds, const std::vector<int>& depths,
                                  const nn::ModelConfig& base, const nn::TrainConfig& train,
                                  bool baseline_batchnorm = false, int jobs = 1);

struct HyperRow {
  int num_scales = 0;
  int order = 0;
  double test_accuracy = 0.0;
  double wall_seconds = 0.0;  // median over repeats
};

std::vector<HyperRow> hyperparam_sweep(const data::Dataset& ds, const std::vector<int>& j_values,
                                       const std::vector<int>& k_values,
                                       const nn::ModelConfig& base, const nn::TrainConfig& train,
                                       int repeats = 1, int jobs = 1);

struct NoiseRow {
  std::optional<double> snr_db;  // nullopt for the clean row
  double test_accuracy = 0.0;
  std::string label() const;
};

/// Clean row first, then one row per requested SNR (noise on train and test).
std::vector<NoiseRow> noise_sweep(const data::Dataset& ds,
                                  const std::vector<std::optional<double>>& snr_list,
                                  const nn::ModelConfig& base, const nn::TrainConfig& train,
                                  std::uint64_t noise_seed, int jobs = 1);

struct KernelRow {
  kernels::KernelFamily family{};
  sgwt::Mode mode{};
  bool admissible = false;
  double test_accuracy = 0.0;
};

std::vector<KernelRow> kernel_sweep(const data::Dataset& ds,
                                    const std::vector<kernels::KernelFamily>& families,
                                    const std::vector<sgwt::Mode>& modes,
                                    const nn::ModelConfig& base, const nn::TrainConfig& train,
                                    int jobs = 1);

}  // namespace sgwn::harness
