#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgwn/graph.hpp"
#include "sgwn/kernels.hpp"
#include "sgwn/sgwt.hpp"

namespace sgwn::nn {

enum class LayerKind {
  sgwconv,  // ReLU(BN(W^T diag(theta) W H))
  lowpass,  // ReLU(D~^-1 A~ H), parameter-free contrast baseline
};

std::string to_string(LayerKind kind);
LayerKind parse_layer_kind(const std::string& name);

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;  // weight on the old running value
inline constexpr double kLogClamp = 1e-15;

struct ModelConfig {
  LayerKind layer = LayerKind::sgwconv;
  int depth = 2;
  int num_classes = 4;
  int feature_dim = 256;
  int hidden = 512;
  bool batchnorm = true;
  kernels::KernelFamily family = kernels::KernelFamily::mexican_hat;
  int num_scales = 2;  // J
  int order = 2;       // K
  double q = 2.0;
  sgwt::Mode mode = sgwt::Mode::chebyshev;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& doc);
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 100;
  double learning_rate = 0.01;
  double decay = 0.99;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct LayerParameters {
  Vector theta;     // B * N, sgwconv only
  Matrix bn_scale;  // N x d, batchnorm only
  Matrix bn_shift;  // N x d, batchnorm only
};

/// Learnable parameters; gradients use the same layout.
struct Parameters {
  std::vector<LayerParameters> layers;
  Matrix fc1_weight;  // d x hidden
  Vector fc1_bias;
  Matrix fc2_weight;  // hidden x C
  Vector fc2_bias;

  Parameters zeros_like() const;
};

struct RunningStats {
  Matrix mean;      // N x d
  Matrix variance;  // N x d, biased
};

/// Named contiguous view into a parameter or buffer (column-major storage).
struct ArrayRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const noexcept { return rows * cols; }
};

std::vector<ArrayRef> parameter_arrays(Parameters& p);

enum class Phase { inference, training };

struct LayerCache {
  Phase phase = Phase::inference;
  std::vector<Matrix> coeffs;  // W H per band (sgwconv)
  Matrix normalized;           // BN x-hat, N x dM
  Matrix inv_std;              // N x d
  Matrix batch_mean;           // N x d
  Matrix batch_var;            // N x d
  Matrix preact;               // input to the ReLU, N x dM
};

struct ForwardCache {
  int batch = 0;
  std::vector<Matrix> inputs;  // per layer input, N x dM
  std::vector<LayerCache> layers;
  Matrix readout;      // d x M
  Matrix hidden_pre;   // hidden x M
  Matrix hidden;       // hidden x M
  Matrix probs;        // C x M
};

class SgwnModel {
 public:
  SgwnModel(ModelConfig config, std::shared_ptr<const graph::Graph> graph,
            std::uint64_t init_seed);

  const ModelConfig& config() const noexcept { return config_; }
  const graph::Graph& graph() const noexcept { return *graph_; }
  std::shared_ptr<const graph::Graph> graph_ptr() const noexcept { return graph_; }
  int num_nodes() const noexcept { return graph_->num_nodes(); }
  int band_count() const noexcept;
  const sgwt::Transform& transform() const;
  const Matrix& lowpass_operator() const noexcept { return lowpass_; }

  Parameters params;
  std::vector<RunningStats> running;

  /// Probabilities (C x M) for M samples stacked side by side (N x dM).
  Matrix forward(const Matrix& stacked, int batch, Phase phase, ForwardCache* cache = nullptr) const;

  /// Gradient of the mean clamped cross-entropy of the cached batch.
  Parameters backward(const ForwardCache& cache, std::span<const int> labels) const;

  /// Folds the cached training-phase batch statistics into the running stats.
  void update_running_stats(const ForwardCache& cache);

  /// One conv layer (inference phase) applied to a single N x d signal.
  Matrix layer_forward(int layer, const Matrix& x) const;

  /// Wavelet coefficients of the first layer after the diagonal filter.
  sgwt::WaveletCoefficients first_layer_bands(const Matrix& x) const;

  std::vector<ArrayRef> buffer_arrays();

 private:
  Matrix conv_forward(int layer, const Matrix& h, int batch, Phase phase, LayerCache* cache) const;

  ModelConfig config_;
  std::shared_ptr<const graph::Graph> graph_;
  std::shared_ptr<const sgwt::Transform> transform_;
  Matrix lowpass_;
};

/// Stacks N x d signals side by side into N x dM.
Matrix stack(std::span<const Matrix* const> signals);

/// Column-wise mean over nodes.
Vector readout(const Matrix& h);

/// Column-wise softmax.
Matrix softmax(const Matrix& logits);

/// -(1/M) sum_i log(max(p_{y_i, i}, 1e-15)).
double cross_entropy(const Matrix& probs, std::span<const int> labels);

/// Lowest index among maxima.
int argmax(const Eigen::Ref<const Vector>& p);

/// depth rounds of H <- ReLU(D~^-1 (A + I) H).
Matrix lowpass_baseline_forward(const graph::Graph& g, const Matrix& x, int depth);
Matrix lowpass_operator(const graph::Graph& g);

/// Class probabilities for one sample (inference phase).
Vector classify(const SgwnModel& model, const graph::GraphSample& sample);

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
};

struct Evaluation {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;  // rows true class, cols predicted
  std::vector<int> predictions;
};

Evaluation evaluate(const SgwnModel& model, std::span<const graph::GraphSample> samples,
                    std::span<const int> indices);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch SGD with per-epoch learning-rate decay. The shuffle stream is
/// seeded from config.seed.
std::vector<EpochRecord> train(SgwnModel& model, std::span<const graph::GraphSample> samples,
                               std::span<const int> train_indices,
                               std::span<const int> test_indices, const TrainConfig& config,
                               const EpochCallback& on_epoch = {});

void sgd_step(Parameters& params, const Parameters& grads, double learning_rate);

}  // namespace sgwn::nn
