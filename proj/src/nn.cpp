#include "sgwn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sgwn/errors.hpp"
#include "sgwn/seeds.hpp"

namespace sgwn::nn {

std::string to_string(LayerKind kind) { return kind == LayerKind::sgwconv ? "sgwconv" : "lowpass"; }

LayerKind parse_layer_kind(const std::string& name) {
  if (name == "sgwconv") return LayerKind::sgwconv;
  if (name == "lowpass") return LayerKind::lowpass;
  throw ConfigError("unknown layer kind '" + name + "'");
}

void ModelConfig::validate() const {
  if (depth < 1) throw ConfigError("model depth must be at least 1");
  if (num_classes < 2) throw ConfigError("need at least 2 classes");
  if (feature_dim < 1) throw ConfigError("feature dimension must be positive");
  if (hidden < 1) throw ConfigError("hidden width must be positive");
  if (num_scales < 1) throw ConfigError("J must be at least 1");
  if (order < 1) throw ConfigError("K must be at least 1");
  if (!(q > 1.0)) throw ConfigError("Q must exceed 1");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"layer", nn::to_string(layer)},
          {"depth", depth},
          {"num_classes", num_classes},
          {"feature_dim", feature_dim},
          {"hidden", hidden},
          {"batchnorm", batchnorm},
          {"family", std::string(kernels::to_string(family))},
          {"J", num_scales},
          {"K", order},
          {"Q", q},
          {"mode", sgwt::to_string(mode)}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& doc) {
  ModelConfig c;
  c.layer = parse_layer_kind(doc.at("layer").get<std::string>());
  c.depth = doc.at("depth").get<int>();
  c.num_classes = doc.at("num_classes").get<int>();
  c.feature_dim = doc.at("feature_dim").get<int>();
  c.hidden = doc.at("hidden").get<int>();
  c.batchnorm = doc.at("batchnorm").get<bool>();
  c.family = kernels::parse_family(doc.at("family").get<std::string>());
  c.num_scales = doc.at("J").get<int>();
  c.order = doc.at("K").get<int>();
  c.q = doc.at("Q").get<double>();
  c.mode = sgwt::parse_mode(doc.at("mode").get<std::string>());
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(decay > 0.0)) throw ConfigError("decay factor must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"decay", decay},
          {"seed", seed}};
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  for (const auto& l : layers) {
    z.layers.push_back({Vector::Zero(l.theta.size()),
                        Matrix::Zero(l.bn_scale.rows(), l.bn_scale.cols()),
                        Matrix::Zero(l.bn_shift.rows(), l.bn_shift.cols())});
  }
  z.fc1_weight = Matrix::Zero(fc1_weight.rows(), fc1_weight.cols());
  z.fc1_bias = Vector::Zero(fc1_bias.size());
  z.fc2_weight = Matrix::Zero(fc2_weight.rows(), fc2_weight.cols());
  z.fc2_bias = Vector::Zero(fc2_bias.size());
  return z;
}

std::vector<ArrayRef> parameter_arrays(Parameters& p) {
  std::vector<ArrayRef> out;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    auto& l = p.layers[i];
    const std::string prefix = "layer" + std::to_string(i + 1) + ".";
    if (l.theta.size() > 0) out.push_back({prefix + "theta", l.theta.data(), l.theta.size(), 1});
    if (l.bn_scale.size() > 0) {
      out.push_back({prefix + "bn_scale", l.bn_scale.data(), l.bn_scale.rows(), l.bn_scale.cols()});
      out.push_back({prefix + "bn_shift", l.bn_shift.data(), l.bn_shift.rows(), l.bn_shift.cols()});
    }
  }
  out.push_back({"fc1.weight", p.fc1_weight.data(), p.fc1_weight.rows(), p.fc1_weight.cols()});
  out.push_back({"fc1.bias", p.fc1_bias.data(), p.fc1_bias.size(), 1});
  out.push_back({"fc2.weight", p.fc2_weight.data(), p.fc2_weight.rows(), p.fc2_weight.cols()});
  out.push_back({"fc2.bias", p.fc2_bias.data(), p.fc2_bias.size(), 1});
  return out;
}

Matrix lowpass_operator(const graph::Graph& g) {
  Matrix a = g.adjacency() + Matrix::Identity(g.num_nodes(), g.num_nodes());
  const Vector deg = a.rowwise().sum();
  return deg.cwiseInverse().asDiagonal() * a;
}

Matrix lowpass_baseline_forward(const graph::Graph& g, const Matrix& x, int depth) {
  if (depth < 1) throw ValidationError("depth must be at least 1");
  if (x.rows() != g.num_nodes()) throw ValidationError("signal rows do not match graph size");
  const Matrix p = lowpass_operator(g);
  Matrix h = x;
  for (int i = 0; i < depth; ++i) h = (p * h).cwiseMax(0.0);
  return h;
}

namespace {

void glorot(Matrix& w, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
}

}  // namespace

SgwnModel::SgwnModel(ModelConfig config, std::shared_ptr<const graph::Graph> graph,
                     std::uint64_t init_seed)
    : config_(config), graph_(std::move(graph)) {
  config_.validate();
  if (!graph_) throw ValidationError("model needs a graph");
  const int n = graph_->num_nodes();
  const int d = config_.feature_dim;
  if (config_.layer == LayerKind::sgwconv) {
    transform_ = std::make_shared<const sgwt::Transform>(sgwt::Transform::for_graph(
        *graph_, config_.family, config_.num_scales, config_.q, config_.mode, config_.order));
  } else {
    lowpass_ = nn::lowpass_operator(*graph_);
  }
  for (int i = 0; i < config_.depth; ++i) {
    LayerParameters l;
    if (transform_) l.theta = Vector::Ones(static_cast<Eigen::Index>(band_count()) * n);
    if (config_.batchnorm) {
      l.bn_scale = Matrix::Ones(n, d);
      l.bn_shift = Matrix::Zero(n, d);
      running.push_back({Matrix::Zero(n, d), Matrix::Ones(n, d)});
    }
    params.layers.push_back(std::move(l));
  }
  std::mt19937_64 rng(init_seed);
  params.fc1_weight.resize(d, config_.hidden);
  params.fc2_weight.resize(config_.hidden, config_.num_classes);
  glorot(params.fc1_weight, rng);
  glorot(params.fc2_weight, rng);
  params.fc1_bias = Vector::Zero(config_.hidden);
  params.fc2_bias = Vector::Zero(config_.num_classes);
}

int SgwnModel::band_count() const noexcept { return transform_ ? transform_->band_count() : 0; }

const sgwt::Transform& SgwnModel::transform() const {
  if (!transform_) throw ConfigError("lowpass models have no wavelet transform");
  return *transform_;
}

std::vector<ArrayRef> SgwnModel::buffer_arrays() {
  std::vector<ArrayRef> out;
  for (std::size_t i = 0; i < running.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i + 1) + ".";
    auto& r = running[i];
    out.push_back({prefix + "running_mean", r.mean.data(), r.mean.rows(), r.mean.cols()});
    out.push_back({prefix + "running_var", r.variance.data(), r.variance.rows(), r.variance.cols()});
  }
  return out;
}

Matrix SgwnModel::conv_forward(int layer, const Matrix& h, int batch, Phase phase,
                               LayerCache* cache) const {
  const auto& p = params.layers[layer];
  const int d = config_.feature_dim;
  Matrix z;
  if (config_.layer == LayerKind::sgwconv) {
    auto coeffs = transform_->forward(h);
    z = transform_->adjoint(sgwt::diag_filter(coeffs, p.theta));
    if (cache) cache->coeffs = std::move(coeffs.bands);
  } else {
    z = lowpass_ * h;
  }
  if (config_.batchnorm) {
    const Eigen::Index n = h.rows();
    Matrix mean, var;
    if (phase == Phase::training) {
      mean = Matrix::Zero(n, d);
      for (int i = 0; i < batch; ++i) mean += z.middleCols(i * d, d);
      mean /= batch;
      var = Matrix::Zero(n, d);
      for (int i = 0; i < batch; ++i) var += (z.middleCols(i * d, d) - mean).array().square().matrix();
      var /= batch;
    } else {
      mean = running[layer].mean;
      var = running[layer].variance;
    }
    const Matrix inv_std = (var.array() + kBatchNormEps).rsqrt().matrix();
    Matrix normalized(n, z.cols());
    for (int i = 0; i < batch; ++i) {
      normalized.middleCols(i * d, d) =
          (z.middleCols(i * d, d) - mean).cwiseProduct(inv_std);
      z.middleCols(i * d, d) =
          normalized.middleCols(i * d, d).cwiseProduct(p.bn_scale) + p.bn_shift;
    }
    if (cache) {
      cache->normalized = std::move(normalized);
      cache->inv_std = inv_std;
      cache->batch_mean = std::move(mean);
      cache->batch_var = std::move(var);
    }
  }
  Matrix out = z.cwiseMax(0.0);
  if (cache) {
    cache->phase = phase;
    cache->preact = std::move(z);
  }
  return out;
}

Matrix SgwnModel::forward(const Matrix& stacked, int batch, Phase phase, ForwardCache* cache) const {
  const int d = config_.feature_dim;
  if (batch < 1) throw ValidationError("empty batch");
  if (stacked.rows() != num_nodes() || stacked.cols() != static_cast<Eigen::Index>(d) * batch) {
    throw ValidationError("batch has shape " + std::to_string(stacked.rows()) + "x" +
                          std::to_string(stacked.cols()) + ", expected " +
                          std::to_string(num_nodes()) + "x" + std::to_string(d * batch));
  }
  if (cache) {
    *cache = ForwardCache{};
    cache->batch = batch;
    cache->layers.resize(config_.depth);
  }
  Matrix h = stacked;
  for (int l = 0; l < config_.depth; ++l) {
    Matrix next = conv_forward(l, h, batch, phase, cache ? &cache->layers[l] : nullptr);
    if (cache) cache->inputs.push_back(std::move(h));
    h = std::move(next);
  }
  const Matrix node_mean = h.colwise().mean();  // 1 x dM
  Matrix r = Eigen::Map<const Matrix>(node_mean.data(), d, batch);
  Matrix u = (params.fc1_weight.transpose() * r).colwise() + params.fc1_bias;
  Matrix a = u.cwiseMax(0.0);
  Matrix logits = (params.fc2_weight.transpose() * a).colwise() + params.fc2_bias;
  Matrix probs = softmax(logits);
  if (cache) {
    cache->readout = std::move(r);
    cache->hidden_pre = std::move(u);
    cache->hidden = std::move(a);
    cache->probs = probs;
  }
  return probs;
}

Parameters SgwnModel::backward(const ForwardCache& cache, std::span<const int> labels) const {
  const int m = cache.batch;
  const int d = config_.feature_dim;
  const int n = num_nodes();
  if (static_cast<int>(labels.size()) != m) throw ValidationError("label count != batch size");
  Parameters g = params.zeros_like();

  Matrix dlogits = cache.probs;
  for (int i = 0; i < m; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= config_.num_classes) throw ValidationError("label out of range");
    if (cache.probs(y, i) < kLogClamp) {
      dlogits.col(i).setZero();  // clamped log is flat here
    } else {
      dlogits(y, i) -= 1.0;
    }
  }
  dlogits /= m;

  g.fc2_weight.noalias() = cache.hidden * dlogits.transpose();
  g.fc2_bias = dlogits.rowwise().sum();
  Matrix du = (params.fc2_weight * dlogits).cwiseProduct(
      (cache.hidden_pre.array() > 0.0).cast<double>().matrix());
  g.fc1_weight.noalias() = cache.readout * du.transpose();
  g.fc1_bias = du.rowwise().sum();
  const Matrix dr = params.fc1_weight * du;  // d x M

  // Readout spreads each feature gradient evenly over the nodes.
  Matrix grad(n, static_cast<Eigen::Index>(d) * m);
  const Eigen::Map<const Eigen::RowVectorXd> dr_flat(dr.data(), dr.size());
  grad.rowwise() = dr_flat / static_cast<double>(n);

  for (int l = config_.depth - 1; l >= 0; --l) {
    const LayerCache& lc = cache.layers[l];
    const auto& p = params.layers[l];
    auto& gl = g.layers[l];
    Matrix dz = grad.cwiseProduct((lc.preact.array() > 0.0).cast<double>().matrix());
    if (config_.batchnorm) {
      Matrix sum_dxhat = Matrix::Zero(n, d);
      Matrix sum_dxhat_xhat = Matrix::Zero(n, d);
      for (int i = 0; i < m; ++i) {
        const auto da = dz.middleCols(i * d, d);
        const auto xhat = lc.normalized.middleCols(i * d, d);
        gl.bn_scale += da.cwiseProduct(xhat);
        gl.bn_shift += da;
      }
      for (int i = 0; i < m; ++i) {
        auto block = dz.middleCols(i * d, d);
        block = block.cwiseProduct(p.bn_scale);  // now d x-hat
        sum_dxhat += block;
        sum_dxhat_xhat += block.cwiseProduct(lc.normalized.middleCols(i * d, d));
      }
      for (int i = 0; i < m; ++i) {
        auto block = dz.middleCols(i * d, d);
        if (lc.phase == Phase::training) {
          const auto xhat = lc.normalized.middleCols(i * d, d);
          block = (static_cast<double>(m) * block - sum_dxhat -
                   xhat.cwiseProduct(sum_dxhat_xhat))
                      .cwiseProduct(lc.inv_std) /
                  static_cast<double>(m);
        } else {
          block = block.cwiseProduct(lc.inv_std);
        }
      }
    }
    if (config_.layer == LayerKind::sgwconv) {
      auto up = transform_->forward(dz);
      for (int b = 0; b < band_count(); ++b) {
        gl.theta.segment(b * n, n) = up.bands[b].cwiseProduct(lc.coeffs[b]).rowwise().sum();
      }
      if (l > 0) grad = transform_->adjoint(sgwt::diag_filter(up, p.theta));
    } else if (l > 0) {
      grad.noalias() = lowpass_.transpose() * dz;
    }
  }
  return g;
}

void SgwnModel::update_running_stats(const ForwardCache& cache) {
  if (!config_.batchnorm) return;
  for (int l = 0; l < config_.depth; ++l) {
    const LayerCache& lc = cache.layers[l];
    if (lc.phase != Phase::training) throw ValidationError("cache holds no batch statistics");
    running[l].mean = kBatchNormMomentum * running[l].mean + (1.0 - kBatchNormMomentum) * lc.batch_mean;
    running[l].variance =
        kBatchNormMomentum * running[l].variance + (1.0 - kBatchNormMomentum) * lc.batch_var;
  }
}

Matrix SgwnModel::layer_forward(int layer, const Matrix& x) const {
  if (layer < 0 || layer >= config_.depth) throw ValidationError("layer index out of range");
  return conv_forward(layer, x, 1, Phase::inference, nullptr);
}

sgwt::WaveletCoefficients SgwnModel::first_layer_bands(const Matrix& x) const {
  return sgwt::diag_filter(transform().forward(x), params.layers[0].theta);
}

Matrix stack(std::span<const Matrix* const> signals) {
  if (signals.empty()) throw ValidationError("nothing to stack");
  const Eigen::Index n = signals[0]->rows();
  const Eigen::Index d = signals[0]->cols();
  Matrix out(n, d * static_cast<Eigen::Index>(signals.size()));
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (signals[i]->rows() != n || signals[i]->cols() != d) {
      throw ValidationError("samples differ in shape");
    }
    out.middleCols(static_cast<Eigen::Index>(i) * d, d) = *signals[i];
  }
  return out;
}

Vector readout(const Matrix& h) {
  if (h.rows() < 1) throw ValidationError("readout needs at least one node");
  return h.colwise().mean().transpose();
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double top = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - top).exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

double cross_entropy(const Matrix& probs, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.cols()) {
    throw ValidationError("label count does not match prediction count");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total -= std::log(std::max(probs(labels[i], static_cast<Eigen::Index>(i)), kLogClamp));
  }
  return total / static_cast<double>(labels.size());
}

int argmax(const Eigen::Ref<const Vector>& p) {
  int best = 0;
  for (Eigen::Index c = 1; c < p.size(); ++c) {
    if (p(c) > p(best)) best = static_cast<int>(c);
  }
  return best;
}

Vector classify(const SgwnModel& model, const graph::GraphSample& sample) {
  return model.forward(sample.features, 1, Phase::inference).col(0);
}

Evaluation evaluate(const SgwnModel& model, std::span<const graph::GraphSample> samples,
                    std::span<const int> indices) {
  constexpr std::size_t kChunk = 200;
  const int c = model.config().num_classes;
  Evaluation ev;
  ev.confusion = Eigen::MatrixXi::Zero(c, c);
  int correct = 0;
  for (std::size_t start = 0; start < indices.size(); start += kChunk) {
    const std::size_t stop = std::min(indices.size(), start + kChunk);
    std::vector<const Matrix*> chunk;
    for (std::size_t i = start; i < stop; ++i) chunk.push_back(&samples[indices[i]].features);
    const Matrix probs = model.forward(stack(chunk), static_cast<int>(chunk.size()), Phase::inference);
    for (std::size_t i = start; i < stop; ++i) {
      const int pred = argmax(probs.col(static_cast<Eigen::Index>(i - start)));
      const int truth = samples[indices[i]].label;
      ev.predictions.push_back(pred);
      if (truth >= 0 && truth < c) ev.confusion(truth, pred) += 1;
      if (pred == truth) ++correct;
    }
  }
  ev.accuracy = indices.empty() ? std::nan("") : static_cast<double>(correct) / indices.size();
  return ev;
}

void sgd_step(Parameters& params, const Parameters& grads, double learning_rate) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    if (p.theta.size() > 0) p.theta -= learning_rate * g.theta;
    if (p.bn_scale.size() > 0) {
      p.bn_scale -= learning_rate * g.bn_scale;
      p.bn_shift -= learning_rate * g.bn_shift;
    }
  }
  params.fc1_weight -= learning_rate * grads.fc1_weight;
  params.fc1_bias -= learning_rate * grads.fc1_bias;
  params.fc2_weight -= learning_rate * grads.fc2_weight;
  params.fc2_bias -= learning_rate * grads.fc2_bias;
}

std::vector<EpochRecord> train(SgwnModel& model, std::span<const graph::GraphSample> samples,
                               std::span<const int> train_indices,
                               std::span<const int> test_indices, const TrainConfig& config,
                               const EpochCallback& on_epoch) {
  config.validate();
  if (train_indices.empty()) throw ValidationError("training split is empty");
  const int c = model.config().num_classes;
  std::vector<int> seen(c, 0);
  for (int idx : train_indices) {
    const int y = samples[idx].label;
    if (y < 0 || y >= c) throw ValidationError("sample label out of range");
    seen[y] = 1;
  }
  for (int k = 0; k < c; ++k) {
    if (!seen[k]) throw ValidationError("class " + std::to_string(k) + " is absent from the training split");
  }

  std::mt19937_64 rng(derive_seed(config.seed, "shuffle"));
  std::vector<int> order(train_indices.begin(), train_indices.end());
  std::vector<EpochRecord> history;
  double lr = config.learning_rate;
  ForwardCache cache;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<const Matrix*> batch;
      std::vector<int> labels;
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(&samples[order[i]].features);
        labels.push_back(samples[order[i]].label);
      }
      const int m = static_cast<int>(batch.size());
      model.forward(stack(batch), m, Phase::training, &cache);
      const double loss = cross_entropy(cache.probs, labels);
      if (!std::isfinite(loss)) {
        throw NumericalError("training loss is not finite at epoch " + std::to_string(epoch), loss);
      }
      loss_sum += loss * m;
      const Parameters grads = model.backward(cache, labels);
      sgd_step(model.params, grads, lr);
      model.update_running_stats(cache);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.test_accuracy = evaluate(model, samples, test_indices).accuracy;
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    lr *= config.decay;
  }
  return history;
}

}  // namespace sgwn::nn
