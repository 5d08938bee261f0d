#include "sgwn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "sgwn/errors.hpp"
#include "sgwn/io.hpp"
#include "sgwn/seeds.hpp"

namespace sgwn::harness {

nn::ModelConfig model_for(const data::Dataset& ds, nn::ModelConfig base) {
  base.num_classes = ds.num_classes();
  base.feature_dim = ds.feature_dim();
  return base;
}

TrainOutcome train_model(const data::Dataset& ds, const nn::ModelConfig& model,
                         const nn::TrainConfig& train, const nn::EpochCallback& on_epoch) {
  const auto start = std::chrono::steady_clock::now();
  TrainOutcome out{nn::SgwnModel(model_for(ds, model), ds.graph, derive_seed(train.seed, "init")),
                   {}, {}, 0.0};
  out.history = nn::train(out.model, ds.samples, ds.train_indices, ds.test_indices, train, on_epoch);
  out.test = nn::evaluate(out.model, ds.samples, ds.test_indices);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void run_cells(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<DepthRow> depth_sweep(const data::Dataset& ds, const std::vector<int>& depths,
                                  const nn::ModelConfig& base, const nn::TrainConfig& train,
                                  bool baseline_batchnorm, int jobs) {
  for (int d : depths) {
    if (d < 1) throw ConfigError("depths must be at least 1");
  }
  std::vector<DepthRow> rows(2 * depths.size());
  run_cells(static_cast<int>(rows.size()), jobs, [&](int cell) {
    const bool baseline = cell % 2 == 1;
    const int depth = depths[cell / 2];
    nn::ModelConfig cfg = base;
    cfg.depth = depth;
    if (baseline) {
      cfg.layer = nn::LayerKind::lowpass;
      cfg.batchnorm = baseline_batchnorm;
    } else {
      cfg.layer = nn::LayerKind::sgwconv;
    }
    auto outcome = train_model(ds, cfg, train);
    rows[cell] = {baseline ? "lowpass" : "sgwn", depth, outcome.test.accuracy,
                  outcome.history.empty() ? std::nan("") : outcome.history.back().train_loss};
  });
  return rows;
}

std::vector<HyperRow> hyperparam_sweep(const data::Dataset& ds, const std::vector<int>& j_values,
                                       const std::vector<int>& k_values,
                                       const nn::ModelConfig& base, const nn::TrainConfig& train,
                                       int repeats, int jobs) {
  if (j_values.empty() || k_values.empty()) throw ConfigError("J and K lists must be nonempty");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  std::vector<HyperRow> rows(j_values.size() * k_values.size());
  run_cells(static_cast<int>(rows.size()), jobs, [&](int cell) {
    nn::ModelConfig cfg = base;
    cfg.layer = nn::LayerKind::sgwconv;
    cfg.num_scales = j_values[cell / k_values.size()];
    cfg.order = k_values[cell % k_values.size()];
    std::vector<double> times;
    double accuracy = 0.0;
    for (int r = 0; r < repeats; ++r) {
      auto outcome = train_model(ds, cfg, train);
      times.push_back(outcome.seconds);
      accuracy = outcome.test.accuracy;  // identical across repeats
    }
    std::sort(times.begin(), times.end());
    const double median = times.size() % 2 ? times[times.size() / 2]
                                           : 0.5 * (times[times.size() / 2 - 1] + times[times.size() / 2]);
    rows[cell] = {cfg.num_scales, cfg.order, accuracy, median};
  });
  return rows;
}

std::string NoiseRow::label() const { return snr_db ? io::format_double(*snr_db) : "clean"; }

std::vector<NoiseRow> noise_sweep(const data::Dataset& ds,
                                  const std::vector<std::optional<double>>& snr_list,
                                  const nn::ModelConfig& base, const nn::TrainConfig& train,
                                  std::uint64_t noise_seed, int jobs) {
  std::vector<std::optional<double>> levels{std::nullopt};
  for (const auto& s : snr_list) {
    if (std::find(levels.begin(), levels.end(), s) == levels.end()) levels.push_back(s);
  }
  std::vector<NoiseRow> rows(levels.size());
  run_cells(static_cast<int>(levels.size()), jobs, [&](int cell) {
    const auto& snr = levels[cell];
    double accuracy;
    if (snr) {
      const auto noisy = data::with_noise(ds, *snr, noise_seed);
      accuracy = train_model(noisy, base, train).test.accuracy;
    } else {
      accuracy = train_model(ds, base, train).test.accuracy;
    }
    rows[cell] = {snr, accuracy};
  });
  return rows;
}

std::vector<KernelRow> kernel_sweep(const data::Dataset& ds,
                                    const std::vector<kernels::KernelFamily>& families,
                                    const std::vector<sgwt::Mode>& modes,
                                    const nn::ModelConfig& base, const nn::TrainConfig& train,
                                    int jobs) {
  std::vector<KernelRow> rows(families.size() * modes.size());
  run_cells(static_cast<int>(rows.size()), jobs, [&](int cell) {
    nn::ModelConfig cfg = base;
    cfg.layer = nn::LayerKind::sgwconv;
    cfg.family = families[cell / modes.size()];
    cfg.mode = modes[cell % modes.size()];
    auto outcome = train_model(ds, cfg, train);
    const bool admissible = kernels::check_admissibility(outcome.model.transform().kernel()).passed();
    rows[cell] = {cfg.family, cfg.mode, admissible, outcome.test.accuracy};
  });
  return rows;
}

}  // namespace sgwn::harness
