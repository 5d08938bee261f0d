#include "sgwn/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>

#include "sgwn/analysis.hpp"
#include "sgwn/checkpoint.hpp"
#include "sgwn/config.hpp"
#include "sgwn/data.hpp"
#include "sgwn/errors.hpp"
#include "sgwn/harness.hpp"
#include "sgwn/io.hpp"
#include "sgwn/seeds.hpp"

namespace sgwn::cli {

namespace fs = std::filesystem;

namespace {

struct Run {
  std::string command;
  config::Settings settings;
  fs::path out;
  io::Manifest manifest;

  nlohmann::json seeds() const {
    const auto root = settings.seed;
    return {{"root", root},
            {"dataset", derive_seed(root, "dataset")},
            {"split", derive_seed(root, "split")},
            {"init", derive_seed(root, "init")},
            {"shuffle", derive_seed(root, "shuffle")},
            {"noise", derive_seed(root, "noise")}};
  }

  nlohmann::json describe() const {
    return {{"subcommand", command}, {"config", settings.resolved}, {"seeds", seeds()}};
  }

  void emit(const std::string& name, std::string_view contents, bool deterministic = true) {
    io::write_file(out / name, contents);
    manifest.add(name, deterministic);
  }

  void emit_json(const std::string& name, const nlohmann::json& doc, bool deterministic = true) {
    emit(name, doc.dump(2) + "\n", deterministic);
  }

  /// CSV plus a sidecar recording the full configuration and seeds.
  void emit_table(const std::string& stem, const io::CsvWriter& csv, nlohmann::json extra = {},
                  bool deterministic = true) {
    emit(stem + ".csv", csv.str(), deterministic);
    nlohmann::json sidecar = describe();
    sidecar["table"] = stem + ".csv";
    if (!extra.is_null()) sidecar["summary"] = std::move(extra);
    emit_json(stem + ".json", sidecar, deterministic);
  }

  void emit_svg(const std::string& name, const io::PlotSpec& plot) {
    if (settings.svg) emit(name, io::render_svg(plot));
  }

  void finish() { manifest.write(describe()); }
};

data::Dataset load_dataset(const Run& run) {
  const auto& path = run.settings.dataset_path;
  if (!fs::exists(path)) {
    throw MissingInputError("dataset " + path.string() + " not found (run `sgwn synth` first)");
  }
  return data::load_dataset(path);
}

nn::SgwnModel load_model(const Run& run, const data::Dataset& ds) {
  const auto& path = run.settings.checkpoint_path;
  if (!fs::exists(path)) {
    throw MissingInputError("checkpoint " + path.string() + " not found (run `sgwn train` first)");
  }
  auto model = nn::load_checkpoint(path);
  if (!(model.graph() == *ds.graph)) {
    throw ValidationError("checkpoint graph does not match the dataset graph");
  }
  if (model.config().feature_dim != ds.feature_dim() ||
      model.config().num_classes != ds.num_classes()) {
    throw ValidationError("checkpoint shape does not match the dataset");
  }
  return model;
}

nlohmann::json metrics_json(const data::Dataset& ds, const nn::Evaluation& ev) {
  std::vector<std::vector<int>> confusion(ev.confusion.rows());
  for (Eigen::Index i = 0; i < ev.confusion.rows(); ++i) {
    for (Eigen::Index j = 0; j < ev.confusion.cols(); ++j) confusion[i].push_back(ev.confusion(i, j));
  }
  return {{"test_accuracy", ev.accuracy},
          {"test_samples", ds.test_indices.size()},
          {"train_samples", ds.train_indices.size()},
          {"class_names", ds.class_names},
          {"confusion", confusion}};
}

// ---------------------------------------------------------------------------

void cmd_synth(Run& run) {
  const auto& s = run.settings;
  const auto ds = data::build_dataset(s.synthetic, s.window, s.epsilon, s.samples_per_class);
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
  run.emit("dataset.sgwd", data::encode_dataset(ds));
  auto meta = ds.metadata();
  meta.erase("labels");
  meta.erase("split");
  meta["train_samples"] = ds.train_indices.size();
  meta["test_samples"] = ds.test_indices.size();
  run.emit_json("dataset.json", meta);
  run.emit_json("graph.json", ds.graph->to_json());
  std::cout << "wrote " << ds.samples.size() << " samples, " << ds.num_classes() << " classes, "
            << ds.graph->edge_count() << " edges to " << (run.out / "dataset.sgwd").string() << "\n";
}

void cmd_train(Run& run) {
  const auto& s = run.settings;
  const auto ds = load_dataset(run);
  auto outcome = harness::train_model(ds, s.model, s.train, [](const nn::EpochRecord& r) {
    std::fprintf(stderr, "epoch %4d  lr %.6f  loss %.6f  test_acc %.4f\n", r.epoch,
                 r.learning_rate, r.train_loss, r.test_accuracy);
  });
  run.emit("model.sgwn", nn::encode_checkpoint(outcome.model));
  io::CsvWriter csv({"epoch", "lr", "train_loss", "test_acc"});
  for (const auto& r : outcome.history) {
    csv.add_row({static_cast<long long>(r.epoch), r.learning_rate, r.train_loss, r.test_accuracy});
  }
  run.emit("history.csv", csv.str());
  run.emit_json("metrics.json", metrics_json(ds, outcome.test));
  std::cout << "test accuracy " << io::format_double(outcome.test.accuracy) << "\n";
}

void cmd_evaluate(Run& run) {
  const auto ds = load_dataset(run);
  const auto model = load_model(run, ds);
  const auto ev = nn::evaluate(model, ds.samples, ds.test_indices);
  run.emit_json("metrics.json", metrics_json(ds, ev));
  std::cout << "test accuracy " << io::format_double(ev.accuracy) << "\n";
}

void cmd_filters(Run& run) {
  const auto& s = run.settings;
  const auto spec = kernels::make_kernel(s.model.family, s.lambda_max, s.model.num_scales, s.model.q);
  const auto profile = kernels::frame_profile(spec, s.filter_grid);
  std::vector<std::string> header{"lambda"};
  if (spec.has_scaling()) header.push_back("h");
  for (int j = 0; j < spec.num_scales(); ++j) header.push_back("g_" + std::to_string(j + 1));
  header.push_back("sum_sq");
  io::CsvWriter csv(header);
  for (std::size_t i = 0; i < profile.lambda.size(); ++i) {
    std::vector<io::CsvField> row{profile.lambda[i]};
    if (spec.has_scaling()) row.push_back(profile.h[i]);
    for (const auto& g : profile.g) row.push_back(g[i]);
    row.push_back(profile.sum_sq[i]);
    csv.add_row(row);
  }
  const auto report = kernels::check_admissibility(spec);
  nlohmann::json summary = {{"family", std::string(kernels::to_string(spec.family()))},
                            {"scales", spec.scales()},
                            {"gamma", spec.gamma()},
                            {"frame_lower", profile.lower},
                            {"frame_upper", profile.upper},
                            {"admissible", report.passed()},
                            {"admissibility_failures", report.failures}};
  run.emit_table("filters", csv, summary);

  io::PlotSpec plot{"Filter bank (" + std::string(kernels::to_string(spec.family())) + ")",
                    "lambda", "response", {}, false};
  if (spec.has_scaling()) plot.series.push_back({"h", profile.lambda, profile.h});
  for (int j = 0; j < spec.num_scales(); ++j) {
    plot.series.push_back({"g_" + std::to_string(j + 1), profile.lambda, profile.g[j]});
  }
  plot.series.push_back({"sum of squares", profile.lambda, profile.sum_sq});
  run.emit_svg("filters.svg", plot);
  std::cout << "frame bounds [" << io::format_double(profile.lower) << ", "
            << io::format_double(profile.upper) << "], admissible "
            << (report.passed() ? "yes" : "no") << "\n";
}

void cmd_transform(Run& run) {
  const auto& s = run.settings;
  const auto ds = load_dataset(run);
  if (s.transform_sample >= static_cast<int>(ds.samples.size())) {
    throw ValidationError("transform.sample " + std::to_string(s.transform_sample) +
                          " out of range (dataset has " + std::to_string(ds.samples.size()) + ")");
  }
  const auto t = sgwt::Transform::for_graph(*ds.graph, s.model.family, s.model.num_scales,
                                            s.model.q, s.model.mode, s.model.order);
  const auto& x = ds.samples[s.transform_sample].features;
  const auto c = t.forward(x);
  io::CsvWriter csv({"band", "node", "t", "value"});
  for (int b = 0; b < c.band_count(); ++b) {
    for (Eigen::Index n = 0; n < c.bands[b].rows(); ++n) {
      for (Eigen::Index k = 0; k < c.bands[b].cols(); ++k) {
        csv.add_row({static_cast<long long>(b), static_cast<long long>(n), static_cast<long long>(k),
                     c.bands[b](n, k)});
      }
    }
  }
  std::vector<double> energy;
  for (const auto& band : c.bands) energy.push_back(band.squaredNorm());
  run.emit_table("coefficients", csv,
                 {{"sample", s.transform_sample},
                  {"label", ds.samples[s.transform_sample].label},
                  {"provenance", c.provenance.to_string()},
                  {"scaling_band", t.kernel().has_scaling()},
                  {"lambda_max", t.kernel().lambda_max()},
                  {"band_energy", energy}});
  std::cout << c.band_count() << " bands (" << c.provenance.to_string() << ")\n";
}

void cmd_ses(Run& run) {
  const auto& s = run.settings;
  std::vector<analysis::SesResult> results;
  double target = 0.0;
  nlohmann::json summary;
  if (s.ses_source == "am") {
    const auto x = analysis::am_test_vector(s.am_length, s.ses_fs, s.am_carrier_hz,
                                            s.am_modulation_hz, s.am_depth);
    results.push_back(analysis::squared_envelope_spectrum(x, s.ses_fs, "raw"));
    target = s.ses_target_hz.value_or(s.am_modulation_hz);
    summary = {{"source", "am"}};
  } else {
    const auto ds = load_dataset(run);
    const auto model = load_model(run, ds);
    int sample = -1;
    if (s.ses_sample) {
      sample = *s.ses_sample;
      if (sample >= static_cast<int>(ds.samples.size())) {
        throw ValidationError("ses.sample " + std::to_string(sample) + " out of range");
      }
    } else {
      for (int idx : ds.test_indices) {
        if (ds.fault_frequencies[ds.samples[idx].label] > 0.0) {
          sample = idx;
          break;
        }
      }
      if (sample < 0) throw ValidationError("no test sample belongs to a faulty class");
    }
    const auto& gs = ds.samples[sample];
    std::vector<double> raw(gs.features.cols());
    if (s.ses_node >= gs.features.rows()) throw ValidationError("ses.node out of range");
    for (Eigen::Index t = 0; t < gs.features.cols(); ++t) raw[t] = gs.features(s.ses_node, t);
    results.push_back(analysis::squared_envelope_spectrum(raw, ds.fs, "raw"));
    for (auto& r : analysis::feature_ses_report(model, gs, s.ses_node, ds.fs)) results.push_back(std::move(r));
    target = s.ses_target_hz.value_or(ds.fault_frequencies[gs.label]);
    summary = {{"source", "dataset"},
               {"sample", sample},
               {"label", gs.label},
               {"class", ds.class_names[gs.label]},
               {"node", s.ses_node}};
  }
  summary["target_hz"] = target;

  io::CsvWriter spectrum({"source", "frequency_hz", "magnitude"});
  io::CsvWriter peaks({"source", "kind", "target_hz", "peak_hz", "magnitude", "median", "prominence",
                       "located"});
  io::PlotSpec plot{"Squared envelope spectrum", "frequency (Hz)", "magnitude", {}, false};
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.frequency.size(); ++k) {
      spectrum.add_row({r.source, r.frequency[k], r.magnitude[k]});
    }
    const auto add_peak = [&](const std::string& kind, const analysis::LocateReport& p) {
      peaks.add_row({r.source, kind, p.target_hz, p.peak_hz, p.magnitude, p.median, p.prominence,
                     std::string(p.located ? "true" : "false")});
    };
    if (target > 0.0) add_peak("target", analysis::locate_fault_frequency(r, target, s.ses_tol_bins));
    add_peak("dominant", analysis::dominant_peak(r));
    plot.series.push_back({r.source, r.frequency, r.magnitude});
  }
  run.emit_table("ses", spectrum, summary);
  run.emit("peaks.csv", peaks.str());
  run.emit_svg("ses.svg", plot);
  for (const auto& r : results) {
    const auto p = target > 0.0 ? analysis::locate_fault_frequency(r, target, s.ses_tol_bins)
                                : analysis::dominant_peak(r);
    std::cout << r.source << ": peak " << io::format_double(p.peak_hz) << " Hz, prominence "
              << io::format_double(p.prominence) << (p.located ? " (located)" : "") << "\n";
  }
}

void cmd_depth_sweep(Run& run) {
  const auto& s = run.settings;
  const auto ds = load_dataset(run);
  const auto rows = harness::depth_sweep(ds, s.depths, s.model, s.train, s.baseline_batchnorm, s.jobs);
  io::CsvWriter csv({"model", "depth", "test_acc", "final_train_loss"});
  io::PlotSpec plot{"Accuracy against depth", "depth", "test accuracy", {}, true};
  plot.series = {{"sgwn", {}, {}}, {"lowpass", {}, {}}};
  for (const auto& r : rows) {
    csv.add_row({r.model, static_cast<long long>(r.depth), r.test_accuracy, r.final_loss});
    auto& series = plot.series[r.model == "sgwn" ? 0 : 1];
    series.x.push_back(r.depth);
    series.y.push_back(r.test_accuracy);
    std::cout << r.model << " depth " << r.depth << ": " << io::format_double(r.test_accuracy) << "\n";
  }
  run.emit_table("depth_sweep", csv);
  run.emit_svg("depth_sweep.svg", plot);
}

void cmd_hyper_sweep(Run& run) {
  const auto& s = run.settings;
  const auto ds = load_dataset(run);
  const auto rows = harness::hyperparam_sweep(ds, s.j_values, s.k_values, s.model, s.train,
                                              s.repeats, s.jobs);
  io::CsvWriter csv({"J", "K", "test_acc", "wall_seconds"});
  for (const auto& r : rows) {
    csv.add_row({static_cast<long long>(r.num_scales), static_cast<long long>(r.order),
                 r.test_accuracy, r.wall_seconds});
    std::cout << "J " << r.num_scales << " K " << r.order << ": "
              << io::format_double(r.test_accuracy) << " (" << r.wall_seconds << " s)\n";
  }
  // Wall time differs between otherwise identical runs.
  run.emit_table("hyper_sweep", csv, {}, false);
}

void cmd_noise_sweep(Run& run) {
  const auto& s = run.settings;
  const auto ds = load_dataset(run);
  const auto rows = harness::noise_sweep(ds, s.snr_list, s.model, s.train,
                                         derive_seed(s.seed, "noise"), s.jobs);
  io::CsvWriter csv({"snr_db", "test_acc"});
  for (const auto& r : rows) {
    csv.add_row({r.label(), r.test_accuracy});
    std::cout << r.label() << ": " << io::format_double(r.test_accuracy) << "\n";
  }
  run.emit_table("noise_sweep", csv);
}

void cmd_kernel_sweep(Run& run) {
  const auto& s = run.settings;
  const auto ds = load_dataset(run);
  const auto rows = harness::kernel_sweep(ds, s.families, s.modes, s.model, s.train, s.jobs);
  io::CsvWriter csv({"family", "mode", "admissible", "test_acc"});
  for (const auto& r : rows) {
    csv.add_row({std::string(kernels::to_string(r.family)), sgwt::to_string(r.mode),
                 std::string(r.admissible ? "true" : "false"), r.test_accuracy});
    std::cout << kernels::to_string(r.family) << " " << sgwt::to_string(r.mode) << ": "
              << io::format_double(r.test_accuracy) << "\n";
  }
  run.emit_table("kernel_sweep", csv);
}

struct Command {
  const char* name;
  const char* help;
  void (*fn)(Run&);
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"synth", "generate the synthetic multi-sensor dataset", cmd_synth},
      {"train", "train an SGWN on a dataset", cmd_train},
      {"evaluate", "evaluate a checkpoint on the dataset test split", cmd_evaluate},
      {"filters", "export kernel responses and the frame profile", cmd_filters},
      {"transform", "export the wavelet coefficients of one sample", cmd_transform},
      {"ses", "squared envelope spectra of a test vector or learned features", cmd_ses},
      {"depth-sweep", "accuracy against depth, SGWN and low-pass baseline", cmd_depth_sweep},
      {"hyper-sweep", "accuracy and wall time over (J, K)", cmd_hyper_sweep},
      {"noise-sweep", "accuracy under additive noise", cmd_noise_sweep},
      {"kernel-sweep", "accuracy per kernel family and transform mode", cmd_kernel_sweep},
  };
  return list;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "error (" << kind << "): " << e.what() << "\n";
  return code;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Spectral graph wavelet networks: transforms, training and diagnostics"};
  app.require_subcommand(1);
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print every configuration key and exit");

  std::string config_path;
  std::string out_dir;
  long long seed = 0;
  std::vector<std::string> overrides;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("-c,--config", config_path, "flat key = value config file");
    sub->add_option("-o,--out", out_dir, "output directory (default runs/<subcommand>)");
    sub->add_option("--seed", seed, "root seed");
    sub->add_option("overrides", overrides, "key=value overrides");
    subs.emplace_back(sub, &cmd);
  }
  if (argc >= 2 && std::string(argv[1]) == "--list-keys") {
    for (const auto& [key, desc] : config::describe_keys()) std::cout << key << "  (" << desc << ")\n";
    return kOk;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  const Command* chosen = nullptr;
  CLI::App* chosen_app = nullptr;
  for (auto& [sub, cmd] : subs) {
    if (sub->parsed()) {
      chosen = cmd;
      chosen_app = sub;
    }
  }
  const CLI::Option* seed_opt = chosen_app->get_option("--seed");

  try {
    config::Table table;
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) throw MissingInputError("config file " + config_path + " not found");
      table = config::parse(io::read_file(config_path), config_path);
    }
    for (const auto& o : overrides) {
      auto [key, value] = config::parse_override(o);
      table[key] = value;
    }
    if (seed_opt->count() > 0) table["seed"] = seed;
    if (!out_dir.empty()) table["output_dir"] = out_dir;
    auto settings = config::resolve(table);
    const fs::path out = settings.output_dir.value_or(fs::path("runs") / chosen->name);
    fs::create_directories(out);
    Run r{chosen->name, std::move(settings), out, io::Manifest(out)};
    chosen->fn(r);
    r.finish();
    return kOk;
  } catch (const ConfigError& e) {
    return report("config", e, kConfigError);
  } catch (const ValidationError& e) {
    return report("invalid input", e, kConfigError);
  } catch (const CapacityError& e) {
    return report("capacity", e, kConfigError);
  } catch (const MissingInputError& e) {
    return report("missing input", e, kMissingInput);
  } catch (const FormatError& e) {
    return report("unreadable input", e, kMissingInput);
  } catch (const NumericalError& e) {
    std::cerr << "error (numerical): " << e.what();
    if (std::isfinite(e.last_iterate())) std::cerr << " [last iterate " << io::format_double(e.last_iterate()) << "]";
    std::cerr << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    return report("internal", e, kFailure);
  }
}

}  // namespace sgwn::cli
