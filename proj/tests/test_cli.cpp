#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "sgwn/checkpoint.hpp"
#include "sgwn/cli.hpp"
#include "sgwn/config.hpp"
#include "sgwn/data.hpp"
#include "sgwn/harness.hpp"
#include "sgwn/io.hpp"
#include "sgwn/kernels.hpp"
#include "sgwn/seeds.hpp"

using namespace sgwn;
namespace fs = std::filesystem;

namespace {

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sgwn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "sgwn_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(io::read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const std::vector<std::string> kTiny{"data.record_length=4096", "data.window=64",
                                     "data.samples_per_class=20"};

/// Small dataset shared by the training-side tests.
fs::path tiny_dataset() {
  static const fs::path path = [] {
    auto args = kTiny;
    args.insert(args.begin(), {"synth", "-o", (scratch() / "tiny").string()});
    REQUIRE(invoke(args) == 0);
    return scratch() / "tiny" / "dataset.sgwd";
  }();
  return path;
}

std::string data_arg() { return "data.path=" + tiny_dataset().string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth defaults and reproducibility") {
  const auto a = scratch() / "synth_a", b = scratch() / "synth_b";
  REQUIRE(invoke({"synth", "-o", a.string()}) == 0);
  const auto meta = nlohmann::json::parse(io::read_file(a / "dataset.json"));
  CHECK(meta["count"] == 1000);
  CHECK(meta["class_names"].size() == 4);
  CHECK(meta["train_samples"] == 800);
  REQUIRE(invoke({"synth", "-o", b.string()}) == 0);
  CHECK(io::read_file(a / "dataset.sgwd") == io::read_file(b / "dataset.sgwd"));
  const auto m1 = io::read_file(a / "manifest.json");
  REQUIRE(invoke({"synth", "-o", a.string()}) == 0);
  CHECK(io::read_file(a / "manifest.json") == m1);
  const auto manifest = nlohmann::json::parse(m1);
  CHECK(manifest["files"].size() == 3);
  for (const auto& f : manifest["files"]) {
    CHECK(f["fnv1a64"] == io::content_hash(io::read_file(a / f["path"].get<std::string>())));
  }
}

TEST_CASE("exit codes") {
  const auto out = (scratch() / "errors").string();
  CHECK(invoke({"synth", "-o", out, "data.class.1.fault_hz=20000"}) == 2);
  CHECK(invoke({"synth", "-o", out, "data.bogus=1"}) == 2);
  CHECK(invoke({"synth", "-o", out, "kernel.J=two"}) == 2);
  CHECK(invoke({"filters", "-o", out, "kernel.family=meyer"}) == 2);
  CHECK(invoke({"nonsense"}) == 2);
  CHECK(invoke({"train", "-o", out, "data.path=" + (scratch() / "nope.sgwd").string()}) == 3);
  CHECK(invoke({"train", "-o", out, "-c", (scratch() / "nope.conf").string()}) == 3);
  io::write_file(scratch() / "junk.sgwd", "not a dataset");
  CHECK(invoke({"train", "-o", out, "data.path=" + (scratch() / "junk.sgwd").string()}) == 3);
  CHECK(invoke({"evaluate", "-o", out, data_arg(), "checkpoint=" + (scratch() / "none.sgwn").string()}) == 3);
  // A huge step overflows the weights; the non-finite loss surfaces as exit 4.
  CHECK(invoke({"train", "-o", out, data_arg(), "train.lr=1e300", "train.epochs=3", "train.batch_size=10"}) == 4);
}

TEST_CASE("config file and overrides") {
  const auto conf = scratch() / "run.conf";
  io::write_file(conf, "seed = 4\n[data]\nrecord_length = 4096\nwindow = 64\nsamples_per_class = 10\n");
  const auto out = scratch() / "conf_run";
  REQUIRE(invoke({"synth", "-c", conf.string(), "-o", out.string(), "data.samples_per_class=12"}) == 0);
  const auto meta = nlohmann::json::parse(io::read_file(out / "dataset.json"));
  CHECK(meta["count"] == 48);
  CHECK(meta["spec"]["seed"] == 4);
  REQUIRE(invoke({"synth", "-c", conf.string(), "-o", out.string(), "--seed", "9"}) == 0);
  CHECK(nlohmann::json::parse(io::read_file(out / "dataset.json"))["spec"]["seed"] == 9);
}

TEST_CASE("train with zero epochs writes the initialization") {
  const auto out = scratch() / "train0";
  REQUIRE(invoke({"train", "-o", out.string(), data_arg(), "train.epochs=0"}) == 0);
  const auto ds = data::load_dataset(tiny_dataset());
  const auto cfg = harness::model_for(ds, config::resolve({}).model);
  const nn::SgwnModel init(cfg, ds.graph, derive_seed(0, "init"));
  CHECK(io::read_file(out / "model.sgwn") == nn::encode_checkpoint(init));
  CHECK(read_csv(out / "history.csv").size() == 1);
}

TEST_CASE("train, reload and evaluate") {
  const auto out = scratch() / "train3";
  REQUIRE(invoke({"train", "-o", out.string(), data_arg(), "train.epochs=3", "train.batch_size=16"}) == 0);
  const auto hist = read_csv(out / "history.csv");
  REQUIRE(hist.size() == 4);
  CHECK(hist[0] == std::vector<std::string>{"epoch", "lr", "train_loss", "test_acc"});
  const auto metrics = nlohmann::json::parse(io::read_file(out / "metrics.json"));
  const auto eval = scratch() / "eval3";
  REQUIRE(invoke({"evaluate", "-o", eval.string(), data_arg(),
               "checkpoint=" + (out / "model.sgwn").string()}) == 0);
  const auto again = nlohmann::json::parse(io::read_file(eval / "metrics.json"));
  CHECK(again["test_accuracy"] == metrics["test_accuracy"]);
  CHECK(again["confusion"] == metrics["confusion"]);
  CHECK(metrics["confusion"].size() == 4);
}

TEST_CASE("filters") {
  const auto out = scratch() / "filters";
  REQUIRE(invoke({"filters", "-o", out.string(), "kernel.J=5", "filters.grid=11"}) == 0);
  const auto rows = read_csv(out / "filters.csv");
  REQUIRE(rows.size() == 12);
  CHECK(rows[0] == std::vector<std::string>{"lambda", "h", "g_1", "g_2", "g_3", "g_4", "g_5", "sum_sq"});
  const auto k = kernels::mexican_hat(2.0, 2.0, 5);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double lambda = std::stod(rows[r][0]);
    CHECK(std::stod(rows[r][1]) == k.scaling(lambda));
    for (int j = 0; j < 5; ++j) CHECK(std::stod(rows[r][2 + j]) == k.wavelet(j, lambda));
  }
  CHECK(fs::exists(out / "filters.svg"));
  CHECK(fs::exists(out / "filters.json"));

  REQUIRE(invoke({"filters", "-o", out.string(), "kernel.family=heat", "kernel.J=3"}) == 0);
  CHECK(read_csv(out / "filters.csv")[0] == std::vector<std::string>{"lambda", "g_1", "g_2", "g_3", "sum_sq"});
}

TEST_CASE("transform") {
  const auto out = scratch() / "transform";
  REQUIRE(invoke({"transform", "-o", out.string(), data_arg(), "transform.sample=5"}) == 0);
  const auto rows = read_csv(out / "coefficients.csv");
  CHECK(rows.size() == 1 + 3 * 5 * 64);
  CHECK(rows[0] == std::vector<std::string>{"band", "node", "t", "value"});
  CHECK(invoke({"transform", "-o", out.string(), data_arg(), "transform.sample=5000"}) == 2);
}

TEST_CASE("ses on the AM test vector") {
  const auto out = scratch() / "ses";
  REQUIRE(invoke({"ses", "-o", out.string()}) == 0);
  const auto peaks = read_csv(out / "peaks.csv");
  REQUIRE(peaks.size() == 3);
  CHECK(peaks[1][1] == "target");
  CHECK(std::abs(std::stod(peaks[1][3]) - 50.0) <= 1.0);
  CHECK(peaks[1][7] == "true");
  CHECK(std::abs(std::stod(peaks[2][3]) - 50.0) <= 1.0);
}

TEST_CASE("sweeps") {
  const auto out = scratch() / "sweeps";
  const std::vector<std::string> quick{data_arg(), "train.epochs=2", "train.batch_size=16"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), quick.begin(), quick.end());
    return a;
  };
  REQUIRE(invoke(with({"depth-sweep", "-o", out.string(), "sweep.depths=[2,4]"})) == 0);
  const auto depth = read_csv(out / "depth_sweep.csv");
  CHECK(depth.size() == 5);
  const auto first = io::read_file(out / "manifest.json");
  REQUIRE(invoke(with({"depth-sweep", "-o", out.string(), "sweep.depths=[2,4]"})) == 0);
  CHECK(io::read_file(out / "manifest.json") == first);

  REQUIRE(invoke(with({"noise-sweep", "-o", out.string(), "sweep.snr=[]"})) == 0);
  CHECK(read_csv(out / "noise_sweep.csv").size() == 2);
  REQUIRE(invoke(with({"noise-sweep", "-o", out.string(), "sweep.snr=[none, 60, 0]"})) == 0);
  const auto noise = read_csv(out / "noise_sweep.csv");
  REQUIRE(noise.size() == 4);
  CHECK(noise[1][0] == "clean");

  REQUIRE(invoke(with({"hyper-sweep", "-o", out.string(), "sweep.J=[2,3]", "sweep.K=[2]"})) == 0);
  CHECK(read_csv(out / "hyper_sweep.csv").size() == 3);
  const auto manifest = nlohmann::json::parse(io::read_file(out / "manifest.json"));
  for (const auto& f : manifest["files"]) CHECK(f["deterministic"] == false);

  REQUIRE(invoke(with({"kernel-sweep", "-o", out.string()})) == 0);
  const auto kern = read_csv(out / "kernel_sweep.csv");
  CHECK(kern.size() == 1 + 3 * 2);
}

}
