#include <doctest.h>

#include <cstdlib>

#include "sgwn/config.hpp"
#include "sgwn/errors.hpp"
#include "sgwn/io.hpp"
#include "sgwn/seeds.hpp"

using namespace sgwn;

TEST_SUITE("io") {

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(48.0 / 200.0) == "0.24");
  CHECK(io::format_double(std::nan("")) == "nan");
}

TEST_CASE("csv quoting") {
  CHECK(io::csv_escape("plain") == "plain");
  CHECK(io::csv_escape("a,b") == "\"a,b\"");
  CHECK(io::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(io::csv_escape("two\nlines") == "\"two\nlines\"");
  io::CsvWriter w({"name", "x", "n"});
  w.add_row({std::string("a,b"), 0.5, 3LL});
  CHECK(w.str() == "name,x,n\r\n\"a,b\",0.5,3\r\n");
  CHECK(w.rows() == 1);
  CHECK_THROWS_AS(w.add_row({0.5}), ValidationError);
}

TEST_CASE("hashes and seeds") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::content_hash("a") == "af63dc4c8601ec8c");
  CHECK(derive_seed(0, "init") != derive_seed(0, "shuffle"));
  CHECK(derive_seed(0, "init") != derive_seed(1, "init"));
  CHECK(derive_seed(7, "noise") == derive_seed(7, "noise"));
}

TEST_CASE("byte reader reports offsets") {
  io::ByteWriter w;
  w.u32(7);
  w.f64(1.5);
  const std::string b = w.str();
  CHECK(b.size() == 12);
  io::ByteReader r(b);
  CHECK(r.u32("a") == 7);
  CHECK(r.f64("b") == 1.5);
  try {
    r.u32("c");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 12);
  }
}

TEST_CASE("svg rendering") {
  io::PlotSpec p{"t<1>", "x", "y", {{"alpha", {0, 1, 2}, {1, 4, 9}}}, true};
  const auto svg = io::render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("alpha") != std::string::npos);
  CHECK(svg.find("t&lt;1&gt;") != std::string::npos);
}

}

TEST_SUITE("config") {

TEST_CASE("parsing") {
  const auto t = config::parse(R"(
seed = 3   # trailing comment
[data]
window = 128
epsilon = 0.5
name = "with # hash"
[sweep]
depths = [2, 4, 6]
snr = [none, 0, -5]
baseline_batchnorm = true
)");
  CHECK(t.at("seed") == 3);
  CHECK(t.at("data.window") == 128);
  CHECK(t.at("data.epsilon") == 0.5);
  CHECK(t.at("data.name") == "with # hash");
  CHECK(t.at("sweep.depths") == nlohmann::json::parse("[2,4,6]"));
  CHECK(t.at("sweep.baseline_batchnorm") == true);
  CHECK_THROWS_AS(config::parse("a = 1\na = 2"), ConfigError);
  CHECK_THROWS_AS(config::parse("[broken\n"), ConfigError);
  CHECK_THROWS_AS(config::parse("novalue\n"), ConfigError);
  const auto [k, v] = config::parse_override("kernel.J=4");
  CHECK(k == "kernel.J");
  CHECK(v == 4);
  CHECK_THROWS_AS(config::parse_override("kernel.J"), ConfigError);
}

TEST_CASE("schema resolution") {
  const auto s = config::resolve({});
  CHECK(s.seed == 0);
  CHECK(s.window == 256);
  CHECK(s.samples_per_class == 250);
  CHECK(s.model.num_scales == 2);
  CHECK(s.model.order == 2);
  CHECK(s.train.batch_size == 100);
  CHECK(s.train.learning_rate == 0.01);
  CHECK(s.train.decay == 0.99);
  CHECK(s.synthetic.classes.size() == 4);
  CHECK(s.depths == std::vector<int>{2, 10});
  CHECK(s.snr_list.size() == 2);

  config::Table t{{"seed", 5}, {"sweep.snr", nlohmann::json::parse(R"(["none", 0])")},
                  {"kernel.family", "heat"}, {"data.class.1.fault_hz", 300.0}};
  const auto r = config::resolve(t);
  CHECK(r.synthetic.seed == 5);
  CHECK(r.train.seed == 5);
  CHECK(!r.snr_list[0].has_value());
  CHECK(r.model.family == kernels::KernelFamily::heat);
  CHECK(r.synthetic.classes[1].fault_hz == 300.0);

  auto err = [](config::Table t) {
    try {
      config::resolve(t);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(err({{"kernel.bogus", 1}}).find("kernel.bogus") != std::string::npos);
  CHECK(err({{"kernel.J", "two"}}).find("kernel.J") != std::string::npos);
  CHECK(err({{"kernel.family", "meyer"}}) != "");
  CHECK(err({{"data.class.1.fault_hz", 20000.0}}).find("data") != std::string::npos);
  CHECK(err({{"data.class.7.name", "x"}}) != "");
  CHECK(!config::describe_keys().empty());
}

}
