#include "sgwn/config.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <charconv>
#include <regex>

#include "sgwn/errors.hpp"

namespace sgwn::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view s) {
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) {
      const char e = s[++i];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: throw ConfigError(std::string("unsupported escape \\") + e);
      }
    } else {
      out += s[i];
    }
  }
  return out;
}

nlohmann::json parse_scalar(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw ConfigError("empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw ConfigError("unterminated string");
    return unquote(s);
  }
  if (s == "true") return true;
  if (s == "false") return false;
  long long i = 0;
  auto [ip, iec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (iec == std::errc() && ip == s.data() + s.size()) return i;
  double d = 0.0;
  auto [dp, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (dec == std::errc() && dp == s.data() + s.size()) return d;
  return std::string(s);
}

std::size_t comment_start(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return i;
  }
  return std::string_view::npos;
}

}  // namespace

nlohmann::json parse_value(std::string_view raw) {
  raw = trim(raw);
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') throw ConfigError("unterminated array");
    auto inner = trim(raw.substr(1, raw.size() - 2));
    auto out = nlohmann::json::array();
    if (inner.empty()) return out;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
      if (i < inner.size() && inner[i] == '"') quoted = !quoted;
      if (i == inner.size() || (inner[i] == ',' && !quoted)) {
        auto item = trim(inner.substr(start, i - start));
        if (item.empty()) {
          if (i == inner.size()) break;  // trailing comma
          throw ConfigError("empty array element");
        }
        out.push_back(parse_scalar(item));
        start = i + 1;
      }
    }
    return out;
  }
  return parse_scalar(raw);
}

Table parse(std::string_view text, const std::string& source) {
  Table table;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
    if (auto c = comment_start(line); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[' && line.find('=') == std::string_view::npos) {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where() + "expected key = value");
    const std::string key_part(trim(line.substr(0, eq)));
    if (key_part.empty()) throw ConfigError(where() + "missing key");
    const std::string key = section.empty() ? key_part : section + "." + key_part;
    if (table.count(key)) throw ConfigError(where() + "duplicate key '" + key + "'");
    try {
      table[key] = parse_value(line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where() + key + ": " + e.what());
    }
    if (end == text.size()) break;
  }
  return table;
}

std::pair<std::string, nlohmann::json> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(text) + "' is not key=value");
  }
  const std::string key(trim(text.substr(0, eq)));
  if (key.empty()) throw ConfigError("override '" + std::string(text) + "' has no key");
  try {
    return {key, parse_value(text.substr(eq + 1))};
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

namespace {

enum class Kind { integer, real, boolean, string, int_list, real_list, string_list, snr_list };

struct KeyDef {
  const char* name;
  Kind kind;
  nlohmann::json fallback;  // null = no default
};

const std::vector<KeyDef>& schema() {
  static const std::vector<KeyDef> keys = {
      {"seed", Kind::integer, 0},
      {"output_dir", Kind::string, nullptr},
      {"data.path", Kind::string, "runs/synth/dataset.sgwd"},
      {"data.sensors", Kind::integer, 5},
      {"data.fs", Kind::real, 20480.0},
      {"data.record_length", Kind::integer, 64000},
      {"data.phase_step", Kind::real, 1.0471975511965976},
      {"data.window", Kind::integer, 256},
      {"data.epsilon", Kind::real, 0.9},
      {"data.samples_per_class", Kind::integer, 250},
      {"data.classes", Kind::integer, 4},
      {"checkpoint", Kind::string, "runs/train/model.sgwn"},
      {"model.layer", Kind::string, "sgwconv"},
      {"model.depth", Kind::integer, 2},
      {"model.hidden", Kind::integer, 512},
      {"model.batchnorm", Kind::boolean, true},
      {"kernel.family", Kind::string, "mexican_hat"},
      {"kernel.J", Kind::integer, 2},
      {"kernel.K", Kind::integer, 2},
      {"kernel.Q", Kind::real, 2.0},
      {"kernel.mode", Kind::string, "chebyshev"},
      {"kernel.lambda_max", Kind::real, 2.0},
      {"train.epochs", Kind::integer, 100},
      {"train.batch_size", Kind::integer, 100},
      {"train.lr", Kind::real, 0.01},
      {"train.decay", Kind::real, 0.99},
      {"filters.grid", Kind::integer, 501},
      {"transform.sample", Kind::integer, 0},
      {"ses.source", Kind::string, "am"},
      {"ses.fs", Kind::real, 20480.0},
      {"ses.am.carrier_hz", Kind::real, 2000.0},
      {"ses.am.modulation_hz", Kind::real, 50.0},
      {"ses.am.depth", Kind::real, 0.5},
      {"ses.am.length", Kind::integer, 20480},
      {"ses.target_hz", Kind::real, nullptr},
      {"ses.tol_bins", Kind::integer, 1},
      {"ses.sample", Kind::integer, nullptr},
      {"ses.node", Kind::integer, 0},
      {"sweep.depths", Kind::int_list, {2, 10}},
      {"sweep.J", Kind::int_list, {2, 3, 4, 5, 6}},
      {"sweep.K", Kind::int_list, {2}},
      {"sweep.snr", Kind::snr_list, {0, -5}},
      {"sweep.families", Kind::string_list, {"mexican_hat", "cubic_spline", "heat"}},
      {"sweep.modes", Kind::string_list, {"exact", "chebyshev"}},
      {"sweep.jobs", Kind::integer, 1},
      {"sweep.repeats", Kind::integer, 1},
      {"sweep.baseline_batchnorm", Kind::boolean, false},
      {"plot.svg", Kind::boolean, true},
  };
  return keys;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::integer: return "integer";
    case Kind::real: return "number";
    case Kind::boolean: return "boolean";
    case Kind::string: return "string";
    case Kind::int_list: return "list of integers";
    case Kind::real_list: return "list of numbers";
    case Kind::string_list: return "list of strings";
    case Kind::snr_list: return "list of numbers or none";
  }
  return "?";
}

bool is_real(const nlohmann::json& v) { return v.is_number(); }

nlohmann::json coerce(const std::string& key, Kind kind, const nlohmann::json& v) {
  const auto fail = [&] {
    throw ConfigError(key + ": expected " + kind_name(kind) + ", got " + v.dump());
  };
  switch (kind) {
    case Kind::integer:
      if (!v.is_number_integer()) fail();
      return v;
    case Kind::real:
      if (!is_real(v)) fail();
      return v.get<double>();
    case Kind::boolean:
      if (!v.is_boolean()) fail();
      return v;
    case Kind::string:
      if (!v.is_string()) fail();
      return v;
    case Kind::int_list:
    case Kind::real_list:
    case Kind::string_list:
    case Kind::snr_list: {
      nlohmann::json arr = v.is_array() ? v : nlohmann::json::array({v});
      for (auto& item : arr) {
        const bool ok = (kind == Kind::int_list && item.is_number_integer()) ||
                        (kind == Kind::real_list && item.is_number()) ||
                        (kind == Kind::string_list && item.is_string()) ||
                        (kind == Kind::snr_list &&
                         (item.is_number() || (item.is_string() && item == "none")));
        if (!ok) fail();
      }
      return arr;
    }
  }
  return v;
}

const std::regex& class_key() {
  static const std::regex re(R"(data\.class\.(\d+)\.(name|carrier_hz|fault_hz|decay|coupling|noise))");
  return re;
}

Kind class_field_kind(const std::string& field) {
  if (field == "name") return Kind::string;
  if (field == "coupling") return Kind::real_list;
  return Kind::real;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> describe_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : schema()) {
    out.emplace_back(k.name, std::string(kind_name(k.kind)) +
                                 (k.fallback.is_null() ? "" : ", default " + k.fallback.dump()));
  }
  out.emplace_back("data.class.<i>.{name,carrier_hz,fault_hz,decay,coupling,noise}",
                   "per-class synthetic signal definition");
  return out;
}

Settings resolve(const Table& table) {
  nlohmann::json v = nlohmann::json::object();
  for (const auto& k : schema()) v[k.name] = k.fallback;
  std::map<int, std::map<std::string, nlohmann::json>> class_overrides;

  for (const auto& [key, value] : table) {
    std::smatch m;
    if (std::regex_match(key, m, class_key())) {
      const std::string field = m[2];
      class_overrides[std::stoi(m[1])][field] = coerce(key, class_field_kind(field), value);
      continue;
    }
    const auto it = std::find_if(schema().begin(), schema().end(),
                                 [&](const KeyDef& d) { return key == d.name; });
    if (it == schema().end()) throw ConfigError(key + ": unknown configuration key");
    v[key] = coerce(key, it->kind, value);
  }

  Settings s;
  const auto geti = [&](const char* k) { return v[k].get<long long>(); };
  const auto getd = [&](const char* k) { return v[k].get<double>(); };
  const auto gets = [&](const char* k) { return v[k].get<std::string>(); };
  const auto positive = [&](const char* k) {
    const long long x = geti(k);
    if (x < 1) throw ConfigError(std::string(k) + ": must be at least 1");
    if (x > std::numeric_limits<int>::max()) throw ConfigError(std::string(k) + ": too large");
    return static_cast<int>(x);
  };
  const auto wrap = [](const char* k, auto&& fn) {
    try {
      return fn();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(k) + ": " + e.what());
    }
  };

  const long long seed = geti("seed");
  if (seed < 0) throw ConfigError("seed: must be nonnegative");
  s.seed = static_cast<std::uint64_t>(seed);
  if (!v["output_dir"].is_null()) s.output_dir = gets("output_dir");
  s.dataset_path = gets("data.path");
  s.checkpoint_path = gets("checkpoint");

  // Synthetic rig.
  auto& syn = s.synthetic;
  syn = data::SyntheticSpec::defaults();
  syn.seed = s.seed;
  syn.sensors = positive("data.sensors");
  syn.fs = getd("data.fs");
  syn.record_length = positive("data.record_length");
  syn.phase_step = getd("data.phase_step");
  const int num_classes = positive("data.classes");
  const int defaults = static_cast<int>(syn.classes.size());
  syn.classes.resize(num_classes);
  for (const auto& [idx, fields] : class_overrides) {
    if (idx >= num_classes) {
      throw ConfigError("data.class." + std::to_string(idx) + ": index beyond data.classes = " +
                        std::to_string(num_classes));
    }
  }
  for (int c = 0; c < num_classes; ++c) {
    auto& k = syn.classes[c];
    const auto found = class_overrides.find(c);
    const std::string prefix = "data.class." + std::to_string(c) + ".";
    if (c >= defaults) {
      for (const char* f : {"name", "carrier_hz", "fault_hz", "decay", "coupling", "noise"}) {
        if (found == class_overrides.end() || !found->second.count(f)) {
          throw ConfigError(prefix + f + ": required for classes beyond the built-in " +
                            std::to_string(defaults));
        }
      }
    }
    if (found != class_overrides.end()) {
      for (const auto& [field, value] : found->second) {
        if (field == "name") k.name = value.get<std::string>();
        if (field == "carrier_hz") k.carrier_hz = value.get<double>();
        if (field == "fault_hz") k.fault_hz = value.get<double>();
        if (field == "decay") k.decay = value.get<double>();
        if (field == "coupling") k.coupling = value.get<std::vector<double>>();
        if (field == "noise") k.noise = value.get<double>();
        v[prefix + field] = value;
      }
    }
    v[prefix + "name"] = k.name;
    v[prefix + "carrier_hz"] = k.carrier_hz;
    v[prefix + "fault_hz"] = k.fault_hz;
    v[prefix + "decay"] = k.decay;
    v[prefix + "coupling"] = k.coupling;
    v[prefix + "noise"] = k.noise;
  }
  try {
    syn.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("data: ") + e.what());
  }
  s.window = positive("data.window");
  s.epsilon = getd("data.epsilon");
  if (!(s.epsilon >= -1.0 && s.epsilon <= 1.0)) throw ConfigError("data.epsilon: must lie in [-1, 1]");
  s.samples_per_class = positive("data.samples_per_class");
  if (static_cast<long long>(s.window) * s.samples_per_class > syn.record_length) {
    throw ConfigError("data.samples_per_class: record_length " + std::to_string(syn.record_length) +
                      " holds only " + std::to_string(syn.record_length / s.window) +
                      " windows of data.window = " + std::to_string(s.window));
  }

  // Model and training.
  s.model.layer = wrap("model.layer", [&] { return nn::parse_layer_kind(gets("model.layer")); });
  s.model.depth = positive("model.depth");
  s.model.hidden = positive("model.hidden");
  s.model.batchnorm = v["model.batchnorm"].get<bool>();
  s.model.family = wrap("kernel.family", [&] { return kernels::parse_family(gets("kernel.family")); });
  s.model.num_scales = positive("kernel.J");
  s.model.order = positive("kernel.K");
  s.model.q = getd("kernel.Q");
  if (!(s.model.q > 1.0)) throw ConfigError("kernel.Q: must exceed 1");
  s.model.mode = wrap("kernel.mode", [&] { return sgwt::parse_mode(gets("kernel.mode")); });
  s.model.num_classes = num_classes;
  s.model.feature_dim = s.window;
  s.lambda_max = getd("kernel.lambda_max");
  if (!(s.lambda_max > 0.0)) throw ConfigError("kernel.lambda_max: must be positive");

  const long long epochs = geti("train.epochs");
  if (epochs < 0) throw ConfigError("train.epochs: must be nonnegative");
  s.train.epochs = static_cast<int>(epochs);
  s.train.batch_size = positive("train.batch_size");
  s.train.learning_rate = getd("train.lr");
  if (!(s.train.learning_rate > 0.0)) throw ConfigError("train.lr: must be positive");
  s.train.decay = getd("train.decay");
  if (!(s.train.decay > 0.0 && s.train.decay <= 1.0)) throw ConfigError("train.decay: must lie in (0, 1]");
  s.train.seed = s.seed;

  s.filter_grid = positive("filters.grid");
  if (s.filter_grid < 2) throw ConfigError("filters.grid: must be at least 2");
  const long long sample = geti("transform.sample");
  if (sample < 0) throw ConfigError("transform.sample: must be nonnegative");
  s.transform_sample = static_cast<int>(sample);

  s.ses_source = gets("ses.source");
  if (s.ses_source != "am" && s.ses_source != "dataset") {
    throw ConfigError("ses.source: expected \"am\" or \"dataset\"");
  }
  s.ses_fs = getd("ses.fs");
  if (!(s.ses_fs > 0.0)) throw ConfigError("ses.fs: must be positive");
  s.am_carrier_hz = getd("ses.am.carrier_hz");
  s.am_modulation_hz = getd("ses.am.modulation_hz");
  s.am_depth = getd("ses.am.depth");
  s.am_length = positive("ses.am.length");
  if (!v["ses.target_hz"].is_null()) s.ses_target_hz = getd("ses.target_hz");
  const long long tol = geti("ses.tol_bins");
  if (tol < 0) throw ConfigError("ses.tol_bins: must be nonnegative");
  s.ses_tol_bins = static_cast<int>(tol);
  if (!v["ses.sample"].is_null()) {
    if (geti("ses.sample") < 0) throw ConfigError("ses.sample: must be nonnegative");
    s.ses_sample = static_cast<int>(geti("ses.sample"));
  }
  if (geti("ses.node") < 0) throw ConfigError("ses.node: must be nonnegative");
  s.ses_node = static_cast<int>(geti("ses.node"));

  s.depths = v["sweep.depths"].get<std::vector<int>>();
  s.j_values = v["sweep.J"].get<std::vector<int>>();
  s.k_values = v["sweep.K"].get<std::vector<int>>();
  for (const char* k : {"sweep.depths", "sweep.J", "sweep.K"}) {
    for (int x : v[k].get<std::vector<int>>()) {
      if (x < 1) throw ConfigError(std::string(k) + ": entries must be at least 1");
    }
  }
  s.snr_list.clear();
  for (const auto& item : v["sweep.snr"]) {
    if (item.is_string()) {
      s.snr_list.push_back(std::nullopt);
    } else {
      s.snr_list.push_back(item.get<double>());
    }
  }
  for (const auto& f : v["sweep.families"]) {
    s.families.push_back(wrap("sweep.families", [&] { return kernels::parse_family(f.get<std::string>()); }));
  }
  for (const auto& m : v["sweep.modes"]) {
    s.modes.push_back(wrap("sweep.modes", [&] { return sgwt::parse_mode(m.get<std::string>()); }));
  }
  s.jobs = positive("sweep.jobs");
  s.repeats = positive("sweep.repeats");
  s.baseline_batchnorm = v["sweep.baseline_batchnorm"].get<bool>();
  s.svg = v["plot.svg"].get<bool>();

  s.resolved = std::move(v);
  return s;
}

}  // namespace sgwn::config
