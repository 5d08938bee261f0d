#include "sgwn/checkpoint.hpp"

#include "sgwn/errors.hpp"
#include "sgwn/io.hpp"

namespace sgwn::nn {

namespace {

constexpr std::string_view kMagic = "SGWN";

std::vector<ArrayRef> all_arrays(SgwnModel& model) {
  auto arrays = parameter_arrays(model.params);
  for (auto& b : model.buffer_arrays()) arrays.push_back(b);
  return arrays;
}

}  // namespace

std::string encode_checkpoint(const SgwnModel& model) {
  SgwnModel copy = model;
  const auto arrays = all_arrays(copy);
  nlohmann::json header;
  header["model"] = model.config().to_json();
  header["graph"] = model.graph().to_json();
  header["arrays"] = nlohmann::json::array();
  for (const auto& a : arrays) header["arrays"].push_back({{"name", a.name}, {"rows", a.rows}, {"cols", a.cols}});
  const std::string text = header.dump();

  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u64(text.size());
  w.bytes(text);
  for (const auto& a : arrays) w.f64s(a.data, static_cast<std::size_t>(a.size()));
  return w.take();
}

SgwnModel decode_checkpoint(std::string_view bytes) {
  io::ByteReader r(bytes);
  if (r.bytes(4, "magic") != kMagic) throw FormatError("not an SGWN checkpoint", 0);
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  const std::uint64_t length = r.u64("header length");
  const std::size_t header_at = r.offset();
  const auto text = r.bytes(length, "header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what(), header_at);
  }
  std::optional<SgwnModel> model;
  try {
    auto g = std::make_shared<const graph::Graph>(graph::Graph::from_json(header.at("graph")));
    model.emplace(ModelConfig::from_json(header.at("model")), std::move(g), 0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what(), header_at);
  } catch (const Error& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what(), header_at);
  }
  const auto arrays = all_arrays(*model);
  const auto& listed = header.at("arrays");
  if (listed.size() != arrays.size()) {
    throw FormatError("checkpoint array count does not match the model", header_at);
  }
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const auto& a = arrays[i];
    if (listed[i].at("name") != a.name || listed[i].at("rows") != a.rows ||
        listed[i].at("cols") != a.cols) {
      throw FormatError("checkpoint array '" + a.name + "' has an unexpected shape", header_at);
    }
    r.f64s(a.data, static_cast<std::size_t>(a.size()), a.name.c_str());
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint data", r.offset());
  return std::move(*model);
}

void save_checkpoint(const SgwnModel& model, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(model));
}

SgwnModel load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace sgwn::nn
