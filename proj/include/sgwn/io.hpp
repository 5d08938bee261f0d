#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace sgwn::io {

/// Shortest form that parses back to v; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// RFC 4180 field quoting.
std::string csv_escape(std::string_view field);

using CsvField = std::variant<std::string, double, long long>;

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<CsvField>& row);
  std::size_t rows() const noexcept { return rows_; }
  const std::string& str() const noexcept { return text_; }
  void write(const std::filesystem::path& path) const;

 private:
  void append_line(const std::vector<std::string>& cells);

  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Hex FNV-1a 64 of a byte string.
std::string content_hash(std::string_view bytes);

/// Little-endian encoder.
class ByteWriter {
 public:
  void bytes(std::string_view b) { buf_.append(b); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(const double* data, std::size_t count);
  const std::string& str() const noexcept { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

/// Little-endian decoder; throws FormatError with the failing offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n, const char* what);
  std::uint32_t u32(const char* what);
  std::uint64_t u64(const char* what);
  double f64(const char* what);
  void f64s(double* out, std::size_t count, const char* what);
  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

/// Index of produced files with content hashes, written as manifest.json.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path root) : root_(std::move(root)) {}

  /// Hashes the file now. `deterministic` is false for files carrying wall time.
  void add(const std::filesystem::path& file, bool deterministic = true);
  nlohmann::json to_json(const nlohmann::json& run) const;
  void write(const nlohmann::json& run) const;

 private:
  std::filesystem::path root_;
  nlohmann::json files_ = nlohmann::json::array();
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool markers = false;
};

/// Minimal standalone SVG line chart.
std::string render_svg(const PlotSpec& spec);

}  // namespace sgwn::io
