#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace cutkit {

// Canonical single-line JSON: keys alphabetical, floating-point numbers
// printed with the shortest round-trip representation padded to at least
// six decimal digits. Two writes of the same value are byte-identical.
std::string dump_canonical(const nlohmann::json& value);

std::string format_float(double value);

// Streaming line writer; gzip-wraps the output when `compress` is set.
// The gzip header is fixed (mtime 0) so identical content gives
// identical bytes.
class LineSink {
 public:
  LineSink(std::ostream& out, bool compress);
  explicit LineSink(const std::string& path, bool compress);
  ~LineSink();
  LineSink(const LineSink&) = delete;
  LineSink& operator=(const LineSink&) = delete;

  void write_line(std::string_view line);
  void close();
  std::uint64_t bytes_written() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Streaming line reader with gzip auto-detection (magic bytes 1f 8b).
// Memory use is bounded by the longest line, not the file size.
class LineSource {
 public:
  explicit LineSource(std::unique_ptr<std::istream> in);
  explicit LineSource(const std::string& path);
  ~LineSource();
  LineSource(const LineSource&) = delete;
  LineSource& operator=(const LineSource&) = delete;

  // Returns the next line without its terminator, or nullopt at EOF.
  std::optional<std::string> next();
  std::size_t line_number() const;  // 1-based number of the last line returned

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool path_looks_gzip(const std::string& path);

}  // namespace cutkit
