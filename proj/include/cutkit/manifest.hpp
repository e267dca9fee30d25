#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutkit/errors.hpp"
#include "cutkit/jsonl.hpp"

namespace cutkit {

// Tolerance for all "within bounds" comparisons on second-valued fields.
inline constexpr double kTimeTolerance = 0.002;

enum class SourceKind { File, Memory, Command };

std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& s);

struct AudioSource {
  SourceKind kind = SourceKind::File;
  std::vector<int> channel_ids;
  // File: a path. Command: the shell command (parse-only). Memory: raw
  // bytes of a WAV file (base64 in JSON).
  std::string location;

  bool operator==(const AudioSource&) const = default;
};

struct Recording {
  std::string id;
  std::vector<AudioSource> sources;
  int sampling_rate = 0;
  std::int64_t num_samples = 0;
  double duration = 0.0;
  std::vector<int> channel_ids;
  nlohmann::json extras = nlohmann::json::object();  // unknown JSON fields

  bool operator==(const Recording&) const = default;
};

struct SupervisionSegment {
  std::string id;
  std::string recording_id;
  double start = 0.0;
  double duration = 0.0;
  int channel = 0;
  std::optional<std::string> text;
  std::optional<std::string> speaker;
  std::optional<std::string> language;
  std::optional<std::string> gender;
  std::map<std::string, std::string> custom;
  nlohmann::json extras = nlohmann::json::object();

  double end() const { return start + duration; }
  bool operator==(const SupervisionSegment&) const = default;
};

struct FeaturesManifest {
  std::string recording_id;
  std::vector<int> channels;
  double start = 0.0;
  double duration = 0.0;
  std::string extractor_type;
  std::int64_t num_frames = 0;
  std::int64_t num_features = 0;
  double frame_shift = 0.0;
  int sampling_rate = 0;
  std::string storage_path;
  std::string storage_key;
  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const FeaturesManifest&) const = default;
};

nlohmann::json to_json(const AudioSource& s);
nlohmann::json to_json(const Recording& r);
nlohmann::json to_json(const SupervisionSegment& s);
nlohmann::json to_json(const FeaturesManifest& f);

AudioSource audio_source_from_json(const nlohmann::json& j);
Recording recording_from_json(const nlohmann::json& j);
SupervisionSegment supervision_from_json(const nlohmann::json& j,
                                         bool allow_negative_start = false);
FeaturesManifest features_from_json(const nlohmann::json& j);

// Monotonic per-process id factory: "<base>-<counter>".
std::string next_id(const std::string& base);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

// ---- JSONL read/write ----

template <class T>
std::size_t write_manifests(const std::vector<T>& items, LineSink& sink) {
  for (const auto& item : items) {
    sink.write_line(dump_canonical(to_json(item)));
  }
  return items.size();
}

template <class T>
std::size_t write_manifests(const std::vector<T>& items,
                            const std::string& path,
                            std::optional<bool> compress = std::nullopt) {
  LineSink sink(path, compress.value_or(path_looks_gzip(path)));
  auto n = write_manifests(items, sink);
  sink.close();
  return n;
}

template <class T>
T manifest_from_json(const nlohmann::json& j);
template <>
Recording manifest_from_json<Recording>(const nlohmann::json& j);
template <>
SupervisionSegment manifest_from_json<SupervisionSegment>(
    const nlohmann::json& j);
template <>
FeaturesManifest manifest_from_json<FeaturesManifest>(const nlohmann::json& j);

// Lazy typed reader over a JSONL(.gz) stream. Parse errors carry the
// 1-based line number.
template <class T>
class ManifestReader {
 public:
  explicit ManifestReader(std::unique_ptr<LineSource> src)
      : src_(std::move(src)) {}
  explicit ManifestReader(const std::string& path)
      : src_(std::make_unique<LineSource>(path)) {}

  std::optional<T> next();

 private:
  std::unique_ptr<LineSource> src_;
};

template <class T>
std::optional<T> ManifestReader<T>::next() {
  for (;;) {
    auto line = src_->next();
    if (!line) return std::nullopt;
    if (line->empty()) continue;
    std::size_t ln = src_->line_number();
    nlohmann::json j = nlohmann::json::parse(*line, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON", ln);
    if (!j.is_object()) throw ParseError("expected a JSON object", ln);
    try {
      return manifest_from_json<T>(j);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), ln);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), ln);
    }
  }
}

template <class T>
std::vector<T> read_all(const std::string& path) {
  ManifestReader<T> reader(path);
  std::vector<T> out;
  while (auto item = reader.next()) out.push_back(std::move(*item));
  return out;
}

// ---- Validation ----

struct ValidationIssue {
  bool is_error = true;
  std::string id;       // offending manifest id (may be empty)
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  std::size_t error_count() const;
  std::size_t warning_count() const;
  bool ok() const { return error_count() == 0; }
  std::string to_string() const;
};

ValidationReport validate(
    const std::vector<Recording>& recordings,
    const std::vector<SupervisionSegment>& supervisions,
    const std::vector<FeaturesManifest>* features = nullptr);

}  // namespace cutkit
