#include "cutkit/manifest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cutkit/errors.hpp"

namespace cutkit {

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::File: return "file";
    case SourceKind::Memory: return "memory";
    case SourceKind::Command: return "command";
  }
  return "file";
}

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "file") return SourceKind::File;
  if (s == "memory") return SourceKind::Memory;
  if (s == "command") return SourceKind::Command;
  throw ParseError("unknown source kind \"" + s + "\"");
}

std::string next_id(const std::string& base) {
  static std::atomic<std::uint64_t> counter{0};
  return base + "-" + std::to_string(counter.fetch_add(1));
}

// ---- base64 ----

namespace {
const char kB64[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::string& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                 static_cast<unsigned char>(bytes[i + 2]);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
    i += 3;
  }
  std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (rem == 2) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  static int table[256];
  static std::once_flag once;
  std::call_once(once, [] {
    std::fill(std::begin(table), std::end(table), -1);
    for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kB64[i])] = i;
  });
  std::string out;
  unsigned acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    int v = table[static_cast<unsigned char>(c)];
    if (v < 0) throw ParseError("invalid base64 character");
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((acc >> bits) & 0xff);
    }
  }
  return out;
}

// ---- JSON mapping ----

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) {
    throw ParseError(std::string("missing field \"") + field + "\"");
  }
  return *it;
}

std::vector<int> int_list(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) {
    throw ParseError(std::string("field \"") + field + "\" must be an array");
  }
  std::vector<int> out;
  for (const auto& v : j) out.push_back(v.get<int>());
  return out;
}

void collect_extras(const nlohmann::json& j,
                    const std::set<std::string>& known, nlohmann::json& extras) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) extras[it.key()] = it.value();
  }
}

void merge_extras(nlohmann::json& j, const nlohmann::json& extras) {
  for (auto it = extras.begin(); it != extras.end(); ++it) {
    if (!j.contains(it.key())) j[it.key()] = it.value();
  }
}

void check_channel_ids(const std::vector<int>& ids, const std::string& ctx) {
  if (ids.empty()) throw ParseError(ctx + ": channel_ids empty");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0) throw ParseError(ctx + ": negative channel id");
    if (i > 0 && ids[i] <= ids[i - 1]) {
      throw ParseError(ctx + ": channel_ids not strictly increasing");
    }
  }
}

}  // namespace

nlohmann::json to_json(const AudioSource& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  j["channel_ids"] = s.channel_ids;
  j["location"] =
      s.kind == SourceKind::Memory ? base64_encode(s.location) : s.location;
  return j;
}

AudioSource audio_source_from_json(const nlohmann::json& j) {
  AudioSource s;
  s.kind = source_kind_from_string(require(j, "kind").get<std::string>());
  s.channel_ids = int_list(require(j, "channel_ids"), "channel_ids");
  s.location = require(j, "location").get<std::string>();
  if (s.kind == SourceKind::Memory) s.location = base64_decode(s.location);
  check_channel_ids(s.channel_ids, "source");
  if (s.kind == SourceKind::File && s.location.empty()) {
    throw ParseError("file source: location empty");
  }
  return s;
}

nlohmann::json to_json(const Recording& r) {
  nlohmann::json j;
  j["id"] = r.id;
  auto sources = nlohmann::json::array();
  for (const auto& s : r.sources) sources.push_back(to_json(s));
  j["sources"] = std::move(sources);
  j["sampling_rate"] = r.sampling_rate;
  j["num_samples"] = r.num_samples;
  j["duration"] = r.duration;
  j["channel_ids"] = r.channel_ids;
  merge_extras(j, r.extras);
  return j;
}

Recording recording_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "id", "sources", "sampling_rate", "num_samples", "duration",
      "channel_ids"};
  Recording r;
  r.id = require(j, "id").get<std::string>();
  r.sampling_rate = require(j, "sampling_rate").get<int>();
  for (const auto& sj : require(j, "sources")) {
    r.sources.push_back(audio_source_from_json(sj));
  }
  r.num_samples = require(j, "num_samples").get<std::int64_t>();
  r.duration = require(j, "duration").get<double>();
  r.channel_ids = int_list(require(j, "channel_ids"), "channel_ids");
  collect_extras(j, known, r.extras);
  if (r.sampling_rate <= 0) {
    throw ParseError("recording " + r.id + ": field \"sampling_rate\" must be positive");
  }
  if (r.num_samples < 0) {
    throw ParseError("recording " + r.id + ": field \"num_samples\" negative");
  }
  double expected = static_cast<double>(r.num_samples) / r.sampling_rate;
  if (std::abs(r.duration - expected) > 1.0 / r.sampling_rate) {
    throw ParseError("recording " + r.id +
                     ": field \"duration\" inconsistent with num_samples");
  }
  return r;
}

nlohmann::json to_json(const SupervisionSegment& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["recording_id"] = s.recording_id;
  j["start"] = s.start;
  j["duration"] = s.duration;
  j["channel"] = s.channel;
  if (s.text) j["text"] = *s.text;
  if (s.speaker) j["speaker"] = *s.speaker;
  if (s.language) j["language"] = *s.language;
  if (s.gender) j["gender"] = *s.gender;
  if (!s.custom.empty()) j["custom"] = s.custom;
  merge_extras(j, s.extras);
  return j;
}

SupervisionSegment supervision_from_json(const nlohmann::json& j,
                                         bool allow_negative_start) {
  static const std::set<std::string> known = {
      "id",   "recording_id", "start",    "duration", "channel",
      "text", "speaker",      "language", "gender",   "custom"};
  SupervisionSegment s;
  s.id = require(j, "id").get<std::string>();
  s.recording_id = require(j, "recording_id").get<std::string>();
  s.start = require(j, "start").get<double>();
  s.duration = require(j, "duration").get<double>();
  s.channel = require(j, "channel").get<int>();
  if (auto it = j.find("text"); it != j.end()) s.text = it->get<std::string>();
  if (auto it = j.find("speaker"); it != j.end()) s.speaker = it->get<std::string>();
  if (auto it = j.find("language"); it != j.end()) s.language = it->get<std::string>();
  if (auto it = j.find("gender"); it != j.end()) s.gender = it->get<std::string>();
  if (auto it = j.find("custom"); it != j.end()) {
    s.custom = it->get<std::map<std::string, std::string>>();
  }
  collect_extras(j, known, s.extras);
  if (s.duration <= 0) {
    throw ParseError("supervision " + s.id + ": field \"duration\" must be > 0");
  }
  if (!allow_negative_start && s.start < -kTimeTolerance) {
    throw ParseError("supervision " + s.id + ": field \"start\" below zero");
  }
  return s;
}

nlohmann::json to_json(const FeaturesManifest& f) {
  nlohmann::json j;
  j["recording_id"] = f.recording_id;
  j["channels"] = f.channels;
  j["start"] = f.start;
  j["duration"] = f.duration;
  j["extractor_type"] = f.extractor_type;
  j["num_frames"] = f.num_frames;
  j["num_features"] = f.num_features;
  j["frame_shift"] = f.frame_shift;
  j["sampling_rate"] = f.sampling_rate;
  j["storage_path"] = f.storage_path;
  j["storage_key"] = f.storage_key;
  merge_extras(j, f.extras);
  return j;
}

FeaturesManifest features_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "recording_id", "channels",     "start",         "duration",
      "extractor_type", "num_frames", "num_features",  "frame_shift",
      "sampling_rate", "storage_path", "storage_key"};
  FeaturesManifest f;
  f.recording_id = require(j, "recording_id").get<std::string>();
  f.channels = int_list(require(j, "channels"), "channels");
  f.start = require(j, "start").get<double>();
  f.duration = require(j, "duration").get<double>();
  f.extractor_type = require(j, "extractor_type").get<std::string>();
  f.num_frames = require(j, "num_frames").get<std::int64_t>();
  f.num_features = require(j, "num_features").get<std::int64_t>();
  f.frame_shift = require(j, "frame_shift").get<double>();
  f.sampling_rate = require(j, "sampling_rate").get<int>();
  f.storage_path = require(j, "storage_path").get<std::string>();
  f.storage_key = require(j, "storage_key").get<std::string>();
  collect_extras(j, known, f.extras);
  if (f.frame_shift <= 0) {
    throw ParseError("features for " + f.recording_id +
                     ": field \"frame_shift\" must be > 0");
  }
  if (f.num_features <= 0) {
    throw ParseError("features for " + f.recording_id +
                     ": field \"num_features\" must be > 0");
  }
  return f;
}

template <>
Recording manifest_from_json<Recording>(const nlohmann::json& j) {
  return recording_from_json(j);
}
template <>
SupervisionSegment manifest_from_json<SupervisionSegment>(
    const nlohmann::json& j) {
  return supervision_from_json(j);
}
template <>
FeaturesManifest manifest_from_json<FeaturesManifest>(const nlohmann::json& j) {
  return features_from_json(j);
}

// ---- Validation ----

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(issues.begin(), issues.end(),
                    [](const ValidationIssue& i) { return i.is_error; }));
}

std::size_t ValidationReport::warning_count() const {
  return issues.size() - error_count();
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& i : issues) {
    os << (i.is_error ? "ERROR" : "WARNING");
    if (!i.id.empty()) os << " [" << i.id << "]";
    os << ": " << i.message << "\n";
  }
  os << error_count() << " errors, " << warning_count() << " warnings\n";
  return os.str();
}

ValidationReport validate(const std::vector<Recording>& recordings,
                          const std::vector<SupervisionSegment>& supervisions,
                          const std::vector<FeaturesManifest>* features) {
  ValidationReport report;
  auto error = [&](const std::string& id, const std::string& msg) {
    report.issues.push_back({true, id, msg});
  };
  auto warning = [&](const std::string& id, const std::string& msg) {
    report.issues.push_back({false, id, msg});
  };

  std::unordered_map<std::string, const Recording*> by_id;
  for (const auto& r : recordings) {
    if (!by_id.emplace(r.id, &r).second) {
      error(r.id, "duplicate recording id");
      continue;
    }
    if (r.sampling_rate <= 0) error(r.id, "sampling_rate must be positive");
    if (r.num_samples < 0) error(r.id, "num_samples negative");
    if (r.sampling_rate > 0) {
      double expected = static_cast<double>(r.num_samples) / r.sampling_rate;
      if (std::abs(r.duration - expected) > 1.0 / r.sampling_rate) {
        error(r.id, "duration inconsistent with num_samples / sampling_rate");
      }
    }
    std::set<int> seen;
    for (const auto& s : r.sources) {
      if (s.channel_ids.empty()) error(r.id, "source with empty channel_ids");
      for (int c : s.channel_ids) {
        if (!seen.insert(c).second) {
          error(r.id, "channel " + std::to_string(c) +
                          " appears in multiple sources");
        }
      }
      if (s.kind == SourceKind::File && s.location.empty()) {
        error(r.id, "file source with empty location");
      }
    }
    int expect = 0;
    bool contiguous = true;
    for (int c : seen) {
      if (c != expect++) contiguous = false;
    }
    if (!contiguous) warning(r.id, "channel_ids not contiguous from 0");
  }

  std::unordered_set<std::string> sup_ids;
  for (const auto& s : supervisions) {
    if (!sup_ids.insert(s.id).second) error(s.id, "duplicate supervision id");
    if (s.duration <= 0) error(s.id, "duration must be > 0");
    auto it = by_id.find(s.recording_id);
    if (it == by_id.end()) {
      error(s.id, "dangling recording_id \"" + s.recording_id + "\"");
      continue;
    }
    const Recording& r = *it->second;
    double over = s.start + s.duration - r.duration;
    if (over > kTimeTolerance) {
      std::ostringstream os;
      os << "exceeds recording end by " << over << " s > tolerance";
      error(s.id, os.str());
    }
    if (s.start < -kTimeTolerance) error(s.id, "negative start");
    if (std::find(r.channel_ids.begin(), r.channel_ids.end(), s.channel) ==
        r.channel_ids.end()) {
      error(s.id, "channel " + std::to_string(s.channel) +
                      " not in recording channels");
    }
  }

  if (features) {
    for (const auto& f : *features) {
      auto it = by_id.find(f.recording_id);
      if (it == by_id.end()) {
        error(f.recording_id, "features reference unknown recording");
        continue;
      }
      if (f.frame_shift <= 0) {
        error(f.recording_id, "frame_shift must be > 0");
        continue;
      }
      if (f.num_features <= 0) error(f.recording_id, "num_features must be > 0");
      double approx = f.duration / f.frame_shift;
      if (std::abs(static_cast<double>(f.num_frames) - approx) > 2.0) {
        warning(f.recording_id,
                "num_frames far from duration / frame_shift estimate");
      }
    }
  }

  return report;
}

}  // namespace cutkit
