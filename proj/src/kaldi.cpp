#include "cutkit/kaldi.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cutkit/audio.hpp"
#include "cutkit/errors.hpp"

namespace cutkit {

namespace {

namespace fs = std::filesystem;

// First token is the key; the rest of the line (trimmed) is the value.
// Any whitespace separates on import.
std::map<std::string, std::string> read_kaldi_table(const fs::path& path,
                                                    bool required) {
  std::map<std::string, std::string> out;
  std::ifstream in(path);
  if (!in) {
    if (required) throw IoError(path.filename().string() + " not found");
    return out;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;  // blank line
    std::string rest;
    std::getline(ss, rest);
    auto first = rest.find_first_not_of(" \t\r");
    rest = first == std::string::npos ? "" : rest.substr(first);
    auto last = rest.find_last_not_of(" \t\r");
    if (last != std::string::npos) rest = rest.substr(0, last + 1);
    if (!out.emplace(key, rest).second) {
      throw ParseError(path.filename().string() + ": duplicate key \"" + key +
                           "\"",
                       line_no);
    }
  }
  return out;
}

std::string format_time(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", seconds);
  return buf;
}

void write_sorted(const fs::path& path,
                  const std::map<std::string, std::string>& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [key, value] : table) {
    out << key;
    if (!value.empty()) out << " " << value;
    out << "\n";
  }
}

}  // namespace

KaldiImportResult import_kaldi(const std::string& dir_path) {
  fs::path dir(dir_path);
  auto wav_scp = read_kaldi_table(dir / "wav.scp", true);
  auto text = read_kaldi_table(dir / "text", false);
  auto utt2spk = read_kaldi_table(dir / "utt2spk", false);
  auto reco2dur = read_kaldi_table(dir / "reco2dur", false);
  auto channels = read_kaldi_table(dir / "channels", false);

  KaldiImportResult result;
  for (const auto& [reco_id, value] : wav_scp) {
    Recording rec;
    rec.id = reco_id;
    AudioSource source;
    if (!value.empty() && value.back() == '|') {
      source.kind = SourceKind::Command;
      source.location = value;
      source.channel_ids = {0};
      rec.channel_ids = {0};
      rec.sampling_rate = 16000;  // conventional placeholder for pipes
      if (auto it = reco2dur.find(reco_id); it != reco2dur.end()) {
        rec.duration = std::stod(it->second);
        rec.num_samples = std::llround(rec.duration * rec.sampling_rate);
      }
    } else {
      source.kind = SourceKind::File;
      source.location = value;
      WavHeaderInfo info = read_wav_header(source);
      rec.sampling_rate = info.sampling_rate;
      for (int c = 0; c < info.num_channels; ++c) {
        source.channel_ids.push_back(c);
        rec.channel_ids.push_back(c);
      }
      if (auto it = reco2dur.find(reco_id); it != reco2dur.end()) {
        rec.duration = std::stod(it->second);
        rec.num_samples = std::llround(rec.duration * rec.sampling_rate);
      } else {
        rec.num_samples = info.num_frames;
        rec.duration =
            static_cast<double>(info.num_frames) / info.sampling_rate;
      }
    }
    rec.sources.push_back(std::move(source));
    result.recordings.push_back(std::move(rec));
  }

  fs::path segments_path = dir / "segments";
  if (fs::exists(segments_path)) {
    std::ifstream in(segments_path);
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ss(line);
      std::string utt_id, reco_id;
      double start, end;
      if (!(ss >> utt_id)) continue;
      if (!(ss >> reco_id >> start >> end)) {
        throw ParseError("segments: malformed line", line_no);
      }
      if (!seen.insert(utt_id).second) {
        throw ParseError("segments: duplicate key \"" + utt_id + "\"", line_no);
      }
      if (end <= start) {
        throw ParseError("segments: end <= start for \"" + utt_id + "\"",
                         line_no);
      }
      if (!wav_scp.count(reco_id)) {
        throw ParseError("segments: dangling reco_id \"" + reco_id + "\"",
                         line_no);
      }
      SupervisionSegment sup;
      sup.id = utt_id;
      sup.recording_id = reco_id;
      sup.start = start;
      sup.duration = end - start;
      sup.channel = 0;
      if (auto it = channels.find(utt_id); it != channels.end()) {
        sup.channel = std::stoi(it->second);
      }
      if (auto it = text.find(utt_id); it != text.end()) sup.text = it->second;
      if (auto it = utt2spk.find(utt_id); it != utt2spk.end()) {
        sup.speaker = it->second;
      }
      result.supervisions.push_back(std::move(sup));
    }
  } else {
    // One whole-recording supervision per wav.scp entry.
    for (const auto& rec : result.recordings) {
      if (rec.duration <= 0) continue;  // pipe entry with unknown duration
      SupervisionSegment sup;
      sup.id = rec.id;
      sup.recording_id = rec.id;
      sup.start = 0.0;
      sup.duration = rec.duration;
      sup.channel = 0;
      if (auto it = text.find(rec.id); it != text.end()) sup.text = it->second;
      if (auto it = utt2spk.find(rec.id); it != utt2spk.end()) {
        sup.speaker = it->second;
      }
      result.supervisions.push_back(std::move(sup));
    }
  }
  return result;
}

void export_kaldi(const std::vector<Recording>& recordings,
                  const std::vector<SupervisionSegment>& supervisions,
                  const std::string& out_dir) {
  fs::path dir(out_dir);
  fs::create_directories(dir);

  std::map<std::string, const Recording*> by_id;
  std::map<std::string, std::string> wav_scp, reco2dur;
  for (const auto& rec : recordings) {
    if (rec.sources.empty() || rec.sources.front().kind != SourceKind::File) {
      throw ExportError("recording \"" + rec.id +
                        "\" has no file source; cannot export");
    }
    by_id[rec.id] = &rec;
    wav_scp[rec.id] = rec.sources.front().location;
    reco2dur[rec.id] = format_time(rec.duration);
  }

  std::map<std::string, std::string> segments, text, utt2spk, utt2dur,
      channels;
  std::map<std::string, std::set<std::string>> spk2utt;
  bool any_nonzero_channel = false;
  for (const auto& sup : supervisions) {
    auto it = by_id.find(sup.recording_id);
    if (it == by_id.end()) {
      throw ExportError("supervision \"" + sup.id +
                        "\" references unknown recording \"" +
                        sup.recording_id + "\"");
    }
    // Quantize the endpoints first so that export(import(...)) is
    // byte-stable: utt2dur is derived from the quantized endpoints.
    double start_q = std::round(sup.start * 100.0) / 100.0;
    double end_q = std::round((sup.start + sup.duration) * 100.0) / 100.0;
    segments[sup.id] = sup.recording_id + " " + format_time(start_q) + " " +
                       format_time(end_q);
    if (sup.text) text[sup.id] = *sup.text;
    std::string speaker = sup.speaker.value_or(sup.id);
    utt2spk[sup.id] = speaker;
    spk2utt[speaker].insert(sup.id);
    utt2dur[sup.id] = format_time(end_q - start_q);
    channels[sup.id] = std::to_string(sup.channel);
    if (sup.channel != 0) any_nonzero_channel = true;
  }

  write_sorted(dir / "wav.scp", wav_scp);
  write_sorted(dir / "reco2dur", reco2dur);
  write_sorted(dir / "segments", segments);
  write_sorted(dir / "text", text);
  write_sorted(dir / "utt2spk", utt2spk);
  write_sorted(dir / "utt2dur", utt2dur);
  if (any_nonzero_channel) write_sorted(dir / "channels", channels);

  std::map<std::string, std::string> spk2utt_lines;
  for (const auto& [spk, utts] : spk2utt) {
    std::string joined;
    for (const auto& u : utts) {
      if (!joined.empty()) joined += " ";
      joined += u;
    }
    spk2utt_lines[spk] = joined;
  }
  write_sorted(dir / "spk2utt", spk2utt_lines);
}

}  // namespace cutkit
