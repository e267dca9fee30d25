#include "cutkit/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cutkit/audio.hpp"
#include "cutkit/errors.hpp"

namespace cutkit {

namespace {

// splitmix64; all draws below go through it so the corpus is
// byte-identical across platforms for one seed.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive lo..hi
    return lo + static_cast<std::int64_t>(next() %
                                          static_cast<std::uint64_t>(hi - lo + 1));
  }
};

}  // namespace

SynthResult generate_synthetic_corpus(const SynthSpec& spec) {
  namespace fs = std::filesystem;
  if (spec.out_dir.empty()) throw ArgumentError("out_dir required");
  if (spec.max_duration < spec.min_duration || spec.min_duration <= 0) {
    throw ArgumentError("bad duration range");
  }
  fs::create_directories(fs::path(spec.out_dir) / "audio");

  Rng rng(spec.seed);
  SynthResult result;
  double speech_total = 0.0;
  auto durations = nlohmann::json::array();
  std::size_t num_supervisions = 0;

  for (std::size_t i = 0; i < spec.num_recordings; ++i) {
    int rate = spec.sampling_rate;
    auto min_ns = static_cast<std::int64_t>(spec.min_duration * rate);
    auto max_ns = static_cast<std::int64_t>(spec.max_duration * rate);
    std::int64_t ns = rng.range(min_ns, max_ns);
    double duration = static_cast<double>(ns) / rate;

    // Tone plus low-level noise; frequency varies per recording.
    double freq = 80.0 + rng.uniform() * 900.0;
    double amp = 0.2 + rng.uniform() * 0.5;
    SampleBlock block = SampleBlock::zeros(rate, 1, static_cast<std::size_t>(ns));
    float* samples = block.channel(0);
    for (std::int64_t t = 0; t < ns; ++t) {
      double tone = amp * std::sin(2.0 * M_PI * freq * t / rate);
      double noise = (rng.uniform() - 0.5) * 0.02;
      samples[t] = static_cast<float>(tone + noise);
    }

    std::string rec_id = "synth-rec-" + std::to_string(i);
    std::string wav_path =
        (fs::path(spec.out_dir) / "audio" / (rec_id + ".wav")).string();
    write_wav(block, wav_path);

    Recording rec;
    rec.id = rec_id;
    rec.sources.push_back(AudioSource{SourceKind::File, {0}, wav_path});
    rec.sampling_rate = rate;
    rec.num_samples = ns;
    rec.duration = duration;
    rec.channel_ids = {0};
    result.recordings.push_back(rec);
    durations.push_back(duration);

    // 1..3 non-overlapping supervisions.
    auto n_sups = static_cast<std::size_t>(rng.range(1, 3));
    double cursor = 0.0;
    for (std::size_t k = 0; k < n_sups; ++k) {
      double remaining = duration - cursor;
      if (remaining < 0.3) break;
      double sup_start =
          cursor + rng.uniform() * std::min(0.5, remaining - 0.3);
      double max_len = duration - sup_start;
      double sup_dur = 0.2 + rng.uniform() * (max_len - 0.2);
      sup_dur = std::min(sup_dur, max_len);
      // Snap to samples so arithmetic stays exact downstream.
      sup_start = std::floor(sup_start * rate) / rate;
      sup_dur = std::floor(sup_dur * rate) / rate;
      if (sup_dur <= 0) break;

      SupervisionSegment sup;
      sup.id = rec_id + "-sup-" + std::to_string(k);
      sup.recording_id = rec_id;
      sup.start = sup_start;
      sup.duration = sup_dur;
      sup.channel = 0;
      sup.speaker =
          "spk-" + std::to_string(rng.range(0, spec.num_speakers - 1));
      sup.text = "synthetic utterance " + std::to_string(num_supervisions);
      result.supervisions.push_back(sup);
      speech_total += sup_dur;
      ++num_supervisions;
      cursor = sup_start + sup_dur + 0.05;
    }
  }

  std::string ext = spec.compress ? ".jsonl.gz" : ".jsonl";
  result.recordings_path =
      (fs::path(spec.out_dir) / ("recordings" + ext)).string();
  result.supervisions_path =
      (fs::path(spec.out_dir) / ("supervisions" + ext)).string();
  write_manifests(result.recordings, result.recordings_path, spec.compress);
  write_manifests(result.supervisions, result.supervisions_path,
                  spec.compress);

  double total = 0.0;
  for (const auto& r : result.recordings) total += r.duration;
  nlohmann::json gt;
  gt["num_recordings"] = result.recordings.size();
  gt["num_supervisions"] = result.supervisions.size();
  gt["total_duration"] = total;
  gt["speech_duration"] = speech_total;
  gt["durations"] = durations;
  gt["seed"] = spec.seed;
  result.ground_truth = gt;

  std::ofstream gtf(fs::path(spec.out_dir) / "ground_truth.json");
  gtf << dump_canonical(gt) << "\n";

  return result;
}

}  // namespace cutkit
