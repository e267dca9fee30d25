#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cutkit/audio.hpp"
#include "cutkit/cut.hpp"
#include "cutkit/manifest.hpp"

namespace cutkit::test {

// splitmix64; matches the library's internal generators in quality, not
// in sequence (tests only need determinism).
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline SampleBlock make_sine(int rate, std::size_t frames, double freq,
                             double amplitude = 0.5, std::size_t channels = 1) {
  SampleBlock b = SampleBlock::zeros(rate, channels, frames);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    for (std::size_t i = 0; i < frames; ++i) {
      b.channel(ch)[i] = static_cast<float>(
          amplitude * std::sin(2.0 * M_PI * freq * (static_cast<double>(i) /
                                                    rate) +
                               0.3 * static_cast<double>(ch)));
    }
  }
  return b;
}

inline SampleBlock make_noise(int rate, std::size_t frames,
                              std::uint64_t seed, double amplitude = 0.4) {
  SampleBlock b = SampleBlock::zeros(rate, 1, frames);
  Rng rng(seed);
  for (std::size_t i = 0; i < frames; ++i) {
    b.channel(0)[i] =
        static_cast<float>(amplitude * (2.0 * rng.uniform() - 1.0));
  }
  return b;
}

// Writes a WAV to disk and returns a consistent one-source Recording.
inline Recording make_recording(const std::filesystem::path& dir,
                                const std::string& id,
                                const SampleBlock& block) {
  std::string path = (dir / (id + ".wav")).string();
  write_wav(block, path);
  Recording rec;
  rec.id = id;
  AudioSource source;
  source.kind = SourceKind::File;
  source.location = path;
  for (std::size_t c = 0; c < block.num_channels; ++c) {
    source.channel_ids.push_back(static_cast<int>(c));
    rec.channel_ids.push_back(static_cast<int>(c));
  }
  rec.sources.push_back(std::move(source));
  rec.sampling_rate = block.sampling_rate;
  rec.num_samples = static_cast<std::int64_t>(block.num_frames);
  rec.duration =
      static_cast<double>(block.num_frames) / block.sampling_rate;
  return rec;
}

// In-memory Recording: the WAV bytes live inside the manifest.
inline Recording make_memory_recording(const std::string& id,
                                       const SampleBlock& block) {
  Recording rec;
  rec.id = id;
  AudioSource source;
  source.kind = SourceKind::Memory;
  source.location = write_wav_bytes(block);
  for (std::size_t c = 0; c < block.num_channels; ++c) {
    source.channel_ids.push_back(static_cast<int>(c));
    rec.channel_ids.push_back(static_cast<int>(c));
  }
  rec.sources.push_back(std::move(source));
  rec.sampling_rate = block.sampling_rate;
  rec.num_samples = static_cast<std::int64_t>(block.num_frames);
  rec.duration =
      static_cast<double>(block.num_frames) / block.sampling_rate;
  return rec;
}

inline Cut make_mono_cut(const Recording& rec, const std::string& id) {
  MonoCut c;
  c.id = id;
  c.recording = rec;
  c.channel = 0;
  c.rec_start_frame = 0;
  c.rec_num_frames = rec.num_samples;
  return c;
}

inline double max_abs_diff(const std::vector<float>& a,
                           const std::vector<float>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  }
  return m;
}

}  // namespace cutkit::test
