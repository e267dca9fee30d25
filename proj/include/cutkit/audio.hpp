#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cutkit/manifest.hpp"

namespace cutkit {

// Channel-major block of float samples in [-1, 1].
struct SampleBlock {
  int sampling_rate = 0;
  std::size_t num_channels = 0;
  std::size_t num_frames = 0;
  std::vector<float> data;  // data[ch * num_frames + i]

  static SampleBlock zeros(int rate, std::size_t channels, std::size_t frames) {
    SampleBlock b;
    b.sampling_rate = rate;
    b.num_channels = channels;
    b.num_frames = frames;
    b.data.assign(channels * frames, 0.0f);
    return b;
  }

  float* channel(std::size_t ch) { return data.data() + ch * num_frames; }
  const float* channel(std::size_t ch) const {
    return data.data() + ch * num_frames;
  }
  float at(std::size_t ch, std::size_t i) const {
    return data[ch * num_frames + i];
  }
};

enum class SampleFormat { PcmInt16, IeeeFloat32 };

struct WavHeaderInfo {
  int sampling_rate = 0;
  int num_channels = 0;
  int bits_per_sample = 0;
  SampleFormat sample_format = SampleFormat::PcmInt16;
  std::int64_t num_frames = 0;
};

// Counter of audio data bytes actually read; backs the laziness checks.
std::uint64_t audio_bytes_read();
void reset_audio_bytes_read();

WavHeaderInfo read_wav_header(const AudioSource& source);

// Reads [offset, offset + duration) seconds, seeking to the needed byte
// range. Requests running at most kTimeTolerance past the end are
// clipped to the end.
SampleBlock read_wav(const AudioSource& source, double offset = 0.0,
                     std::optional<double> duration = std::nullopt,
                     const std::optional<std::vector<int>>& channels =
                         std::nullopt);

// Frame-exact variant used by cut materialization.
SampleBlock read_wav_frames(const AudioSource& source, std::int64_t begin_frame,
                            std::int64_t num_frames,
                            const std::optional<std::vector<int>>& channels =
                                std::nullopt);

std::uint64_t write_wav(const SampleBlock& block, const std::string& path);
std::string write_wav_bytes(const SampleBlock& block);

// Sum `added` into `reference` at `offset` seconds. With snr_db set,
// `added` is scaled by sqrt(E_ref / (E_add * 10^(snr/10))) where E is
// mean squared amplitude. No clipping is applied.
SampleBlock mix_samples(const SampleBlock& reference, const SampleBlock& added,
                        double offset,
                        std::optional<double> snr_db = std::nullopt);

// Linear-interpolation resampler; returns the input unchanged when the
// rate already matches.
SampleBlock resample_samples(const SampleBlock& block, int target_rate);

// Linear time stretch to an exact frame count (rate label unchanged
// unless overridden).
SampleBlock stretch_to_length(const SampleBlock& block, std::size_t n_out,
                              int out_rate = 0);

}  // namespace cutkit
