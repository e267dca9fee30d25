#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cutkit/cut.hpp"

namespace cutkit {

// L = round(frame_length * rate), S = round(frame_shift * rate);
// 0 when num_samples < L, else floor((num_samples - L) / S) + 1.
std::int64_t frame_count(std::int64_t num_samples, double frame_length,
                         double frame_shift, int sampling_rate);

struct FeatureMatrix {
  std::size_t num_frames = 0;
  std::size_t num_bins = 0;
  double frame_shift = 0.0;
  double frame_length = 0.0;
  std::vector<float> data;  // frames x bins, row-major

  float at(std::size_t frame, std::size_t bin) const {
    return data[frame * num_bins + bin];
  }
  bool operator==(const FeatureMatrix&) const = default;
};

// Single-container chunked store: magic "FSTR1", little-endian payloads,
// trailing key index with a pointer patched into the header at close.
// One writer (lock file) or many readers per store file.
class FeatureStore {
 public:
  static FeatureStore create(const std::string& path);  // writer
  static FeatureStore open(const std::string& path);    // reader
  ~FeatureStore();
  FeatureStore(FeatureStore&&) noexcept;
  FeatureStore& operator=(FeatureStore&&) noexcept;
  FeatureStore(const FeatureStore&) = delete;
  FeatureStore& operator=(const FeatureStore&) = delete;

  std::string write(const FeatureMatrix& matrix);  // returns the storage key
  FeatureMatrix read(const std::string& key) const;
  std::vector<std::string> keys() const;
  const std::string& path() const;
  void close();  // writer: flush index and release the lock

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  FeatureStore();
};

// Reference extractor: per-frame log mean squared amplitude with a
// 1e-10 energy floor; one bin.
FeatureMatrix compute_logenergy(const SampleBlock& block, double frame_length,
                                double frame_shift);

std::pair<FeaturesManifest, std::string> extract_logenergy(
    const Cut& cut, double frame_length, double frame_shift,
    FeatureStore& store);

struct CollatedBatch {
  std::size_t batch_size = 0;
  std::size_t max_len = 0;   // samples (audio) or frames (features)
  std::size_t num_bins = 0;  // 0 for audio
  std::vector<float> data;   // batch x max_len (x bins)
  std::vector<std::size_t> lengths;
  float filler = 0.0f;

  struct SupervisionRow {
    std::size_t item_index = 0;
    std::int64_t start_unit = 0;
    std::int64_t duration_unit = 0;
    std::optional<std::string> text;
    std::optional<std::string> speaker;
  };
  std::vector<SupervisionRow> supervision_table;

  const float* row(std::size_t i) const {
    return data.data() + i * max_len * std::max<std::size_t>(num_bins, 1);
  }
};

// Loads and zero-pads each cut's audio; supervision units are samples.
CollatedBatch collate_audio(const std::vector<Cut>& batch);

struct CollateFeaturesOptions {
  bool on_the_fly = false;  // extract when a cut has no features manifest
  double frame_length = 0.025;
  double frame_shift = 0.01;
};

// Reads matrices from the store, pads frames with the padding filler;
// supervision units are frames.
CollatedBatch collate_features(const std::vector<Cut>& batch,
                               const CollateFeaturesOptions& options = {});

}  // namespace cutkit
