#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cutkit/audio.hpp"
#include "cutkit/manifest.hpp"

namespace cutkit {

// A deferred operation on a mono cut's sample stream, applied at
// materialization in list order.
struct Transform {
  enum class Kind { Speed, Tempo, Volume, Resample, Window };
  Kind kind = Kind::Speed;
  double factor = 1.0;             // Speed/Tempo/Volume
  int target_rate = 0;             // Resample
  std::int64_t offset_frames = 0;  // Window
  std::int64_t num_frames = 0;     // Window

  bool operator==(const Transform&) const = default;
};

struct MonoCut {
  std::string id;
  Recording recording;
  int channel = 0;
  // Base window in the recording's sample domain.
  std::int64_t rec_start_frame = 0;
  std::int64_t rec_num_frames = 0;
  std::vector<Transform> transforms;
  // Relative to the cut's current (post-transform) timeline; may extend
  // past either edge.
  std::vector<SupervisionSegment> supervisions;
  std::optional<FeaturesManifest> features;

  bool operator==(const MonoCut&) const = default;
};

struct PaddingCut {
  std::string id;
  int sampling_rate = 0;
  std::int64_t num_samples = 0;
  double feat_value = -23.025851;  // log-domain silence filler

  double duration() const {
    return static_cast<double>(num_samples) / sampling_rate;
  }
  bool operator==(const PaddingCut&) const = default;
};

struct MixTrack;
struct MixedCut;

enum class PadDirection { Right, Left, Both };

std::size_t live_cut_count();

// Value handle over an immutable cut; copies share storage.
class Cut {
 public:
  Cut() = default;
  Cut(MonoCut c);     // NOLINT(google-explicit-constructor)
  Cut(PaddingCut c);  // NOLINT(google-explicit-constructor)
  Cut(MixedCut c);    // NOLINT(google-explicit-constructor)

  bool valid() const { return data_ != nullptr; }

  const std::string& id() const;
  int sampling_rate() const;
  std::int64_t num_samples() const;
  double duration() const;

  bool is_mono() const;
  bool is_padding() const;
  bool is_mixed() const;
  const MonoCut* as_mono() const;
  const PaddingCut* as_padding() const;
  const MixedCut* as_mixed() const;

  // Supervisions expressed relative to this cut (mixed: union of track
  // supervisions shifted by track offsets).
  std::vector<SupervisionSegment> supervisions() const;

  Cut truncate(double offset, double duration, bool keep_overlapping) const;
  Cut pad(double target_duration,
          PadDirection direction = PadDirection::Right) const;
  Cut mix(const Cut& other, double offset = 0.0,
          std::optional<double> snr_db = std::nullopt) const;
  Cut append(const Cut& other, double gap = 0.0) const;
  Cut perturb_speed(double factor) const;
  Cut perturb_tempo(double factor) const;
  Cut perturb_volume(double factor) const;
  Cut resample(int target_rate) const;

  SampleBlock load_audio() const;

  nlohmann::json to_json() const;

  struct CutData;

 private:
  std::shared_ptr<const CutData> data_;
};

struct MixTrack {
  Cut cut;
  double offset = 0.0;
  std::optional<double> snr_db;  // absent on the first track
};

struct MixedCut {
  std::string id;
  std::vector<MixTrack> tracks;  // >= 2
};

Cut cut_from_json(const nlohmann::json& j);

// One MonoCut per (recording, channel) covering the whole recording.
std::vector<Cut> cuts_from_recording(
    const Recording& recording,
    const std::vector<SupervisionSegment>& supervisions);

}  // namespace cutkit
