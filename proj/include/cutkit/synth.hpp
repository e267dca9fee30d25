#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cutkit/manifest.hpp"

namespace cutkit {

// Deterministic stand-in for real corpus preparation: writes WAV files,
// consistent manifests, and a ground_truth.json sidecar with the exact
// totals used by test oracles.
struct SynthSpec {
  std::size_t num_recordings = 10;
  double min_duration = 2.0;
  double max_duration = 10.0;
  int num_speakers = 4;
  int sampling_rate = 16000;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool compress = true;
};

struct SynthResult {
  std::vector<Recording> recordings;
  std::vector<SupervisionSegment> supervisions;
  nlohmann::json ground_truth;
  std::string recordings_path;
  std::string supervisions_path;
};

SynthResult generate_synthetic_corpus(const SynthSpec& spec);

}  // namespace cutkit
