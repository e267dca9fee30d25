#pragma once

#include <string>
#include <vector>

#include "cutkit/manifest.hpp"

namespace cutkit {

struct KaldiImportResult {
  std::vector<Recording> recordings;
  std::vector<SupervisionSegment> supervisions;
};

// Reads wav.scp (+ optional segments, text, utt2spk, reco2dur) from a
// Kaldi data directory. wav.scp values ending in "|" become Command
// sources: metadata-valid but not loadable.
KaldiImportResult import_kaldi(const std::string& dir_path);

// Writes wav.scp, segments, text, utt2spk, spk2utt, reco2dur, utt2dur
// (and a non-standard "channels" sidecar when any supervision sits on a
// channel other than 0). Keys bytewise sorted; times with 2 decimals.
void export_kaldi(const std::vector<Recording>& recordings,
                  const std::vector<SupervisionSegment>& supervisions,
                  const std::string& out_dir);

}  // namespace cutkit
