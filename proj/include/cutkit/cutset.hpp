#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cutkit/cut.hpp"

namespace cutkit {

// Single-consumer pull stream of cuts.
class CutStream {
 public:
  virtual ~CutStream() = default;
  virtual std::optional<Cut> next() = 0;
};

using CutStreamFactory = std::function<std::unique_ptr<CutStream>()>;

struct CutSetStats {
  std::size_t num_cuts = 0;
  double total_duration = 0.0;
  double speech_duration = 0.0;  // sum of supervision durations, raw
  std::size_t num_speakers = 0;
  // (bin upper bound in seconds, count), 1 s bins.
  std::vector<std::pair<double, std::size_t>> duration_histogram;
  // Some cut's supervisions overlap (speech may exceed its duration).
  bool speech_overlap = false;
  std::vector<std::pair<std::string, double>> per_speaker;  // verbose only

  std::string to_string() const;
};

// Ordered collection of cuts: eager (in-memory) or lazy (replayable
// stream). Lazy sets support multiple independent iterations but no
// random element access.
class CutSet {
 public:
  CutSet();  // empty eager set

  static CutSet from_cuts(std::vector<Cut> cuts);
  static CutSet from_file(const std::string& path);  // lazy cuts.jsonl[.gz]
  static CutSet from_factory(CutStreamFactory factory);
  static CutSet from_manifests(
      const std::vector<Recording>& recordings,
      const std::vector<SupervisionSegment>& supervisions);

  bool is_lazy() const;
  std::unique_ptr<CutStream> stream() const;
  std::vector<Cut> to_vector() const;
  CutSet materialize() const;  // eager copy
  std::size_t size() const;    // O(n) on lazy sets
  const Cut& at(std::size_t i) const;  // eager only

  CutSet trim_to_supervisions() const;
  CutSet cut_into_windows(double window, double hop,
                          bool keep_overlapping = true) const;
  CutSet filter(std::function<bool(const Cut&)> pred) const;
  CutSet subset_first(std::size_t n) const;
  CutSet subset_last(std::size_t n) const;
  CutSet subset_ids(const std::vector<std::string>& ids) const;
  std::vector<CutSet> split(
      std::size_t num_parts,
      std::optional<std::uint64_t> shuffle_seed = std::nullopt) const;
  CutSet repeat(std::optional<std::size_t> times) const;
  static CutSet combine(std::vector<CutSet> sets);
  CutSet shuffle(std::uint64_t seed) const;  // eager Fisher-Yates
  CutSet lazy_shuffle(std::size_t buffer_size, std::uint64_t seed) const;
  static CutSet mux(std::vector<CutSet> sets, std::vector<double> weights,
                    std::uint64_t seed);

  CutSetStats describe(bool per_speaker = false) const;

  std::size_t to_file(const std::string& path,
                      std::optional<bool> compress = std::nullopt) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace cutkit
