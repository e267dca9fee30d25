#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cutkit/cutset.hpp"

namespace cutkit {

struct SamplerConstraints {
  std::optional<double> max_duration;   // cap on sum of cut durations
  std::optional<std::size_t> max_cuts;  // cap on batch size
  bool drop_last = false;
  std::optional<std::uint64_t> shuffle_seed;
  std::size_t world_size = 1;
  std::size_t rank = 0;

  void check() const;  // throws ArgumentError when invalid
};

struct Batch {
  std::vector<Cut> cuts;
  std::size_t index = 0;      // global batch number, before rank sharding
  bool oversized = false;     // single cut above max_duration

  double total_duration() const;
  std::vector<std::string> cut_ids() const;
};

class BatchStream {
 public:
  virtual ~BatchStream() = default;
  virtual std::optional<Batch> next() = 0;

  std::vector<Batch> collect() {
    std::vector<Batch> out;
    while (auto b = next()) out.push_back(std::move(*b));
    return out;
  }
};

struct BucketSpec {
  std::size_t num_buckets = 1;
  std::vector<double> boundaries;  // ascending, num_buckets - 1 quantiles

  std::size_t bucket_of(double duration) const;
};

// Greedy duration/count-constrained batching in stream order. A single
// cut above max_duration becomes an oversized singleton batch. With
// world_size > 1 only batches with index == rank (mod world_size) are
// yielded.
std::unique_ptr<BatchStream> dynamic_sample(const CutSet& cuts,
                                            const SamplerConstraints& c);

// Nearest-rank duration quantiles from the first min(n, 10000) cuts.
BucketSpec estimate_buckets(const CutSet& cuts, std::size_t num_buckets);

std::unique_ptr<BatchStream> bucketing_sample(const CutSet& cuts,
                                              const BucketSpec& spec,
                                              const SamplerConstraints& c);

// Step i concatenates batch i of every child; stops at the shortest.
std::unique_ptr<BatchStream> zip_sample(
    std::vector<std::unique_ptr<BatchStream>> children);

struct BatchPair {
  Batch source;
  Batch target;
};

class BatchPairStream {
 public:
  virtual ~BatchPairStream() = default;
  virtual std::optional<BatchPair> next() = 0;
};

// Samples the source set; each batch is paired with the target cuts of
// identical ids in identical order. Constraints bind on source only.
std::unique_ptr<BatchPairStream> pairs_sample(const CutSet& source,
                                              const CutSet& target,
                                              const SamplerConstraints& c);

// Sum over batches of (batch max duration - cut duration); the quantity
// bucketing is meant to reduce.
double padding_waste(const std::vector<Batch>& batches);

}  // namespace cutkit
