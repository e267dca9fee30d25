#include "cutkit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "cutkit/errors.hpp"

namespace cutkit {

void SamplerConstraints::check() const {
  if (!max_duration && !max_cuts) {
    throw ArgumentError("at least one of max_duration/max_cuts must be set");
  }
  if (max_duration && *max_duration <= 0) {
    throw ArgumentError("max_duration must be positive");
  }
  if (max_cuts && *max_cuts == 0) {
    throw ArgumentError("max_cuts must be positive");
  }
  if (world_size == 0) throw ArgumentError("world_size must be >= 1");
  if (rank >= world_size) throw ArgumentError("rank must be < world_size");
}

double Batch::total_duration() const {
  double total = 0.0;
  for (const auto& c : cuts) total += c.duration();
  return total;
}

std::vector<std::string> Batch::cut_ids() const {
  std::vector<std::string> ids;
  ids.reserve(cuts.size());
  for (const auto& c : cuts) ids.push_back(c.id());
  return ids;
}

std::size_t BucketSpec::bucket_of(double duration) const {
  auto it = std::lower_bound(boundaries.begin(), boundaries.end(), duration);
  return static_cast<std::size_t>(it - boundaries.begin());
}

namespace {

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

class DynamicSampler : public BatchStream {
 public:
  DynamicSampler(std::unique_ptr<CutStream> in, SamplerConstraints c)
      : in_(std::move(in)), c_(c) {}

  std::optional<Batch> next() override {
    while (!done_) {
      auto batch = fill_next_batch();
      if (!batch) break;
      std::size_t idx = next_index_++;
      if (idx % c_.world_size != c_.rank) continue;
      batch->index = idx;
      return batch;
    }
    return std::nullopt;
  }

 private:
  // Returns the next batch in global order, or nullopt at end.
  std::optional<Batch> fill_next_batch() {
    Batch batch;
    double batch_duration = 0.0;
    for (;;) {
      if (!carry_) {
        auto cut = in_->next();
        if (!cut) {
          done_ = true;
          if (batch.cuts.empty() || c_.drop_last) return std::nullopt;
          return batch;  // final partial batch
        }
        carry_ = std::move(cut);
      }
      double d = carry_->duration();
      if (batch.cuts.empty() && c_.max_duration && d > *c_.max_duration) {
        batch.cuts.push_back(std::move(*carry_));
        carry_.reset();
        batch.oversized = true;
        return batch;
      }
      bool fits = true;
      if (c_.max_duration && batch_duration + d > *c_.max_duration) fits = false;
      if (c_.max_cuts && batch.cuts.size() + 1 > *c_.max_cuts) fits = false;
      if (!fits) {
        return batch;  // carry_ opens the next batch
      }
      batch.cuts.push_back(std::move(*carry_));
      carry_.reset();
      batch_duration += d;
    }
  }

  std::unique_ptr<CutStream> in_;
  SamplerConstraints c_;
  std::optional<Cut> carry_;
  std::size_t next_index_ = 0;
  bool done_ = false;
};

class VectorBatchStream : public BatchStream {
 public:
  explicit VectorBatchStream(std::vector<Batch> batches)
      : batches_(std::move(batches)) {}
  std::optional<Batch> next() override {
    if (pos_ >= batches_.size()) return std::nullopt;
    return std::move(batches_[pos_++]);
  }

 private:
  std::vector<Batch> batches_;
  std::size_t pos_ = 0;
};

CutSet maybe_shuffled(const CutSet& cuts, const SamplerConstraints& c) {
  if (!c.shuffle_seed) return cuts;
  if (cuts.is_lazy()) return cuts.lazy_shuffle(10000, *c.shuffle_seed);
  return cuts.shuffle(*c.shuffle_seed);
}

}  // namespace

std::unique_ptr<BatchStream> dynamic_sample(const CutSet& cuts,
                                            const SamplerConstraints& c) {
  c.check();
  return std::make_unique<DynamicSampler>(maybe_shuffled(cuts, c).stream(), c);
}

BucketSpec estimate_buckets(const CutSet& cuts, std::size_t num_buckets) {
  if (num_buckets == 0) throw ArgumentError("num_buckets must be >= 1");
  std::vector<double> durations;
  auto s = cuts.stream();
  while (durations.size() < 10000) {
    auto cut = s->next();
    if (!cut) break;
    durations.push_back(cut->duration());
  }
  std::sort(durations.begin(), durations.end());
  BucketSpec spec;
  spec.num_buckets = num_buckets;
  std::size_t n = durations.size();
  if (n == 0) return spec;
  for (std::size_t k = 1; k < num_buckets; ++k) {
    // Nearest-rank quantile.
    auto rank = static_cast<std::size_t>(std::ceil(
        static_cast<double>(k) / static_cast<double>(num_buckets) *
        static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    spec.boundaries.push_back(durations[rank - 1]);
  }
  return spec;
}

std::unique_ptr<BatchStream> bucketing_sample(const CutSet& cuts,
                                              const BucketSpec& spec,
                                              const SamplerConstraints& c) {
  c.check();
  std::size_t nb = std::max<std::size_t>(spec.num_buckets, 1);
  std::vector<std::vector<Cut>> buckets(nb);
  {
    auto s = maybe_shuffled(cuts, c).stream();
    while (auto cut = s->next()) {
      std::size_t b = std::min(spec.bucket_of(cut->duration()), nb - 1);
      buckets[b].push_back(std::move(*cut));
    }
  }

  // Each bucket batches independently; sharding happens on the merged
  // sequence so the global index is well defined.
  SamplerConstraints inner = c;
  inner.world_size = 1;
  inner.rank = 0;
  inner.shuffle_seed.reset();
  std::vector<std::deque<Batch>> queues(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    DynamicSampler sampler(
        CutSet::from_cuts(std::move(buckets[b])).stream(), inner);
    while (auto batch = sampler.next()) queues[b].push_back(std::move(*batch));
  }

  Rng rng(c.shuffle_seed.value_or(0));
  std::vector<Batch> merged;
  std::size_t remaining = 0;
  for (const auto& q : queues) remaining += q.size();
  std::size_t index = 0;
  while (remaining > 0) {
    // Draw a bucket with probability proportional to its remaining
    // batch count.
    auto pick = rng.below(remaining);
    std::size_t chosen = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      if (pick < queues[b].size()) {
        chosen = b;
        break;
      }
      pick -= queues[b].size();
      chosen = b;
    }
    Batch batch = std::move(queues[chosen].front());
    queues[chosen].pop_front();
    --remaining;
    std::size_t idx = index++;
    if (idx % c.world_size != c.rank) continue;
    batch.index = idx;
    merged.push_back(std::move(batch));
  }
  return std::make_unique<VectorBatchStream>(std::move(merged));
}

namespace {

class ZipSampler : public BatchStream {
 public:
  explicit ZipSampler(std::vector<std::unique_ptr<BatchStream>> children)
      : children_(std::move(children)) {}
  std::optional<Batch> next() override {
    Batch merged;
    merged.index = index_;
    for (auto& child : children_) {
      auto batch = child->next();
      if (!batch) return std::nullopt;  // shortest child ends the zip
      merged.cuts.insert(merged.cuts.end(), batch->cuts.begin(),
                         batch->cuts.end());
      merged.oversized = merged.oversized || batch->oversized;
    }
    ++index_;
    return merged;
  }

 private:
  std::vector<std::unique_ptr<BatchStream>> children_;
  std::size_t index_ = 0;
};

class PairsSampler : public BatchPairStream {
 public:
  PairsSampler(std::unique_ptr<BatchStream> source,
               std::unordered_map<std::string, Cut> target)
      : source_(std::move(source)), target_(std::move(target)) {}
  std::optional<BatchPair> next() override {
    auto batch = source_->next();
    if (!batch) return std::nullopt;
    BatchPair pair;
    pair.target.index = batch->index;
    for (const auto& cut : batch->cuts) {
      pair.target.cuts.push_back(target_.at(cut.id()));
    }
    pair.source = std::move(*batch);
    return pair;
  }

 private:
  std::unique_ptr<BatchStream> source_;
  std::unordered_map<std::string, Cut> target_;
};

}  // namespace

std::unique_ptr<BatchStream> zip_sample(
    std::vector<std::unique_ptr<BatchStream>> children) {
  if (children.empty()) throw ArgumentError("zip: no child samplers");
  return std::make_unique<ZipSampler>(std::move(children));
}

std::unique_ptr<BatchPairStream> pairs_sample(const CutSet& source,
                                              const CutSet& target,
                                              const SamplerConstraints& c) {
  c.check();
  std::unordered_map<std::string, Cut> target_by_id;
  {
    auto s = target.stream();
    while (auto cut = s->next()) {
      target_by_id.emplace(cut->id(), std::move(*cut));
    }
  }
  std::vector<std::string> unmatched;
  std::unordered_set<std::string> source_ids;
  {
    auto s = source.stream();
    while (auto cut = s->next()) {
      source_ids.insert(cut->id());
      if (!target_by_id.count(cut->id()) && unmatched.size() < 10) {
        unmatched.push_back(cut->id());
      }
    }
  }
  for (const auto& [id, cut] : target_by_id) {
    if (!source_ids.count(id) && unmatched.size() < 10) unmatched.push_back(id);
  }
  if (!unmatched.empty()) {
    std::string msg = "cut id sets differ; first unmatched:";
    for (const auto& id : unmatched) msg += " " + id;
    throw PairingError(msg);
  }
  return std::make_unique<PairsSampler>(dynamic_sample(source, c),
                                        std::move(target_by_id));
}

double padding_waste(const std::vector<Batch>& batches) {
  double waste = 0.0;
  for (const auto& b : batches) {
    double max_d = 0.0;
    for (const auto& c : b.cuts) max_d = std::max(max_d, c.duration());
    for (const auto& c : b.cuts) waste += max_d - c.duration();
  }
  return waste;
}

}  // namespace cutkit
