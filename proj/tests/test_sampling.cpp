#include <doctest.h>

#include <algorithm>
#include <map>

#include "cutkit/errors.hpp"
#include "cutkit/sampling.hpp"
#include "helpers.hpp"

using namespace cutkit;
using namespace cutkit::test;

namespace {

CutSet padding_set(const std::vector<double>& durations,
                   const std::string& prefix = "c") {
  std::vector<Cut> cuts;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    PaddingCut p;
    p.id = prefix + std::to_string(i);
    p.sampling_rate = 16000;
    p.num_samples = std::llround(durations[i] * 16000);
    cuts.push_back(p);
  }
  return CutSet::from_cuts(std::move(cuts));
}

std::vector<std::vector<std::string>> plan_ids(BatchStream& s) {
  std::vector<std::vector<std::string>> out;
  while (auto b = s.next()) out.push_back(b->cut_ids());
  return out;
}

}  // namespace

TEST_CASE("constraints validation") {
  SamplerConstraints c;
  CHECK_THROWS_AS(c.check(), ArgumentError);  // neither cap set
  c.max_duration = -1.0;
  CHECK_THROWS_AS(c.check(), ArgumentError);
  c.max_duration = 10.0;
  c.rank = 2;
  c.world_size = 2;
  CHECK_THROWS_AS(c.check(), ArgumentError);
  c.rank = 1;
  CHECK_NOTHROW(c.check());
}

TEST_CASE("dynamic_sample: greedy rule") {
  SamplerConstraints c;
  c.max_duration = 10.0;
  auto plan = plan_ids(*dynamic_sample(padding_set({3, 4, 5, 6}), c));
  REQUIRE(plan.size() == 3);
  CHECK(plan[0] == std::vector<std::string>{"c0", "c1"});
  CHECK(plan[1] == std::vector<std::string>{"c2"});
  CHECK(plan[2] == std::vector<std::string>{"c3"});
}

TEST_CASE("dynamic_sample: oversized singleton") {
  SamplerConstraints c;
  c.max_duration = 10.0;
  auto batches = dynamic_sample(padding_set({12.0}), c)->collect();
  REQUIRE(batches.size() == 1);
  CHECK(batches[0].oversized);
  CHECK(batches[0].cuts.size() == 1);
}

TEST_CASE("dynamic_sample: max_cuts and drop_last") {
  SamplerConstraints c;
  c.max_cuts = 2;
  c.drop_last = true;
  auto plan = plan_ids(*dynamic_sample(padding_set({1, 1, 1, 1, 1}), c));
  REQUIRE(plan.size() == 2);
  CHECK(plan[0].size() == 2);
  CHECK(plan[1].size() == 2);  // the trailing single cut is dropped
}

TEST_CASE("dynamic_sample: empty input, partition, determinism") {
  SamplerConstraints c;
  c.max_duration = 7.0;
  CHECK(dynamic_sample(CutSet(), c)->collect().empty());

  Rng rng(5);
  std::vector<double> durations;
  for (int i = 0; i < 500; ++i) durations.push_back(rng.uniform(0.5, 6.0));
  auto cs = padding_set(durations);

  auto batches = dynamic_sample(cs, c)->collect();
  std::vector<std::string> sampled;
  for (const auto& b : batches) {
    if (!b.oversized) {
      CHECK(b.total_duration() <= 7.0 + 1e-9);
    }
    for (const auto& id : b.cut_ids()) sampled.push_back(id);
  }
  std::sort(sampled.begin(), sampled.end());
  std::vector<std::string> all;
  auto s = cs.stream();
  while (auto cut = s->next()) all.push_back(cut->id());
  std::sort(all.begin(), all.end());
  CHECK(sampled == all);  // multiset partition (ids are unique here)

  c.shuffle_seed = 11;
  auto p1 = plan_ids(*dynamic_sample(cs, c));
  auto p2 = plan_ids(*dynamic_sample(cs, c));
  CHECK(p1 == p2);
}

TEST_CASE("distributed sharding: disjoint union, balanced") {
  Rng rng(9);
  std::vector<double> durations;
  for (int i = 0; i < 300; ++i) durations.push_back(rng.uniform(0.5, 5.0));
  auto cs = padding_set(durations);
  SamplerConstraints c;
  c.max_duration = 12.0;

  auto full = plan_ids(*dynamic_sample(cs, c));
  for (std::size_t world : {2u, 4u}) {
    std::vector<std::vector<std::string>> merged;
    std::vector<std::size_t> counts;
    for (std::size_t rank = 0; rank < world; ++rank) {
      SamplerConstraints cr = c;
      cr.world_size = world;
      cr.rank = rank;
      auto batches = dynamic_sample(cs, cr)->collect();
      counts.push_back(batches.size());
      for (auto& b : batches) {
        // Global index identifies the batch's slot in the full plan.
        CHECK(b.index % world == rank);
        REQUIRE(b.index < full.size());
        CHECK(b.cut_ids() == full[b.index]);
        merged.push_back(b.cut_ids());
      }
    }
    CHECK(merged.size() == full.size());
    auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("estimate_buckets: nearest-rank quantiles") {
  auto spec = estimate_buckets(padding_set({1, 2, 3, 4, 5, 6, 7, 8}), 2);
  REQUIRE(spec.boundaries.size() == 1);
  CHECK(spec.boundaries[0] == doctest::Approx(4.0));

  // Uniform(1, 100): boundaries near 25/50/75.
  Rng rng(21);
  std::vector<double> durations;
  for (int i = 0; i < 10000; ++i) durations.push_back(rng.uniform(1, 100));
  auto spec4 = estimate_buckets(padding_set(durations), 4);
  REQUIRE(spec4.boundaries.size() == 3);
  CHECK(std::abs(spec4.boundaries[0] - 25.0) <= 2.0);
  CHECK(std::abs(spec4.boundaries[1] - 50.0) <= 2.0);
  CHECK(std::abs(spec4.boundaries[2] - 75.0) <= 2.0);

  // Degenerate: all equal -> everything lands in bucket 0.
  auto flat = estimate_buckets(padding_set({2, 2, 2, 2}), 3);
  CHECK(flat.bucket_of(2.0) <= 2);
}

TEST_CASE("bucketing: modes never mix, waste shrinks") {
  std::vector<double> bimodal;
  for (int i = 0; i < 100; ++i) bimodal.push_back(1.0);
  for (int i = 0; i < 100; ++i) bimodal.push_back(10.0);
  auto cs = padding_set(bimodal);
  SamplerConstraints c;
  c.max_duration = 30.0;
  auto spec = estimate_buckets(cs, 2);
  auto batches = bucketing_sample(cs, spec, c)->collect();
  std::size_t seen = 0;
  for (const auto& b : batches) {
    double lo = 1e9, hi = 0;
    for (const auto& cut : b.cuts) {
      lo = std::min(lo, cut.duration());
      hi = std::max(hi, cut.duration());
    }
    CHECK(lo == hi);  // no batch mixes the modes
    seen += b.cuts.size();
  }
  CHECK(seen == 200);

  // Random durations: 4 buckets never waste more than 1 bucket.
  Rng rng(33);
  std::vector<double> durations;
  for (int i = 0; i < 2000; ++i) durations.push_back(rng.uniform(1, 30));
  auto rnd = padding_set(durations);
  SamplerConstraints cw;
  cw.max_duration = 120.0;
  auto waste1 = padding_waste(
      bucketing_sample(rnd, estimate_buckets(rnd, 1), cw)->collect());
  auto waste4 = padding_waste(
      bucketing_sample(rnd, estimate_buckets(rnd, 4), cw)->collect());
  CHECK(waste4 <= waste1);
}

TEST_CASE("bucketing with 1 bucket equals dynamic_sample") {
  auto cs = padding_set({3, 4, 5, 6, 2, 8});
  SamplerConstraints c;
  c.max_duration = 9.0;
  auto a = plan_ids(*dynamic_sample(cs, c));
  BucketSpec one;
  one.num_buckets = 1;
  auto b = plan_ids(*bucketing_sample(cs, one, c));
  CHECK(a == b);
}

TEST_CASE("zip_sample: concatenation and shortest-child rule") {
  SamplerConstraints c;
  c.max_cuts = 2;
  std::vector<std::unique_ptr<BatchStream>> children;
  children.push_back(dynamic_sample(padding_set({1, 1, 1, 1}, "a"), c));
  children.push_back(dynamic_sample(padding_set({1, 1, 1, 1, 1, 1}, "b"), c));
  auto merged = zip_sample(std::move(children))->collect();
  REQUIRE(merged.size() == 2);  // child a has 2 batches, b has 3
  CHECK(merged[0].cut_ids() ==
        std::vector<std::string>{"a0", "a1", "b0", "b1"});
  CHECK(merged[0].total_duration() == doctest::Approx(4.0));

  CHECK_THROWS_AS(zip_sample(std::vector<std::unique_ptr<BatchStream>>{}),
                  ArgumentError);
}

TEST_CASE("pairs_sample: id pairing and mismatch error") {
  auto source = padding_set({2, 3, 4}, "u");
  auto target = padding_set({20, 30, 40}, "u");  // same ids, long durations
  SamplerConstraints c;
  c.max_duration = 5.0;
  auto pairs = pairs_sample(source, target, c);
  std::size_t n = 0;
  while (auto pair = pairs->next()) {
    CHECK(pair->source.cut_ids() == pair->target.cut_ids());
    // Constraints bind on source only.
    CHECK(pair->source.total_duration() <= 5.0 + 1e-9);
    n += pair->source.cuts.size();
  }
  CHECK(n == 3);

  auto short_target = padding_set({1, 2}, "u");
  CHECK_THROWS_WITH_AS(pairs_sample(source, short_target, c),
                       doctest::Contains("u2"), PairingError);
}

TEST_CASE("padding_waste oracle") {
  Batch b;
  PaddingCut p;
  p.sampling_rate = 16000;
  p.id = "a";
  p.num_samples = 16000;  // 1 s
  b.cuts.push_back(p);
  p.id = "b";
  p.num_samples = 48000;  // 3 s
  b.cuts.push_back(p);
  CHECK(padding_waste({b}) == doctest::Approx(2.0));
}
