#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "cutkit/errors.hpp"
#include "cutkit/features.hpp"
#include "helpers.hpp"

using namespace cutkit;
using namespace cutkit::test;
namespace fs = std::filesystem;

namespace {

FeatureMatrix random_matrix(std::size_t frames, std::size_t bins,
                            std::uint64_t seed) {
  FeatureMatrix m;
  m.num_frames = frames;
  m.num_bins = bins;
  m.frame_shift = 0.01;
  m.frame_length = 0.025;
  Rng rng(seed);
  m.data.resize(frames * bins);
  for (auto& v : m.data) v = static_cast<float>(rng.uniform(-5.0, 5.0));
  return m;
}

}  // namespace

TEST_CASE("frame_count law") {
  CHECK(frame_count(16000, 0.025, 0.01, 16000) == 98);
  CHECK(frame_count(400, 0.025, 0.01, 16000) == 1);   // exactly one window
  CHECK(frame_count(399, 0.025, 0.01, 16000) == 0);   // shorter than a window
  // Sliding-window counting oracle over random sizes.
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    auto n = static_cast<std::int64_t>(rng.below(50000));
    std::int64_t L = 400, S = 160, count = 0;
    for (std::int64_t o = 0; o + L <= n; o += S) ++count;
    CHECK(frame_count(n, 0.025, 0.01, 16000) == count);
  }
}

TEST_CASE("store: write/read round trip, keys, sizes") {
  auto dir = fresh_dir("cutkit_test_store_rt");
  std::string path = (dir / "feats.bin").string();
  std::vector<FeatureMatrix> matrices;
  std::vector<std::string> keys;
  std::uint64_t payload_bytes = 0;
  {
    auto store = FeatureStore::create(path);
    for (int i = 0; i < 100; ++i) {
      matrices.push_back(random_matrix(10 + i, 1 + i % 4, i));
      keys.push_back(store.write(matrices.back()));
      payload_bytes += 32 + matrices.back().data.size() * 4;
    }
    CHECK(std::set<std::string>(keys.begin(), keys.end()).size() ==
          keys.size());
    store.close();
  }
  // Reopen (fresh process analogue) and verify bitwise equality.
  auto store = FeatureStore::open(path);
  CHECK(store.keys().size() == 100);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    CHECK(store.read(keys[i]) == matrices[i]);
  }
  CHECK_THROWS_AS(store.read("not-a-key"), KeyError);

  // File size arithmetic: header + payloads + index.
  auto file_size = fs::file_size(path);
  std::uint64_t index_bytes = 8;  // entry count
  for (const auto& k : keys) index_bytes += 8 + k.size() + 24;
  CHECK(file_size == 13 + payload_bytes + index_bytes);
}

TEST_CASE("store: truncation is detected") {
  auto dir = fresh_dir("cutkit_test_store_trunc");
  std::string path = (dir / "feats.bin").string();
  {
    auto store = FeatureStore::create(path);
    store.write(random_matrix(50, 4, 1));
    store.close();
  }
  // An unclosed (index-less) file is corrupt.
  std::string bad = (dir / "bad.bin").string();
  {
    std::ofstream out(bad, std::ios::binary);
    out << "FSTR1";
    out.write("\0\0\0\0\0\0\0\0", 8);
  }
  CHECK_THROWS_AS(FeatureStore::open(bad), CorruptionError);
  std::string noise = (dir / "noise.bin").string();
  {
    std::ofstream out(noise, std::ios::binary);
    out << "not a store";
  }
  CHECK_THROWS_AS(FeatureStore::open(noise), CorruptionError);
}

TEST_CASE("store: writer lock excludes a second writer") {
  auto dir = fresh_dir("cutkit_test_store_lock");
  std::string path = (dir / "feats.bin").string();
  auto store = FeatureStore::create(path);
  CHECK_THROWS_AS(FeatureStore::create(path), IoError);
  store.close();
  CHECK_NOTHROW(FeatureStore::create((dir / "other.bin").string()).close());
}

TEST_CASE("compute_logenergy: silence floor, full scale, sine oracle") {
  auto silence = SampleBlock::zeros(16000, 1, 16000);
  auto m = compute_logenergy(silence, 0.025, 0.01);
  CHECK(m.num_frames == 98);
  CHECK(m.num_bins == 1);
  for (auto v : m.data) CHECK(v == doctest::Approx(std::log(1e-10)));

  SampleBlock ones = SampleBlock::zeros(16000, 1, 16000);
  for (auto& v : ones.data) v = 1.0f;
  auto m1 = compute_logenergy(ones, 0.025, 0.01);
  for (auto v : m1.data) CHECK(v == doctest::Approx(0.0).epsilon(1e-6));

  auto sine = make_sine(16000, 16000, 250.0);
  auto ms = compute_logenergy(sine, 0.025, 0.01);
  for (std::size_t f = 0; f < ms.num_frames; ++f) {
    double acc = 0;
    for (std::size_t i = 0; i < 400; ++i) {
      double v = sine.at(0, f * 160 + i);
      acc += v * v;
    }
    CHECK(ms.at(f, 0) ==
          doctest::Approx(std::log(std::max(acc / 400, 1e-10))).epsilon(1e-5));
  }
}

TEST_CASE("extract_logenergy fills a consistent manifest") {
  auto dir = fresh_dir("cutkit_test_feat_extract");
  auto rec = make_recording(dir, "r", make_sine(16000, 32000, 220.0));
  Cut cut = make_mono_cut(rec, "c");
  auto store = FeatureStore::create((dir / "feats.bin").string());
  auto [manifest, key] = extract_logenergy(cut, 0.025, 0.01, store);
  store.close();
  CHECK(manifest.recording_id == "r");
  CHECK(manifest.num_frames == frame_count(32000, 0.025, 0.01, 16000));
  CHECK(manifest.num_features == 1);
  CHECK(manifest.frame_shift == 0.01);
  CHECK(manifest.storage_key == key);
  auto reader = FeatureStore::open(manifest.storage_path);
  CHECK(reader.read(key).num_frames ==
        static_cast<std::size_t>(manifest.num_frames));
}

TEST_CASE("collate_audio: shapes, zero padding, content") {
  auto dir = fresh_dir("cutkit_test_collate_audio");
  auto r2 = make_recording(dir, "a", make_sine(16000, 32000, 220.0));
  auto r3 = make_recording(dir, "b", make_sine(16000, 48000, 180.0));
  MonoCut mc = *make_mono_cut(r2, "ca").as_mono();
  SupervisionSegment sup;
  sup.id = "s";
  sup.recording_id = "a";
  sup.start = 0.5;
  sup.duration = 1.0;
  sup.text = "hi";
  mc.supervisions = {sup};
  std::vector<Cut> batch = {Cut(mc), make_mono_cut(r3, "cb")};

  auto collated = collate_audio(batch);
  CHECK(collated.batch_size == 2);
  CHECK(collated.max_len == 48000);
  CHECK(collated.lengths == std::vector<std::size_t>{32000, 48000});

  auto a0 = batch[0].load_audio();
  for (std::size_t i = 0; i < 32000; ++i) {
    REQUIRE(collated.row(0)[i] == a0.at(0, i));
  }
  for (std::size_t i = 32000; i < 48000; ++i) {
    REQUIRE(collated.row(0)[i] == 0.0f);
  }
  REQUIRE(collated.supervision_table.size() == 1);
  CHECK(collated.supervision_table[0].item_index == 0);
  CHECK(collated.supervision_table[0].start_unit == 8000);
  CHECK(collated.supervision_table[0].duration_unit == 16000);
}

TEST_CASE("collate_audio rejects mixed rates") {
  auto dir = fresh_dir("cutkit_test_collate_rates");
  auto a = make_mono_cut(make_recording(dir, "a", make_sine(16000, 16000, 100.0)), "a");
  auto b = make_mono_cut(make_recording(dir, "b", make_sine(8000, 8000, 100.0)), "b");
  CHECK_THROWS_AS(collate_audio({a, b}), CollationError);
}

TEST_CASE("collate_features: store-backed, frame units, filler") {
  auto dir = fresh_dir("cutkit_test_collate_feat");
  auto ra = make_recording(dir, "a", make_sine(16000, 16000, 220.0));
  auto rb = make_recording(dir, "b", make_sine(16000, 8400, 180.0));
  auto store = FeatureStore::create((dir / "feats.bin").string());
  MonoCut ca = *make_mono_cut(ra, "ca").as_mono();
  MonoCut cb = *make_mono_cut(rb, "cb").as_mono();
  auto [fa, ka] = extract_logenergy(ca, 0.025, 0.01, store);
  auto [fb, kb] = extract_logenergy(cb, 0.025, 0.01, store);
  store.close();
  ca.features = fa;
  SupervisionSegment sup;
  sup.id = "s";
  sup.recording_id = "a";
  sup.start = 0.5;
  sup.duration = 0.25;
  ca.supervisions = {sup};
  cb.features = fb;

  auto collated = collate_features({Cut(ca), Cut(cb)});
  CHECK(collated.batch_size == 2);
  CHECK(collated.num_bins == 1);
  CHECK(collated.lengths ==
        std::vector<std::size_t>{98, 51});  // frame_count(8400) = 51
  CHECK(collated.max_len == 98);
  // Padded frames carry the log-silence filler.
  for (std::size_t f = 51; f < 98; ++f) {
    REQUIRE(collated.row(1)[f] == doctest::Approx(-23.025851f));
  }
  REQUIRE(collated.supervision_table.size() == 1);
  CHECK(collated.supervision_table[0].start_unit == 50);  // 0.5 s / 10 ms
  CHECK(collated.supervision_table[0].duration_unit == 25);
}

TEST_CASE("collate_features: on-the-fly path and error without it") {
  auto dir = fresh_dir("cutkit_test_collate_otf");
  auto rec = make_recording(dir, "a", make_sine(16000, 16000, 220.0));
  Cut cut = make_mono_cut(rec, "c");
  CHECK_THROWS_AS(collate_features({cut}), CollationError);
  CollateFeaturesOptions opts;
  opts.on_the_fly = true;
  auto collated = collate_features({cut}, opts);
  CHECK(collated.lengths == std::vector<std::size_t>{98});
  // Equals direct extraction.
  auto direct = compute_logenergy(cut.load_audio(), 0.025, 0.01);
  for (std::size_t f = 0; f < 98; ++f) {
    CHECK(collated.row(0)[f] == direct.at(f, 0));
  }
}

TEST_CASE("collate_features rejects mixed frame_shift") {
  auto dir = fresh_dir("cutkit_test_collate_shift");
  auto rec = make_recording(dir, "a", make_sine(16000, 16000, 220.0));
  auto store = FeatureStore::create((dir / "f.bin").string());
  MonoCut a = *make_mono_cut(rec, "a").as_mono();
  MonoCut b = *make_mono_cut(rec, "b").as_mono();
  auto [fa, ka] = extract_logenergy(a, 0.025, 0.01, store);
  auto [fb, kb] = extract_logenergy(b, 0.025, 0.02, store);
  store.close();
  a.features = fa;
  b.features = fb;
  CHECK_THROWS_AS(collate_features({Cut(a), Cut(b)}), CollationError);
}
