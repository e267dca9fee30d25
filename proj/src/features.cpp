#include "cutkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

#include "cutkit/errors.hpp"
#include "cutkit/kernels.hpp"

namespace cutkit {

std::int64_t frame_count(std::int64_t num_samples, double frame_length,
                         double frame_shift, int sampling_rate) {
  auto window = std::llround(frame_length * sampling_rate);
  auto shift = std::llround(frame_shift * sampling_rate);
  if (window <= 0 || shift <= 0) throw ArgumentError("bad frame parameters");
  if (num_samples < window) return 0;
  return (num_samples - window) / shift + 1;
}

// ---- store ----

namespace {

constexpr char kMagic[5] = {'F', 'S', 'T', 'R', '1'};
constexpr std::size_t kHeaderSize = 5 + 8;  // magic + index offset

struct IndexEntry {
  std::uint64_t offset = 0;
  std::uint64_t frames = 0;
  std::uint64_t bins = 0;
};

void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

struct FeatureStore::Impl {
  std::string path;
  bool writable = false;
  std::fstream file;
  std::map<std::string, IndexEntry> index;
  std::uint64_t write_pos = 0;
  std::uint64_t counter = 0;
  bool closed = false;

  std::string lock_path() const { return path + ".lock"; }

  void release_lock() {
    std::error_code ec;
    std::filesystem::remove(lock_path(), ec);
  }
};

FeatureStore::FeatureStore() : impl_(new Impl) {}
FeatureStore::FeatureStore(FeatureStore&&) noexcept = default;
FeatureStore& FeatureStore::operator=(FeatureStore&&) noexcept = default;

FeatureStore::~FeatureStore() {
  if (impl_ && impl_->writable && !impl_->closed) {
    try {
      close();
    } catch (...) {
    }
  }
}

FeatureStore FeatureStore::create(const std::string& path) {
  FeatureStore store;
  auto& impl = *store.impl_;
  impl.path = path;
  impl.writable = true;
  {
    // Writer exclusivity via a lock file.
    std::ofstream lock(impl.lock_path(), std::ios::out | std::ios::app);
    if (std::filesystem::file_size(impl.lock_path()) > 0 ||
        !std::filesystem::exists(impl.lock_path())) {
      throw IoError("store is locked by another writer: " + path);
    }
    lock << "locked\n";
  }
  impl.file.open(path, std::ios::binary | std::ios::out | std::ios::trunc);
  if (!impl.file) {
    impl.release_lock();
    throw IoError("cannot create store: " + path);
  }
  impl.file.write(kMagic, 5);
  put_u64(impl.file, 0);  // index offset, patched at close
  impl.write_pos = kHeaderSize;
  return store;
}

FeatureStore FeatureStore::open(const std::string& path) {
  FeatureStore store;
  auto& impl = *store.impl_;
  impl.path = path;
  impl.file.open(path, std::ios::binary | std::ios::in);
  if (!impl.file) throw IoError("cannot open store: " + path);
  char magic[5];
  impl.file.read(magic, 5);
  if (impl.file.gcount() != 5 || std::memcmp(magic, kMagic, 5) != 0) {
    throw CorruptionError("bad store magic in " + path);
  }
  std::uint64_t index_offset = get_u64(impl.file);
  if (index_offset == 0) {
    throw CorruptionError("store has no index (writer not closed?): " + path);
  }
  impl.file.seekg(static_cast<std::streamoff>(index_offset));
  std::uint64_t count = get_u64(impl.file);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t key_len = get_u64(impl.file);
    std::string key(key_len, '\0');
    impl.file.read(key.data(), static_cast<std::streamsize>(key_len));
    IndexEntry entry;
    entry.offset = get_u64(impl.file);
    entry.frames = get_u64(impl.file);
    entry.bins = get_u64(impl.file);
    impl.index.emplace(std::move(key), entry);
  }
  if (!impl.file) throw CorruptionError("truncated index in " + path);
  return store;
}

std::string FeatureStore::write(const FeatureMatrix& matrix) {
  auto& impl = *impl_;
  if (!impl.writable || impl.closed) {
    throw IoError("store not open for writing: " + impl.path);
  }
  std::string key = "m" + std::to_string(impl.counter++);
  IndexEntry entry;
  entry.offset = impl.write_pos;
  entry.frames = matrix.num_frames;
  entry.bins = matrix.num_bins;

  impl.file.seekp(static_cast<std::streamoff>(impl.write_pos));
  put_u64(impl.file, matrix.num_frames);
  put_u64(impl.file, matrix.num_bins);
  put_f64(impl.file, matrix.frame_shift);
  put_f64(impl.file, matrix.frame_length);
  impl.file.write(reinterpret_cast<const char*>(matrix.data.data()),
                  static_cast<std::streamsize>(matrix.data.size() * 4));
  if (!impl.file) throw IoError("store write failed: " + impl.path);
  impl.write_pos += 32 + matrix.data.size() * 4;
  impl.index.emplace(key, entry);
  return key;
}

FeatureMatrix FeatureStore::read(const std::string& key) const {
  auto& impl = *impl_;
  auto it = impl.index.find(key);
  if (it == impl.index.end()) {
    throw KeyError("unknown storage key \"" + key + "\" in " + impl.path);
  }
  const IndexEntry& entry = it->second;
  auto& file = const_cast<std::fstream&>(impl.file);
  file.clear();
  file.seekg(static_cast<std::streamoff>(entry.offset));
  FeatureMatrix m;
  m.num_frames = get_u64(file);
  m.num_bins = get_u64(file);
  m.frame_shift = get_f64(file);
  m.frame_length = get_f64(file);
  if (m.num_frames != entry.frames || m.num_bins != entry.bins) {
    throw CorruptionError("store entry header disagrees with index for \"" +
                          key + "\"");
  }
  m.data.resize(m.num_frames * m.num_bins);
  file.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * 4));
  if (file.gcount() != static_cast<std::streamsize>(m.data.size() * 4)) {
    throw CorruptionError(
        "truncated payload for \"" + key + "\": expected " +
        std::to_string(m.data.size() * 4) + " bytes, got " +
        std::to_string(file.gcount()));
  }
  return m;
}

std::vector<std::string> FeatureStore::keys() const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : impl_->index) out.push_back(key);
  return out;
}

const std::string& FeatureStore::path() const { return impl_->path; }

void FeatureStore::close() {
  auto& impl = *impl_;
  if (!impl.writable || impl.closed) return;
  impl.closed = true;
  std::uint64_t index_offset = impl.write_pos;
  impl.file.seekp(static_cast<std::streamoff>(index_offset));
  put_u64(impl.file, impl.index.size());
  for (const auto& [key, entry] : impl.index) {
    put_u64(impl.file, key.size());
    impl.file.write(key.data(), static_cast<std::streamsize>(key.size()));
    put_u64(impl.file, entry.offset);
    put_u64(impl.file, entry.frames);
    put_u64(impl.file, entry.bins);
  }
  impl.file.seekp(5);
  put_u64(impl.file, index_offset);
  impl.file.flush();
  if (!impl.file) throw IoError("store close failed: " + impl.path);
  impl.file.close();
  impl.release_lock();
}

// ---- extractor ----

FeatureMatrix compute_logenergy(const SampleBlock& block, double frame_length,
                                double frame_shift) {
  if (block.num_channels != 1) {
    throw ArgumentError("log-energy extractor expects mono audio");
  }
  auto window = std::llround(frame_length * block.sampling_rate);
  auto shift = std::llround(frame_shift * block.sampling_rate);
  std::int64_t frames = frame_count(
      static_cast<std::int64_t>(block.num_frames), frame_length, frame_shift,
      block.sampling_rate);
  FeatureMatrix m;
  m.num_frames = static_cast<std::size_t>(frames);
  m.num_bins = 1;
  m.frame_shift = frame_shift;
  m.frame_length = frame_length;
  m.data.resize(m.num_frames);
  kernels::log_energy_frames(m.data.data(), m.num_frames, block.channel(0),
                             static_cast<std::size_t>(window),
                             static_cast<std::size_t>(shift), -23.025851f);
  return m;
}

std::pair<FeaturesManifest, std::string> extract_logenergy(
    const Cut& cut, double frame_length, double frame_shift,
    FeatureStore& store) {
  SampleBlock block = cut.load_audio();
  FeatureMatrix m = compute_logenergy(block, frame_length, frame_shift);
  std::string key = store.write(m);

  FeaturesManifest manifest;
  if (auto* mono = cut.as_mono()) {
    manifest.recording_id = mono->recording.id;
    manifest.channels = {mono->channel};
    manifest.start = static_cast<double>(mono->rec_start_frame) /
                     mono->recording.sampling_rate;
  } else {
    manifest.recording_id = cut.id();
    manifest.channels = {0};
    manifest.start = 0.0;
  }
  manifest.duration = cut.duration();
  manifest.extractor_type = "logenergy";
  manifest.num_frames = static_cast<std::int64_t>(m.num_frames);
  manifest.num_features = 1;
  manifest.frame_shift = frame_shift;
  manifest.sampling_rate = cut.sampling_rate();
  manifest.storage_path = store.path();
  manifest.storage_key = key;
  return {manifest, key};
}

// ---- collation ----

CollatedBatch collate_audio(const std::vector<Cut>& batch) {
  CollatedBatch out;
  out.batch_size = batch.size();
  out.filler = 0.0f;
  if (batch.empty()) return out;

  int rate = batch.front().sampling_rate();
  std::vector<SampleBlock> blocks;
  for (const auto& cut : batch) {
    if (cut.sampling_rate() != rate) {
      throw CollationError("mixed sampling rates in one batch");
    }
    blocks.push_back(cut.load_audio());
    out.lengths.push_back(blocks.back().num_frames);
    out.max_len = std::max(out.max_len, blocks.back().num_frames);
  }
  out.data.assign(out.batch_size * out.max_len, 0.0f);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::copy_n(blocks[i].channel(0), blocks[i].num_frames,
                out.data.data() + i * out.max_len);
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (const auto& sup : batch[i].supervisions()) {
      CollatedBatch::SupervisionRow row;
      row.item_index = i;
      row.start_unit = std::llround(sup.start * rate);
      row.duration_unit = std::llround(sup.duration * rate);
      row.text = sup.text;
      row.speaker = sup.speaker;
      out.supervision_table.push_back(std::move(row));
    }
  }
  return out;
}

CollatedBatch collate_features(const std::vector<Cut>& batch,
                               const CollateFeaturesOptions& options) {
  CollatedBatch out;
  out.batch_size = batch.size();
  out.filler = -23.025851f;
  if (batch.empty()) return out;

  std::map<std::string, FeatureStore> stores;
  std::optional<FeatureStore> scratch;  // on-the-fly extraction sink? not persisted
  std::vector<FeatureMatrix> matrices;
  double frame_shift = 0.0;
  for (const auto& cut : batch) {
    FeatureMatrix m;
    const FeaturesManifest* feats =
        cut.as_mono() && cut.as_mono()->features
            ? &*cut.as_mono()->features
            : nullptr;
    if (feats) {
      auto it = stores.find(feats->storage_path);
      if (it == stores.end()) {
        it = stores
                 .emplace(feats->storage_path,
                          FeatureStore::open(feats->storage_path))
                 .first;
      }
      m = it->second.read(feats->storage_key);
    } else if (options.on_the_fly) {
      m = compute_logenergy(cut.load_audio(), options.frame_length,
                            options.frame_shift);
    } else {
      throw CollationError("cut \"" + cut.id() +
                           "\" has no features manifest (on-the-fly "
                           "extraction disabled)");
    }
    if (frame_shift == 0.0) {
      frame_shift = m.frame_shift;
      out.num_bins = m.num_bins;
    } else if (std::abs(frame_shift - m.frame_shift) > 1e-9) {
      throw CollationError("mixed frame_shift in one batch");
    } else if (out.num_bins != m.num_bins) {
      throw CollationError("mixed feature dimensions in one batch");
    }
    out.lengths.push_back(m.num_frames);
    out.max_len = std::max(out.max_len, m.num_frames);
    matrices.push_back(std::move(m));
  }

  out.data.assign(out.batch_size * out.max_len * out.num_bins, out.filler);
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    std::copy(matrices[i].data.begin(), matrices[i].data.end(),
              out.data.begin() +
                  static_cast<std::ptrdiff_t>(i * out.max_len * out.num_bins));
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (const auto& sup : batch[i].supervisions()) {
      CollatedBatch::SupervisionRow row;
      row.item_index = i;
      row.start_unit = std::llround(sup.start / frame_shift);
      row.duration_unit = std::llround(sup.duration / frame_shift);
      row.text = sup.text;
      row.speaker = sup.speaker;
      out.supervision_table.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace cutkit
