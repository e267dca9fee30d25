#include "cutkit/cutset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cutkit/errors.hpp"

namespace cutkit {

struct CutSet::Impl {
  // Null for lazy sets; eager sets also provide a factory over the
  // shared vector.
  std::shared_ptr<const std::vector<Cut>> eager;
  CutStreamFactory factory;
};

namespace {

class VectorStream : public CutStream {
 public:
  explicit VectorStream(std::shared_ptr<const std::vector<Cut>> cuts)
      : cuts_(std::move(cuts)) {}
  std::optional<Cut> next() override {
    if (pos_ >= cuts_->size()) return std::nullopt;
    return (*cuts_)[pos_++];
  }

 private:
  std::shared_ptr<const std::vector<Cut>> cuts_;
  std::size_t pos_ = 0;
};

class FileStream : public CutStream {
 public:
  explicit FileStream(std::string path) : src_(path), path_(std::move(path)) {}
  std::optional<Cut> next() override {
    for (;;) {
      auto line = src_.next();
      if (!line) return std::nullopt;
      if (line->empty()) continue;
      nlohmann::json j = nlohmann::json::parse(*line, nullptr, false);
      if (j.is_discarded()) {
        throw ParseError("malformed JSON in " + path_, src_.line_number());
      }
      try {
        return cut_from_json(j);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), src_.line_number());
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what(), src_.line_number());
      }
    }
  }

 private:
  LineSource src_;
  std::string path_;
};

// Expands each upstream cut into zero or more cuts.
class FlatMapStream : public CutStream {
 public:
  FlatMapStream(std::unique_ptr<CutStream> in,
                std::function<std::vector<Cut>(const Cut&)> fn)
      : in_(std::move(in)), fn_(std::move(fn)) {}
  std::optional<Cut> next() override {
    for (;;) {
      if (pos_ < buffer_.size()) return buffer_[pos_++];
      auto cut = in_->next();
      if (!cut) return std::nullopt;
      buffer_ = fn_(*cut);
      pos_ = 0;
    }
  }

 private:
  std::unique_ptr<CutStream> in_;
  std::function<std::vector<Cut>(const Cut&)> fn_;
  std::vector<Cut> buffer_;
  std::size_t pos_ = 0;
};

class TakeStream : public CutStream {
 public:
  TakeStream(std::unique_ptr<CutStream> in, std::size_t n)
      : in_(std::move(in)), left_(n) {}
  std::optional<Cut> next() override {
    if (left_ == 0) return std::nullopt;
    --left_;
    return in_->next();
  }

 private:
  std::unique_ptr<CutStream> in_;
  std::size_t left_;
};

class ConcatStream : public CutStream {
 public:
  explicit ConcatStream(std::vector<CutStreamFactory> factories)
      : factories_(std::move(factories)) {}
  std::optional<Cut> next() override {
    for (;;) {
      if (!current_) {
        if (index_ >= factories_.size()) return std::nullopt;
        current_ = factories_[index_++]();
      }
      auto cut = current_->next();
      if (cut) return cut;
      current_.reset();
    }
  }

 private:
  std::vector<CutStreamFactory> factories_;
  std::size_t index_ = 0;
  std::unique_ptr<CutStream> current_;
};

class RepeatStream : public CutStream {
 public:
  RepeatStream(CutStreamFactory factory, std::optional<std::size_t> times)
      : factory_(std::move(factory)), times_(times) {}
  std::optional<Cut> next() override {
    for (;;) {
      if (!current_) {
        if (times_ && round_ >= *times_) return std::nullopt;
        current_ = factory_();
        ++round_;
        any_ = false;
      }
      auto cut = current_->next();
      if (cut) {
        any_ = true;
        return cut;
      }
      if (!any_) return std::nullopt;  // empty source; avoid spinning
      current_.reset();
    }
  }

 private:
  CutStreamFactory factory_;
  std::optional<std::size_t> times_;
  std::size_t round_ = 0;
  bool any_ = false;
  std::unique_ptr<CutStream> current_;
};

// Deterministic 64-bit generator (splitmix64); avoids relying on
// std distribution implementations for reproducibility.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

// Streaming buffer shuffle: fill, then emit from a random slot and
// refill; memory bounded by the buffer size.
class BufferShuffleStream : public CutStream {
 public:
  BufferShuffleStream(std::unique_ptr<CutStream> in, std::size_t buffer_size,
                      std::uint64_t seed)
      : in_(std::move(in)), size_(std::max<std::size_t>(buffer_size, 1)),
        rng_(seed) {}
  std::optional<Cut> next() override {
    while (buffer_.size() < size_) {
      auto cut = in_->next();
      if (!cut) break;
      buffer_.push_back(std::move(*cut));
    }
    if (buffer_.empty()) return std::nullopt;
    std::size_t slot = buffer_.size() == 1
                           ? 0
                           : static_cast<std::size_t>(rng_.below(buffer_.size()));
    Cut out = std::move(buffer_[slot]);
    buffer_[slot] = std::move(buffer_.back());
    buffer_.pop_back();
    return out;
  }

 private:
  std::unique_ptr<CutStream> in_;
  std::size_t size_;
  Rng rng_;
  std::vector<Cut> buffer_;
};

class MuxStream : public CutStream {
 public:
  MuxStream(std::vector<std::unique_ptr<CutStream>> streams,
            std::vector<double> weights, std::uint64_t seed)
      : streams_(std::move(streams)), weights_(std::move(weights)), rng_(seed) {
    exhausted_.assign(streams_.size(), false);
  }
  std::optional<Cut> next() override {
    for (;;) {
      double total = 0.0;
      for (std::size_t i = 0; i < streams_.size(); ++i) {
        if (!exhausted_[i]) total += weights_[i];
      }
      if (total <= 0.0) {
        // Only zero-weight sources left; drain them in order.
        for (std::size_t i = 0; i < streams_.size(); ++i) {
          if (exhausted_[i]) continue;
          auto cut = streams_[i]->next();
          if (cut) return cut;
          exhausted_[i] = true;
        }
        return std::nullopt;
      }
      double pick = rng_.uniform() * total;
      std::size_t chosen = 0;
      for (std::size_t i = 0; i < streams_.size(); ++i) {
        if (exhausted_[i]) continue;
        if (pick < weights_[i]) {
          chosen = i;
          break;
        }
        pick -= weights_[i];
        chosen = i;
      }
      auto cut = streams_[chosen]->next();
      if (cut) return cut;
      exhausted_[chosen] = true;
    }
  }

 private:
  std::vector<std::unique_ptr<CutStream>> streams_;
  std::vector<double> weights_;
  Rng rng_;
  std::vector<bool> exhausted_;
};

// Drops every supervision except the given id, recursively.
Cut retain_supervision(const Cut& c, const std::string& sup_id) {
  if (auto* m = c.as_mono()) {
    MonoCut out = *m;
    std::erase_if(out.supervisions,
                  [&](const SupervisionSegment& s) { return s.id != sup_id; });
    return out;
  }
  if (c.is_padding()) return c;
  const MixedCut& mc = *c.as_mixed();
  MixedCut out;
  out.id = mc.id;
  for (const auto& tr : mc.tracks) {
    MixTrack t = tr;
    t.cut = retain_supervision(tr.cut, sup_id);
    out.tracks.push_back(std::move(t));
  }
  return out;
}

// Deterministic rename: derived sets must yield identical ids on every
// replay, so the monotonic ids from truncate are replaced.
Cut with_id(const Cut& c, std::string id) {
  if (auto* m = c.as_mono()) {
    MonoCut out = *m;
    out.id = std::move(id);
    return out;
  }
  if (auto* p = c.as_padding()) {
    PaddingCut out = *p;
    out.id = std::move(id);
    return out;
  }
  MixedCut out = *c.as_mixed();
  out.id = std::move(id);
  return out;
}

}  // namespace

CutSet::CutSet() {
  auto impl = std::make_shared<Impl>();
  auto cuts = std::make_shared<const std::vector<Cut>>();
  impl->eager = cuts;
  impl->factory = [cuts] { return std::make_unique<VectorStream>(cuts); };
  impl_ = std::move(impl);
}

CutSet CutSet::from_cuts(std::vector<Cut> cuts) {
  auto impl = std::make_shared<Impl>();
  auto shared = std::make_shared<const std::vector<Cut>>(std::move(cuts));
  impl->eager = shared;
  impl->factory = [shared] { return std::make_unique<VectorStream>(shared); };
  CutSet cs;
  cs.impl_ = std::move(impl);
  return cs;
}

CutSet CutSet::from_file(const std::string& path) {
  auto impl = std::make_shared<Impl>();
  impl->factory = [path] { return std::make_unique<FileStream>(path); };
  CutSet cs;
  cs.impl_ = std::move(impl);
  return cs;
}

CutSet CutSet::from_factory(CutStreamFactory factory) {
  auto impl = std::make_shared<Impl>();
  impl->factory = std::move(factory);
  CutSet cs;
  cs.impl_ = std::move(impl);
  return cs;
}

CutSet CutSet::from_manifests(
    const std::vector<Recording>& recordings,
    const std::vector<SupervisionSegment>& supervisions) {
  ValidationReport report = validate(recordings, supervisions);
  if (!report.ok()) {
    throw ValidationFailure("manifests do not validate:\n" + report.to_string());
  }
  std::vector<Cut> cuts;
  for (const auto& r : recordings) {
    auto rc = cuts_from_recording(r, supervisions);
    cuts.insert(cuts.end(), rc.begin(), rc.end());
  }
  return from_cuts(std::move(cuts));
}

bool CutSet::is_lazy() const { return impl_->eager == nullptr; }

std::unique_ptr<CutStream> CutSet::stream() const { return impl_->factory(); }

std::vector<Cut> CutSet::to_vector() const {
  if (impl_->eager) return *impl_->eager;
  std::vector<Cut> out;
  auto s = stream();
  while (auto cut = s->next()) out.push_back(std::move(*cut));
  return out;
}

CutSet CutSet::materialize() const {
  if (!is_lazy()) return *this;
  return from_cuts(to_vector());
}

std::size_t CutSet::size() const {
  if (impl_->eager) return impl_->eager->size();
  std::size_t n = 0;
  auto s = stream();
  while (s->next()) ++n;
  return n;
}

const Cut& CutSet::at(std::size_t i) const {
  if (!impl_->eager) {
    throw ArgumentError("lazy CutSet has no random element access");
  }
  return impl_->eager->at(i);
}

CutSet CutSet::trim_to_supervisions() const {
  auto base = impl_->factory;
  return from_factory([base] {
    return std::make_unique<FlatMapStream>(base(), [](const Cut& c) {
      std::vector<Cut> out;
      for (const auto& s : c.supervisions()) {
        Cut t = c.truncate(s.start, s.duration, true);
        out.push_back(with_id(retain_supervision(t, s.id), s.id));
      }
      return out;
    });
  });
}

CutSet CutSet::cut_into_windows(double window, double hop,
                                bool keep_overlapping) const {
  if (window <= 0) throw ArgumentError("window must be > 0");
  if (hop <= 0 || hop > window) {
    throw ArgumentError("hop must satisfy 0 < hop <= window");
  }
  auto base = impl_->factory;
  return from_factory([base, window, hop, keep_overlapping] {
    return std::make_unique<FlatMapStream>(
        base(), [window, hop, keep_overlapping](const Cut& c) {
          std::vector<Cut> out;
          double total = c.duration();
          for (double o = 0.0; o < total;
               o = static_cast<double>(out.size()) * hop) {
            out.push_back(with_id(
                c.truncate(o, std::min(window, total - o), keep_overlapping),
                c.id() + "-w" + std::to_string(out.size())));
          }
          return out;
        });
  });
}

CutSet CutSet::filter(std::function<bool(const Cut&)> pred) const {
  auto base = impl_->factory;
  return from_factory([base, pred] {
    return std::make_unique<FlatMapStream>(base(), [pred](const Cut& c) {
      std::vector<Cut> out;
      if (pred(c)) out.push_back(c);
      return out;
    });
  });
}

CutSet CutSet::subset_first(std::size_t n) const {
  auto base = impl_->factory;
  return from_factory(
      [base, n] { return std::make_unique<TakeStream>(base(), n); });
}

CutSet CutSet::subset_last(std::size_t n) const {
  auto cuts = to_vector();
  if (cuts.size() > n) cuts.erase(cuts.begin(), cuts.end() - n);
  return from_cuts(std::move(cuts));
}

CutSet CutSet::subset_ids(const std::vector<std::string>& ids) const {
  std::unordered_map<std::string, Cut> by_id;
  auto s = stream();
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  while (auto cut = s->next()) {
    if (wanted.count(cut->id())) by_id.emplace(cut->id(), std::move(*cut));
  }
  std::vector<Cut> out;
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      missing.push_back(id);
    } else {
      out.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    std::string msg = "ids not found:";
    for (const auto& id : missing) msg += " " + id;
    throw ArgumentError(msg);
  }
  return from_cuts(std::move(out));
}

std::vector<CutSet> CutSet::split(
    std::size_t num_parts, std::optional<std::uint64_t> shuffle_seed) const {
  if (num_parts == 0) throw ArgumentError("num_parts must be > 0");
  auto cuts = to_vector();
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    for (std::size_t i = cuts.size(); i > 1; --i) {
      std::swap(cuts[i - 1], cuts[static_cast<std::size_t>(rng.below(i))]);
    }
  }
  std::size_t n = cuts.size();
  std::size_t base_size = n / num_parts;
  std::size_t remainder = n % num_parts;
  std::vector<CutSet> parts;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < num_parts; ++p) {
    std::size_t sz = base_size + (p < remainder ? 1 : 0);
    parts.push_back(from_cuts(std::vector<Cut>(
        cuts.begin() + static_cast<std::ptrdiff_t>(pos),
        cuts.begin() + static_cast<std::ptrdiff_t>(pos + sz))));
    pos += sz;
  }
  return parts;
}

CutSet CutSet::repeat(std::optional<std::size_t> times) const {
  auto base = impl_->factory;
  return from_factory(
      [base, times] { return std::make_unique<RepeatStream>(base, times); });
}

CutSet CutSet::combine(std::vector<CutSet> sets) {
  std::vector<CutStreamFactory> factories;
  for (const auto& cs : sets) factories.push_back(cs.impl_->factory);
  return from_factory([factories] {
    return std::make_unique<ConcatStream>(factories);
  });
}

CutSet CutSet::shuffle(std::uint64_t seed) const {
  auto cuts = to_vector();
  Rng rng(seed);
  for (std::size_t i = cuts.size(); i > 1; --i) {
    std::swap(cuts[i - 1], cuts[static_cast<std::size_t>(rng.below(i))]);
  }
  return from_cuts(std::move(cuts));
}

CutSet CutSet::lazy_shuffle(std::size_t buffer_size, std::uint64_t seed) const {
  auto base = impl_->factory;
  return from_factory([base, buffer_size, seed] {
    return std::make_unique<BufferShuffleStream>(base(), buffer_size, seed);
  });
}

CutSet CutSet::mux(std::vector<CutSet> sets, std::vector<double> weights,
                   std::uint64_t seed) {
  if (sets.empty()) throw ArgumentError("mux: no sources");
  if (weights.size() != sets.size()) {
    throw ArgumentError("mux: weights/sources size mismatch");
  }
  for (double w : weights) {
    if (w < 0) throw ArgumentError("mux: negative weight");
  }
  std::vector<CutStreamFactory> factories;
  for (const auto& cs : sets) factories.push_back(cs.impl_->factory);
  return from_factory([factories, weights, seed] {
    std::vector<std::unique_ptr<CutStream>> streams;
    for (const auto& f : factories) streams.push_back(f());
    return std::make_unique<MuxStream>(std::move(streams), weights, seed);
  });
}

CutSetStats CutSet::describe(bool per_speaker) const {
  CutSetStats stats;
  std::set<std::string> speakers;
  std::map<std::string, double> speaker_totals;
  std::map<std::size_t, std::size_t> histogram;
  auto s = stream();
  while (auto cut = s->next()) {
    ++stats.num_cuts;
    double d = cut->duration();
    stats.total_duration += d;
    histogram[static_cast<std::size_t>(std::floor(d))]++;
    double cut_speech = 0.0;
    for (const auto& sup : cut->supervisions()) {
      cut_speech += sup.duration;
      if (sup.speaker) {
        speakers.insert(*sup.speaker);
        if (per_speaker) speaker_totals[*sup.speaker] += sup.duration;
      }
    }
    stats.speech_duration += cut_speech;
    if (cut_speech > d + kTimeTolerance) stats.speech_overlap = true;
  }
  stats.num_speakers = speakers.size();
  for (const auto& [bin, count] : histogram) {
    stats.duration_histogram.emplace_back(static_cast<double>(bin) + 1.0, count);
  }
  for (const auto& [spk, total] : speaker_totals) {
    stats.per_speaker.emplace_back(spk, total);
  }
  return stats;
}

std::string CutSetStats::to_string() const {
  std::ostringstream os;
  os << "cuts: " << num_cuts << "\n";
  os << "total duration: " << total_duration << " s\n";
  os << "speech duration: " << speech_duration << " s"
     << (speech_overlap ? " (overlapping supervisions present)" : "") << "\n";
  os << "speakers: " << num_speakers << "\n";
  if (!duration_histogram.empty()) {
    os << "duration histogram (1 s bins):\n";
    for (const auto& [upper, count] : duration_histogram) {
      os << "  <= " << upper << " s: " << count << "\n";
    }
  }
  for (const auto& [spk, total] : per_speaker) {
    os << "  speaker " << spk << ": " << total << " s\n";
  }
  return os.str();
}

std::size_t CutSet::to_file(const std::string& path,
                            std::optional<bool> compress) const {
  LineSink sink(path, compress.value_or(path_looks_gzip(path)));
  std::size_t n = 0;
  auto s = stream();
  while (auto cut = s->next()) {
    sink.write_line(dump_canonical(cut->to_json()));
    ++n;
  }
  sink.close();
  return n;
}

}  // namespace cutkit
