#include "cutkit/cut.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <variant>

#include "cutkit/errors.hpp"
#include "cutkit/kernels.hpp"

namespace cutkit {

namespace {
std::atomic<std::size_t> g_live_cuts{0};
}

std::size_t live_cut_count() { return g_live_cuts.load(); }

struct Cut::CutData {
  std::variant<MonoCut, PaddingCut, MixedCut> v;

  template <class T>
  explicit CutData(T&& value) : v(std::forward<T>(value)) {
    g_live_cuts.fetch_add(1, std::memory_order_relaxed);
  }
  ~CutData() { g_live_cuts.fetch_sub(1, std::memory_order_relaxed); }
  CutData(const CutData&) = delete;
  CutData& operator=(const CutData&) = delete;
};

Cut::Cut(MonoCut c) : data_(std::make_shared<CutData>(std::move(c))) {}
Cut::Cut(PaddingCut c) : data_(std::make_shared<CutData>(std::move(c))) {}
Cut::Cut(MixedCut c) : data_(std::make_shared<CutData>(std::move(c))) {}

bool Cut::is_mono() const {
  return data_ && std::holds_alternative<MonoCut>(data_->v);
}
bool Cut::is_padding() const {
  return data_ && std::holds_alternative<PaddingCut>(data_->v);
}
bool Cut::is_mixed() const {
  return data_ && std::holds_alternative<MixedCut>(data_->v);
}
const MonoCut* Cut::as_mono() const {
  return data_ ? std::get_if<MonoCut>(&data_->v) : nullptr;
}
const PaddingCut* Cut::as_padding() const {
  return data_ ? std::get_if<PaddingCut>(&data_->v) : nullptr;
}
const MixedCut* Cut::as_mixed() const {
  return data_ ? std::get_if<MixedCut>(&data_->v) : nullptr;
}

// ---- mono transform folding ----

namespace {

struct MonoState {
  std::int64_t ns = 0;
  int rate = 0;
};

MonoState fold_transforms(const MonoCut& m, std::size_t upto) {
  MonoState st{m.rec_num_frames, m.recording.sampling_rate};
  for (std::size_t i = 0; i < upto; ++i) {
    const Transform& t = m.transforms[i];
    switch (t.kind) {
      case Transform::Kind::Speed:
      case Transform::Kind::Tempo:
        st.ns = std::llround(static_cast<double>(st.ns) / t.factor);
        break;
      case Transform::Kind::Resample:
        st.ns = std::llround(static_cast<double>(st.ns) * t.target_rate /
                             st.rate);
        st.rate = t.target_rate;
        break;
      case Transform::Kind::Volume:
        break;
      case Transform::Kind::Window:
        st.ns = t.num_frames;
        break;
    }
  }
  return st;
}

MonoState mono_state(const MonoCut& m) {
  return fold_transforms(m, m.transforms.size());
}

std::string format_factor(double f) {
  std::string s = std::to_string(f);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

// Reads [lo, hi) frames of the recording-domain base window, zero-filled
// where the request runs past the recording.
std::vector<float> load_mono_base(const MonoCut& m, std::int64_t lo,
                                  std::int64_t hi) {
  std::int64_t want = hi - lo;
  std::vector<float> out(static_cast<std::size_t>(std::max<std::int64_t>(want, 0)),
                         0.0f);
  if (want <= 0) return out;

  const AudioSource* source = nullptr;
  int channel_index = 0;
  for (const auto& s : m.recording.sources) {
    auto it = std::find(s.channel_ids.begin(), s.channel_ids.end(), m.channel);
    if (it != s.channel_ids.end()) {
      source = &s;
      channel_index = static_cast<int>(it - s.channel_ids.begin());
      break;
    }
  }
  if (!source) {
    throw MaterializationError("cut " + m.id + ": channel " +
                               std::to_string(m.channel) +
                               " not found in recording sources");
  }

  std::int64_t begin = m.rec_start_frame + lo;
  std::int64_t end = begin + want;
  std::int64_t lead = 0;
  if (begin < 0) {
    lead = -begin;
    begin = 0;
  }
  if (end <= begin) return out;
  SampleBlock block;
  try {
    block = read_wav_frames(*source, begin, end - begin, {{channel_index}});
  } catch (const RangeError&) {
    return out;  // entirely past the end; tolerance zone is silence
  }
  std::copy_n(block.channel(0),
              std::min<std::int64_t>(block.num_frames, want - lead),
              out.data() + lead);
  return out;
}

// Demand-pulls [lo, hi) of the stream after transform index k (k == -1
// is the base window), so only the needed bytes are read.
std::vector<float> load_mono_range(const MonoCut& m, std::ptrdiff_t k,
                                   std::int64_t lo, std::int64_t hi) {
  if (k < 0) return load_mono_base(m, lo, hi);
  const Transform& t = m.transforms[static_cast<std::size_t>(k)];
  std::int64_t want = hi - lo;
  switch (t.kind) {
    case Transform::Kind::Volume: {
      auto out = load_mono_range(m, k - 1, lo, hi);
      kernels::scale(out.data(), out.size(), static_cast<float>(t.factor));
      return out;
    }
    case Transform::Kind::Window: {
      std::int64_t n_in = fold_transforms(m, static_cast<std::size_t>(k)).ns;
      std::vector<float> out(static_cast<std::size_t>(want), 0.0f);
      std::int64_t in_lo = t.offset_frames + lo;
      std::int64_t in_hi = std::min(t.offset_frames + hi, n_in);
      if (in_hi > in_lo) {
        auto sub = load_mono_range(m, k - 1, in_lo, in_hi);
        std::copy(sub.begin(), sub.end(), out.begin());
      }
      return out;
    }
    case Transform::Kind::Speed:
    case Transform::Kind::Tempo:
    case Transform::Kind::Resample: {
      std::int64_t n_in = fold_transforms(m, static_cast<std::size_t>(k)).ns;
      std::int64_t n_out = fold_transforms(m, static_cast<std::size_t>(k) + 1).ns;
      std::vector<float> out(static_cast<std::size_t>(want), 0.0f);
      if (n_out == 0 || n_in == 0 || want <= 0) return out;
      double step = static_cast<double>(n_in) / static_cast<double>(n_out);
      auto in_lo = static_cast<std::int64_t>(std::floor(lo * step));
      auto in_hi = std::min<std::int64_t>(
          n_in, static_cast<std::int64_t>(std::floor((hi - 1) * step)) + 2);
      in_lo = std::clamp<std::int64_t>(in_lo, 0, n_in);
      auto sub = load_mono_range(m, k - 1, in_lo, in_hi);
      std::int64_t n_sub = in_hi - in_lo;
      for (std::int64_t i = 0; i < want; ++i) {
        double pos = (lo + i) * step - static_cast<double>(in_lo);
        if (pos <= 0.0) {
          out[i] = sub.empty() ? 0.0f : sub.front();
          continue;
        }
        auto idx = static_cast<std::int64_t>(pos);
        if (idx >= n_sub - 1) {
          out[i] = sub.empty() ? 0.0f : sub.back();
          continue;
        }
        double frac = pos - static_cast<double>(idx);
        out[i] = static_cast<float>(sub[idx] + (sub[idx + 1] - sub[idx]) * frac);
      }
      return out;
    }
  }
  return {};
}

struct MixedLayout {
  int rate = 0;
  std::vector<std::int64_t> off_frames;
  std::vector<std::int64_t> len_frames;
  std::int64_t total = 0;
};

MixedLayout mixed_layout(const MixedCut& mc) {
  MixedLayout layout;
  layout.rate = mc.tracks.front().cut.sampling_rate();
  for (const auto& tr : mc.tracks) {
    std::int64_t tns = tr.cut.num_samples();
    int trate = tr.cut.sampling_rate();
    std::int64_t len =
        trate == layout.rate
            ? tns
            : std::llround(static_cast<double>(tns) * layout.rate / trate);
    std::int64_t off = std::llround(tr.offset * layout.rate);
    layout.off_frames.push_back(off);
    layout.len_frames.push_back(len);
    layout.total = std::max(layout.total, off + len);
  }
  return layout;
}

}  // namespace

const std::string& Cut::id() const {
  if (auto* m = as_mono()) return m->id;
  if (auto* p = as_padding()) return p->id;
  return as_mixed()->id;
}

int Cut::sampling_rate() const {
  if (auto* m = as_mono()) return mono_state(*m).rate;
  if (auto* p = as_padding()) return p->sampling_rate;
  return as_mixed()->tracks.front().cut.sampling_rate();
}

std::int64_t Cut::num_samples() const {
  if (auto* m = as_mono()) return mono_state(*m).ns;
  if (auto* p = as_padding()) return p->num_samples;
  return mixed_layout(*as_mixed()).total;
}

double Cut::duration() const {
  return static_cast<double>(num_samples()) / sampling_rate();
}

std::vector<SupervisionSegment> Cut::supervisions() const {
  if (auto* m = as_mono()) return m->supervisions;
  if (is_padding()) return {};
  std::vector<SupervisionSegment> out;
  for (const auto& tr : as_mixed()->tracks) {
    for (auto s : tr.cut.supervisions()) {
      s.start += tr.offset;
      out.push_back(std::move(s));
    }
  }
  return out;
}

// ---- truncate ----

namespace {

std::vector<SupervisionSegment> shift_supervisions(
    const std::vector<SupervisionSegment>& sups, double offset,
    double window_duration, bool keep_overlapping) {
  std::vector<SupervisionSegment> out;
  for (auto s : sups) {
    s.start -= offset;
    bool keep;
    if (keep_overlapping) {
      keep = s.start < window_duration && s.start + s.duration > 0;
    } else {
      keep = s.start >= -kTimeTolerance &&
             s.start + s.duration <= window_duration + kTimeTolerance;
    }
    if (keep) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Cut Cut::truncate(double offset, double duration, bool keep_overlapping) const {
  if (offset < 0 || duration < 0) {
    throw RangeError("truncate: negative offset or duration");
  }
  if (offset + duration > this->duration() + kTimeTolerance) {
    throw RangeError("truncate: window extends past the cut end");
  }

  if (auto* p = as_padding()) {
    PaddingCut out = *p;
    out.id = next_id(p->id + "-trunc");
    out.num_samples = std::llround(duration * p->sampling_rate);
    return out;
  }

  if (auto* m = as_mono()) {
    MonoState st = mono_state(*m);
    std::int64_t o_f = std::llround(offset * st.rate);
    std::int64_t d_f = std::llround(duration * st.rate);
    MonoCut out = *m;
    out.id = next_id(m->id + "-trunc");
    if (m->transforms.empty()) {
      out.rec_start_frame += o_f;
      out.rec_num_frames = d_f;
    } else {
      out.transforms.push_back(Transform{.kind = Transform::Kind::Window,
                                         .offset_frames = o_f,
                                         .num_frames = d_f});
    }
    out.supervisions = shift_supervisions(
        m->supervisions, static_cast<double>(o_f) / st.rate,
        static_cast<double>(d_f) / st.rate, keep_overlapping);
    out.features.reset();  // feature window no longer matches
    return out;
  }

  const MixedCut& mc = *as_mixed();
  MixedLayout layout = mixed_layout(mc);
  std::int64_t o_f = std::llround(offset * layout.rate);
  std::int64_t d_f = std::llround(duration * layout.rate);
  std::vector<MixTrack> tracks;
  std::int64_t extent = 0;
  for (std::size_t i = 0; i < mc.tracks.size(); ++i) {
    std::int64_t t_lo = layout.off_frames[i];
    std::int64_t t_hi = t_lo + layout.len_frames[i];
    std::int64_t lo = std::max(t_lo, o_f);
    std::int64_t hi = std::min(t_hi, o_f + d_f);
    if (hi <= lo) continue;
    MixTrack tr;
    if (lo == t_lo && hi == t_hi) {
      tr.cut = mc.tracks[i].cut;
    } else {
      tr.cut = mc.tracks[i].cut.truncate(
          static_cast<double>(lo - t_lo) / layout.rate,
          static_cast<double>(hi - lo) / layout.rate, keep_overlapping);
    }
    tr.offset = static_cast<double>(lo - o_f) / layout.rate;
    tr.snr_db = mc.tracks[i].snr_db;
    extent = std::max(extent, (lo - o_f) + tr.cut.num_samples());
    tracks.push_back(std::move(tr));
  }
  // The first track's gain is absolute; a relative SNR with no reference
  // left is meaningless.
  if (!tracks.empty()) tracks.front().snr_db.reset();

  if (tracks.empty()) {
    return PaddingCut{next_id(mc.id + "-trunc"), layout.rate, d_f};
  }
  if (extent < d_f) {
    MixTrack padtr;
    padtr.cut = PaddingCut{next_id(mc.id + "-padfill"), layout.rate,
                           d_f - extent};
    padtr.offset = static_cast<double>(extent) / layout.rate;
    tracks.push_back(std::move(padtr));
  }
  if (tracks.size() == 1) {
    if (tracks.front().offset == 0.0) return tracks.front().cut;
    MixTrack lead;
    lead.cut = PaddingCut{
        next_id(mc.id + "-padfill"), layout.rate,
        std::llround(tracks.front().offset * layout.rate)};
    lead.offset = 0.0;
    tracks.insert(tracks.begin(), std::move(lead));
  }
  return MixedCut{next_id(mc.id + "-trunc"), std::move(tracks)};
}

// ---- pad ----

namespace {

// Flat track view of any cut (mixed cuts splice their tracks).
std::vector<MixTrack> flat_tracks(const Cut& c, double shift,
                                  std::optional<double> snr) {
  std::vector<MixTrack> out;
  if (auto* mc = c.as_mixed()) {
    for (const auto& tr : mc->tracks) {
      MixTrack t = tr;
      t.offset += shift;
      out.push_back(std::move(t));
    }
    if (snr && !out.empty() && !out.front().snr_db) out.front().snr_db = snr;
  } else {
    out.push_back(MixTrack{c, shift, snr});
  }
  return out;
}

}  // namespace

Cut Cut::pad(double target_duration, PadDirection direction) const {
  int rate = sampling_rate();
  std::int64_t ns = num_samples();
  std::int64_t tgt = std::llround(target_duration * rate);
  if (tgt <= ns) {
    if (target_duration < duration() - kTimeTolerance) {
      throw RangeError("pad: target shorter than the cut");
    }
    return *this;
  }
  std::int64_t padn = tgt - ns;
  std::int64_t left = 0;
  std::int64_t right = padn;
  if (direction == PadDirection::Left) {
    left = padn;
    right = 0;
  } else if (direction == PadDirection::Both) {
    left = padn / 2;  // odd sample goes right
    right = padn - left;
  }

  std::vector<MixTrack> tracks;
  if (left > 0) {
    tracks.push_back(MixTrack{
        PaddingCut{next_id(id() + "-padl"), rate, left}, 0.0, std::nullopt});
  }
  auto body = flat_tracks(*this, static_cast<double>(left) / rate, std::nullopt);
  tracks.insert(tracks.end(), body.begin(), body.end());
  if (right > 0) {
    tracks.push_back(MixTrack{PaddingCut{next_id(id() + "-padr"), rate, right},
                              static_cast<double>(left + ns) / rate,
                              std::nullopt});
  }
  return MixedCut{next_id(id() + "-pad"), std::move(tracks)};
}

Cut Cut::mix(const Cut& other, double offset,
             std::optional<double> snr_db) const {
  if (offset < 0) throw ArgumentError("mix: negative offset");
  auto tracks = flat_tracks(*this, 0.0, std::nullopt);
  auto added = flat_tracks(other, offset, snr_db);
  tracks.insert(tracks.end(), added.begin(), added.end());
  return MixedCut{next_id(id() + "-mix"), std::move(tracks)};
}

Cut Cut::append(const Cut& other, double gap) const {
  if (gap < 0) throw ArgumentError("append: negative gap");
  return mix(other, duration() + gap);
}

// ---- perturbations ----

namespace {

Cut perturb_time(const Cut& c, double factor, Transform::Kind kind,
                 const char* suffix) {
  if (factor == 1.0) return c;
  if (auto* p = c.as_padding()) {
    PaddingCut out = *p;
    out.id = p->id + suffix + format_factor(factor);
    out.num_samples =
        std::llround(static_cast<double>(p->num_samples) / factor);
    return out;
  }
  if (auto* m = c.as_mono()) {
    MonoCut out = *m;
    out.id = m->id + suffix + format_factor(factor);
    out.transforms.push_back(Transform{.kind = kind, .factor = factor});
    for (auto& s : out.supervisions) {
      s.start /= factor;
      s.duration /= factor;
    }
    out.features.reset();
    return out;
  }
  const MixedCut& mc = *c.as_mixed();
  MixedCut out;
  out.id = mc.id + suffix + format_factor(factor);
  for (const auto& tr : mc.tracks) {
    MixTrack t;
    t.cut = perturb_time(tr.cut, factor, kind, suffix);
    t.offset = tr.offset / factor;
    t.snr_db = tr.snr_db;
    out.tracks.push_back(std::move(t));
  }
  return out;
}

}  // namespace

Cut Cut::perturb_speed(double factor) const {
  if (factor <= 0) throw ArgumentError("speed factor must be positive");
  return perturb_time(*this, factor, Transform::Kind::Speed, "-sp");
}

Cut Cut::perturb_tempo(double factor) const {
  if (factor <= 0) throw ArgumentError("tempo factor must be positive");
  return perturb_time(*this, factor, Transform::Kind::Tempo, "-tp");
}

Cut Cut::perturb_volume(double factor) const {
  if (auto* p = as_padding()) {
    (void)p;
    return *this;  // silence stays silence
  }
  if (auto* m = as_mono()) {
    MonoCut out = *m;
    out.id = m->id + "-vp" + format_factor(factor);
    out.transforms.push_back(
        Transform{.kind = Transform::Kind::Volume, .factor = factor});
    return out;
  }
  const MixedCut& mc = *as_mixed();
  MixedCut out;
  out.id = mc.id + "-vp" + format_factor(factor);
  for (const auto& tr : mc.tracks) {
    MixTrack t = tr;
    t.cut = tr.cut.perturb_volume(factor);
    out.tracks.push_back(std::move(t));
  }
  return out;
}

Cut Cut::resample(int target_rate) const {
  if (target_rate <= 0) throw ArgumentError("target rate must be positive");
  if (target_rate == sampling_rate()) return *this;
  if (auto* p = as_padding()) {
    PaddingCut out = *p;
    out.id = p->id + "-rs" + std::to_string(target_rate);
    out.num_samples = std::llround(static_cast<double>(p->num_samples) *
                                   target_rate / p->sampling_rate);
    out.sampling_rate = target_rate;
    return out;
  }
  if (auto* m = as_mono()) {
    MonoCut out = *m;
    out.id = m->id + "-rs" + std::to_string(target_rate);
    out.transforms.push_back(
        Transform{.kind = Transform::Kind::Resample, .target_rate = target_rate});
    out.features.reset();
    return out;
  }
  const MixedCut& mc = *as_mixed();
  MixedCut out;
  out.id = mc.id + "-rs" + std::to_string(target_rate);
  for (const auto& tr : mc.tracks) {
    MixTrack t = tr;
    t.cut = tr.cut.resample(target_rate);
    out.tracks.push_back(std::move(t));
  }
  return out;
}

// ---- materialization ----

SampleBlock Cut::load_audio() const {
  if (auto* p = as_padding()) {
    return SampleBlock::zeros(p->sampling_rate, 1,
                              static_cast<std::size_t>(p->num_samples));
  }
  if (auto* m = as_mono()) {
    MonoState st = mono_state(*m);
    SampleBlock out = SampleBlock::zeros(st.rate, 1,
                                         static_cast<std::size_t>(st.ns));
    auto samples = load_mono_range(
        *m, static_cast<std::ptrdiff_t>(m->transforms.size()) - 1, 0, st.ns);
    std::copy(samples.begin(), samples.end(), out.channel(0));
    return out;
  }

  const MixedCut& mc = *as_mixed();
  MixedLayout layout = mixed_layout(mc);
  SampleBlock acc = SampleBlock::zeros(layout.rate, 1,
                                       static_cast<std::size_t>(layout.total));
  // Extent of non-padding content accumulated so far; the reference
  // energy for SNR scaling is measured over it.
  std::int64_t ext_lo = layout.total;
  std::int64_t ext_hi = 0;
  for (std::size_t i = 0; i < mc.tracks.size(); ++i) {
    const MixTrack& tr = mc.tracks[i];
    if (tr.cut.is_padding()) continue;  // contributes only zeros
    SampleBlock block = tr.cut.load_audio();
    if (block.sampling_rate != layout.rate ||
        static_cast<std::int64_t>(block.num_frames) != layout.len_frames[i]) {
      if (block.num_frames == 0) {
        throw MaterializationError("mixed cut " + mc.id + ": track " +
                                   std::to_string(i) + " is empty");
      }
      block = stretch_to_length(
          block, static_cast<std::size_t>(layout.len_frames[i]), layout.rate);
    }
    float gain = 1.0f;
    if (tr.snr_db) {
      double e_ref = 0.0;
      if (ext_hi > ext_lo) {
        e_ref = kernels::mean_square(acc.channel(0) + ext_lo,
                                     static_cast<std::size_t>(ext_hi - ext_lo));
      }
      double e_add = kernels::mean_square(block.channel(0), block.num_frames);
      if (e_add == 0.0) {
        throw SilentMixError("mixed cut " + mc.id + ": track " +
                             std::to_string(i) +
                             " is silent but has an SNR set");
      }
      gain = static_cast<float>(
          std::sqrt(e_ref / (e_add * std::pow(10.0, *tr.snr_db / 10.0))));
    }
    kernels::scale_add(acc.channel(0) + layout.off_frames[i], block.channel(0),
                       block.num_frames, gain);
    ext_lo = std::min(ext_lo, layout.off_frames[i]);
    ext_hi = std::max(ext_hi, layout.off_frames[i] + layout.len_frames[i]);
  }
  return acc;
}

// ---- JSON ----

namespace {

nlohmann::json transform_to_json(const Transform& t) {
  nlohmann::json j;
  switch (t.kind) {
    case Transform::Kind::Speed:
      j["kind"] = "speed";
      j["factor"] = t.factor;
      break;
    case Transform::Kind::Tempo:
      j["kind"] = "tempo";
      j["factor"] = t.factor;
      break;
    case Transform::Kind::Volume:
      j["kind"] = "volume";
      j["factor"] = t.factor;
      break;
    case Transform::Kind::Resample:
      j["kind"] = "resample";
      j["target_rate"] = t.target_rate;
      break;
    case Transform::Kind::Window:
      j["kind"] = "window";
      j["offset_frames"] = t.offset_frames;
      j["num_frames"] = t.num_frames;
      break;
  }
  return j;
}

Transform transform_from_json(const nlohmann::json& j) {
  Transform t;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "speed") {
    t.kind = Transform::Kind::Speed;
    t.factor = j.at("factor").get<double>();
  } else if (kind == "tempo") {
    t.kind = Transform::Kind::Tempo;
    t.factor = j.at("factor").get<double>();
  } else if (kind == "volume") {
    t.kind = Transform::Kind::Volume;
    t.factor = j.at("factor").get<double>();
  } else if (kind == "resample") {
    t.kind = Transform::Kind::Resample;
    t.target_rate = j.at("target_rate").get<int>();
  } else if (kind == "window") {
    t.kind = Transform::Kind::Window;
    t.offset_frames = j.at("offset_frames").get<std::int64_t>();
    t.num_frames = j.at("num_frames").get<std::int64_t>();
  } else {
    throw ParseError("unknown transform kind \"" + kind + "\"");
  }
  return t;
}

}  // namespace

nlohmann::json Cut::to_json() const {
  nlohmann::json j;
  if (auto* m = as_mono()) {
    j["type"] = "mono";
    j["id"] = m->id;
    j["channel"] = m->channel;
    int rate0 = m->recording.sampling_rate;
    j["start"] = static_cast<double>(m->rec_start_frame) / rate0;
    j["duration"] = static_cast<double>(m->rec_num_frames) / rate0;
    j["recording"] = cutkit::to_json(m->recording);
    auto sups = nlohmann::json::array();
    for (const auto& s : m->supervisions) sups.push_back(cutkit::to_json(s));
    j["supervisions"] = std::move(sups);
    if (!m->transforms.empty()) {
      auto ts = nlohmann::json::array();
      for (const auto& t : m->transforms) ts.push_back(transform_to_json(t));
      j["transforms"] = std::move(ts);
    }
    if (m->features) j["features"] = cutkit::to_json(*m->features);
  } else if (auto* p = as_padding()) {
    j["type"] = "padding";
    j["id"] = p->id;
    j["sampling_rate"] = p->sampling_rate;
    j["num_samples"] = p->num_samples;
    j["duration"] = p->duration();
    j["feat_value"] = p->feat_value;
  } else {
    const MixedCut& mc = *as_mixed();
    j["type"] = "mixed";
    j["id"] = mc.id;
    auto tracks = nlohmann::json::array();
    for (const auto& tr : mc.tracks) {
      nlohmann::json tj;
      tj["cut"] = tr.cut.to_json();
      tj["offset"] = tr.offset;
      if (tr.snr_db) tj["snr_db"] = *tr.snr_db;
      tracks.push_back(std::move(tj));
    }
    j["tracks"] = std::move(tracks);
  }
  return j;
}

Cut cut_from_json(const nlohmann::json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "mono") {
    MonoCut m;
    m.id = j.at("id").get<std::string>();
    m.channel = j.at("channel").get<int>();
    m.recording = recording_from_json(j.at("recording"));
    int rate0 = m.recording.sampling_rate;
    m.rec_start_frame = std::llround(j.at("start").get<double>() * rate0);
    m.rec_num_frames = std::llround(j.at("duration").get<double>() * rate0);
    for (const auto& sj : j.at("supervisions")) {
      m.supervisions.push_back(supervision_from_json(sj, true));
    }
    if (auto it = j.find("transforms"); it != j.end()) {
      for (const auto& tj : *it) m.transforms.push_back(transform_from_json(tj));
    }
    if (auto it = j.find("features"); it != j.end()) {
      m.features = features_from_json(*it);
    }
    return m;
  }
  if (type == "padding") {
    PaddingCut p;
    p.id = j.at("id").get<std::string>();
    p.sampling_rate = j.at("sampling_rate").get<int>();
    p.num_samples = j.at("num_samples").get<std::int64_t>();
    p.feat_value = j.at("feat_value").get<double>();
    return p;
  }
  if (type == "mixed") {
    MixedCut mc;
    mc.id = j.at("id").get<std::string>();
    for (const auto& tj : j.at("tracks")) {
      MixTrack tr;
      tr.cut = cut_from_json(tj.at("cut"));
      tr.offset = tj.at("offset").get<double>();
      if (auto it = tj.find("snr_db"); it != tj.end()) {
        tr.snr_db = it->get<double>();
      }
      mc.tracks.push_back(std::move(tr));
    }
    if (mc.tracks.size() < 2) {
      throw ParseError("mixed cut " + mc.id + " has fewer than 2 tracks");
    }
    return mc;
  }
  throw ParseError("unknown cut type \"" + type + "\"");
}

std::vector<Cut> cuts_from_recording(
    const Recording& recording,
    const std::vector<SupervisionSegment>& supervisions) {
  std::vector<Cut> out;
  for (int channel : recording.channel_ids) {
    MonoCut m;
    m.id = recording.channel_ids.size() == 1
               ? recording.id
               : recording.id + "-" + std::to_string(channel);
    m.recording = recording;
    m.channel = channel;
    m.rec_start_frame = 0;
    m.rec_num_frames = recording.num_samples;
    for (const auto& s : supervisions) {
      if (s.recording_id == recording.id && s.channel == channel) {
        m.supervisions.push_back(s);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace cutkit
