#include "cutkit/audio.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cutkit/errors.hpp"
#include "cutkit/kernels.hpp"

namespace cutkit {

namespace {

std::atomic<std::uint64_t> g_audio_bytes{0};

struct ByteStream {
  std::ifstream file;
  std::istringstream mem;
  std::istream* in = nullptr;

  explicit ByteStream(const AudioSource& source) {
    switch (source.kind) {
      case SourceKind::File:
        file.open(source.location, std::ios::binary);
        if (!file) throw IoError("cannot open audio file: " + source.location);
        in = &file;
        break;
      case SourceKind::Memory:
        mem.str(source.location);
        in = &mem;
        break;
      case SourceKind::Command:
        throw UnsupportedSource(
            "command audio sources cannot be loaded: " + source.location);
    }
  }

  void seek(std::uint64_t pos) {
    in->clear();
    in->seekg(static_cast<std::streamoff>(pos));
    if (!*in) throw DecodeError("seek failed");
  }

  void read_exact(void* dst, std::size_t n, const char* what) {
    in->read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (in->gcount() != static_cast<std::streamsize>(n)) {
      throw DecodeError(std::string("truncated read in chunk ") + what);
    }
  }

  bool try_read(void* dst, std::size_t n) {
    in->read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    return in->gcount() == static_cast<std::streamsize>(n);
  }
};

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (p[1] << 8) | (p[2] << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

struct WavLayout {
  WavHeaderInfo info;
  std::uint64_t data_offset = 0;  // absolute byte offset of sample data
  std::uint64_t data_size = 0;
};

WavLayout parse_layout(ByteStream& bs) {
  unsigned char hdr[12];
  bs.read_exact(hdr, 12, "RIFF");
  if (std::memcmp(hdr, "RIFF", 4) != 0) throw DecodeError("not a RIFF file");
  if (std::memcmp(hdr + 8, "WAVE", 4) != 0) {
    throw DecodeError("RIFF form is not WAVE");
  }

  WavLayout layout;
  bool have_fmt = false;
  std::uint64_t pos = 12;
  for (;;) {
    unsigned char chdr[8];
    bs.seek(pos);
    if (!bs.try_read(chdr, 8)) break;
    char name[5] = {0};
    std::memcpy(name, chdr, 4);
    std::uint32_t size = le32(chdr + 4);
    if (std::memcmp(name, "fmt ", 4) == 0) {
      if (size < 16) throw DecodeError("fmt chunk too short");
      unsigned char fmt[16];
      bs.read_exact(fmt, 16, "fmt ");
      std::uint16_t tag = le16(fmt);
      std::uint16_t channels = le16(fmt + 2);
      std::uint32_t rate = le32(fmt + 4);
      std::uint16_t bits = le16(fmt + 14);
      if (tag == 1 && bits == 16) {
        layout.info.sample_format = SampleFormat::PcmInt16;
      } else if (tag == 3 && bits == 32) {
        layout.info.sample_format = SampleFormat::IeeeFloat32;
      } else {
        throw DecodeError("unsupported format in chunk fmt : tag " +
                          std::to_string(tag) + ", " + std::to_string(bits) +
                          " bits");
      }
      if (channels == 0 || rate == 0) throw DecodeError("bad fmt chunk");
      layout.info.num_channels = channels;
      layout.info.sampling_rate = static_cast<int>(rate);
      layout.info.bits_per_sample = bits;
      have_fmt = true;
    } else if (std::memcmp(name, "data", 4) == 0) {
      layout.data_offset = pos + 8;
      layout.data_size = size;
    }
    pos += 8 + size + (size & 1);  // chunks are 2-byte aligned
  }
  if (!have_fmt) throw DecodeError("missing chunk fmt ");
  if (layout.data_offset == 0) throw DecodeError("missing chunk data");
  std::size_t frame_bytes =
      static_cast<std::size_t>(layout.info.num_channels) *
      (layout.info.bits_per_sample / 8);
  layout.info.num_frames =
      static_cast<std::int64_t>(layout.data_size / frame_bytes);
  return layout;
}

}  // namespace

std::uint64_t audio_bytes_read() { return g_audio_bytes.load(); }
void reset_audio_bytes_read() { g_audio_bytes.store(0); }

WavHeaderInfo read_wav_header(const AudioSource& source) {
  ByteStream bs(source);
  return parse_layout(bs).info;
}

SampleBlock read_wav_frames(const AudioSource& source, std::int64_t begin_frame,
                            std::int64_t num_frames,
                            const std::optional<std::vector<int>>& channels) {
  ByteStream bs(source);
  WavLayout layout = parse_layout(bs);
  const auto& info = layout.info;

  if (begin_frame < 0) throw RangeError("negative read offset");
  if (begin_frame > info.num_frames) {
    throw RangeError("read offset beyond end of audio");
  }
  std::int64_t want = num_frames;
  if (begin_frame + want > info.num_frames) {
    want = info.num_frames - begin_frame;  // caller clips within tolerance
  }

  std::vector<int> chans;
  if (channels) {
    chans = *channels;
    for (int c : chans) {
      if (c < 0 || c >= info.num_channels) {
        throw RangeError("channel " + std::to_string(c) + " out of range");
      }
    }
  } else {
    for (int c = 0; c < info.num_channels; ++c) chans.push_back(c);
  }

  std::size_t sample_bytes = info.bits_per_sample / 8;
  std::size_t frame_bytes = info.num_channels * sample_bytes;
  std::vector<char> raw(static_cast<std::size_t>(want) * frame_bytes);
  if (want > 0) {
    bs.seek(layout.data_offset +
            static_cast<std::uint64_t>(begin_frame) * frame_bytes);
    bs.read_exact(raw.data(), raw.size(), "data");
    g_audio_bytes.fetch_add(raw.size(), std::memory_order_relaxed);
  }

  SampleBlock out =
      SampleBlock::zeros(info.sampling_rate, chans.size(),
                         static_cast<std::size_t>(want));
  // De-interleave the requested channels.
  if (info.sample_format == SampleFormat::PcmInt16) {
    const auto* samples = reinterpret_cast<const std::int16_t*>(raw.data());
    for (std::size_t ci = 0; ci < chans.size(); ++ci) {
      float* dst = out.channel(ci);
      int c = chans[ci];
      for (std::int64_t i = 0; i < want; ++i) {
        dst[i] = static_cast<float>(samples[i * info.num_channels + c]) /
                 32768.0f;
      }
    }
  } else {
    const auto* samples = reinterpret_cast<const float*>(raw.data());
    for (std::size_t ci = 0; ci < chans.size(); ++ci) {
      float* dst = out.channel(ci);
      int c = chans[ci];
      for (std::int64_t i = 0; i < want; ++i) {
        dst[i] = samples[i * info.num_channels + c];
      }
    }
  }
  return out;
}

SampleBlock read_wav(const AudioSource& source, double offset,
                     std::optional<double> duration,
                     const std::optional<std::vector<int>>& channels) {
  ByteStream bs(source);
  WavLayout layout = parse_layout(bs);
  const auto& info = layout.info;
  double file_duration =
      static_cast<double>(info.num_frames) / info.sampling_rate;
  if (offset < 0) throw RangeError("negative offset");
  if (offset > file_duration + kTimeTolerance) {
    throw RangeError("offset beyond end of audio");
  }
  std::int64_t begin = std::llround(offset * info.sampling_rate);
  begin = std::min(begin, info.num_frames);
  std::int64_t want;
  if (duration) {
    want = std::llround((offset + *duration) * info.sampling_rate) - begin;
    if (begin + want > info.num_frames) {
      double over = offset + *duration - file_duration;
      if (over > kTimeTolerance) {
        throw RangeError("requested range extends past end of audio");
      }
      want = info.num_frames - begin;
    }
  } else {
    want = info.num_frames - begin;
  }
  return read_wav_frames(source, begin, want, channels);
}

std::string write_wav_bytes(const SampleBlock& block) {
  if (block.num_channels == 0) throw ArgumentError("empty sample block");
  std::size_t n = block.num_frames * block.num_channels;
  std::vector<float> interleaved(n);
  for (std::size_t ch = 0; ch < block.num_channels; ++ch) {
    const float* src = block.channel(ch);
    for (std::size_t i = 0; i < block.num_frames; ++i) {
      interleaved[i * block.num_channels + ch] = src[i];
    }
  }
  std::vector<std::int16_t> pcm(n);
  kernels::float_to_pcm16(pcm.data(), interleaved.data(), n);

  std::uint32_t data_size = static_cast<std::uint32_t>(n * 2);
  std::string out;
  out.reserve(44 + data_size);
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
  };
  auto put16 = [&](std::uint16_t v) {
    out += static_cast<char>(v & 0xff);
    out += static_cast<char>((v >> 8) & 0xff);
  };
  out += "RIFF";
  put32(36 + data_size);
  out += "WAVE";
  out += "fmt ";
  put32(16);
  put16(1);  // PCM
  put16(static_cast<std::uint16_t>(block.num_channels));
  put32(static_cast<std::uint32_t>(block.sampling_rate));
  put32(static_cast<std::uint32_t>(block.sampling_rate) *
        static_cast<std::uint32_t>(block.num_channels) * 2);
  put16(static_cast<std::uint16_t>(block.num_channels * 2));
  put16(16);
  out += "data";
  put32(data_size);
  out.append(reinterpret_cast<const char*>(pcm.data()), data_size);
  return out;
}

std::uint64_t write_wav(const SampleBlock& block, const std::string& path) {
  std::string bytes = write_wav_bytes(block);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
  return bytes.size();
}

SampleBlock mix_samples(const SampleBlock& reference, const SampleBlock& added,
                        double offset, std::optional<double> snr_db) {
  if (reference.sampling_rate != added.sampling_rate) {
    throw ArgumentError("mix: sampling rate mismatch");
  }
  if (reference.num_channels != added.num_channels) {
    throw ArgumentError("mix: channel count mismatch");
  }
  if (offset < 0) throw ArgumentError("mix: negative offset");

  float gain = 1.0f;
  if (snr_db) {
    double e_ref = kernels::mean_square(reference.data.data(),
                                        reference.data.size());
    double e_add = kernels::mean_square(added.data.data(), added.data.size());
    if (e_add == 0.0) {
      throw SilentMixError("cannot satisfy an SNR against silence");
    }
    gain = static_cast<float>(
        std::sqrt(e_ref / (e_add * std::pow(10.0, *snr_db / 10.0))));
  }

  auto off_frames = static_cast<std::size_t>(
      std::llround(offset * reference.sampling_rate));
  std::size_t out_frames =
      std::max(reference.num_frames, off_frames + added.num_frames);
  SampleBlock out = SampleBlock::zeros(reference.sampling_rate,
                                       reference.num_channels, out_frames);
  for (std::size_t ch = 0; ch < out.num_channels; ++ch) {
    float* dst = out.channel(ch);
    std::copy_n(reference.channel(ch), reference.num_frames, dst);
    kernels::scale_add(dst + off_frames, added.channel(ch), added.num_frames,
                       gain);
  }
  return out;
}

SampleBlock stretch_to_length(const SampleBlock& block, std::size_t n_out,
                              int out_rate) {
  SampleBlock out = SampleBlock::zeros(
      out_rate ? out_rate : block.sampling_rate, block.num_channels, n_out);
  if (n_out == 0) return out;
  double step = n_out > 0
                    ? static_cast<double>(block.num_frames) /
                          static_cast<double>(n_out)
                    : 0.0;
  for (std::size_t ch = 0; ch < block.num_channels; ++ch) {
    kernels::resample_linear(out.channel(ch), n_out, block.channel(ch),
                             block.num_frames, step);
  }
  return out;
}

SampleBlock resample_samples(const SampleBlock& block, int target_rate) {
  if (target_rate <= 0) throw ArgumentError("target rate must be positive");
  if (target_rate == block.sampling_rate) return block;
  auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(block.num_frames) * target_rate /
                   block.sampling_rate));
  SampleBlock out =
      SampleBlock::zeros(target_rate, block.num_channels, n_out);
  double step = static_cast<double>(block.sampling_rate) / target_rate;
  for (std::size_t ch = 0; ch < block.num_channels; ++ch) {
    kernels::resample_linear(out.channel(ch), n_out, block.channel(ch),
                             block.num_frames, step);
  }
  return out;
}

}  // namespace cutkit
