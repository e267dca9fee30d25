#include "cutkit/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace cutkit::kernels {

namespace {
#ifdef CUTKIT_HAVE_OPENMP
std::atomic<bool> g_parallel{true};
#else
std::atomic<bool> g_parallel{false};
#endif

// Below this size the fork/join overhead dominates.
constexpr std::size_t kParallelThreshold = 1 << 14;

inline bool use_parallel(std::size_t n) {
  return g_parallel.load(std::memory_order_relaxed) && n >= kParallelThreshold;
}

inline float interp_at(const float* src, std::size_t n_in, double pos) {
  if (n_in == 0) return 0.0f;
  if (pos <= 0.0) return src[0];
  auto lo = static_cast<std::size_t>(pos);
  if (lo >= n_in - 1) return src[n_in - 1];
  double frac = pos - static_cast<double>(lo);
  return static_cast<float>(src[lo] + (src[lo + 1] - src[lo]) * frac);
}

inline float frame_log_energy(const float* samples, std::size_t frame_length,
                              float floor_value) {
  double acc = 0.0;
  for (std::size_t k = 0; k < frame_length; ++k) {
    acc += static_cast<double>(samples[k]) * samples[k];
  }
  double mean = frame_length ? acc / static_cast<double>(frame_length) : 0.0;
  float floor_energy = std::exp(floor_value);
  return std::log(std::max(mean, static_cast<double>(floor_energy)));
}

inline std::int16_t to_pcm16(float v) {
  float scaled = v * 32768.0f;
  if (scaled >= 32767.0f) return 32767;
  if (scaled <= -32768.0f) return -32768;
  return static_cast<std::int16_t>(std::lrintf(scaled));
}
}  // namespace

void set_parallel_enabled(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

// ---- serial reference ----

namespace serial {

void scale(float* data, std::size_t n, float gain) {
  for (std::size_t i = 0; i < n; ++i) data[i] *= gain;
}

void scale_add(float* dst, const float* src, std::size_t n, float gain) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += gain * src[i];
}

void resample_linear(float* dst, std::size_t n_out, const float* src,
                     std::size_t n_in, double step) {
  for (std::size_t i = 0; i < n_out; ++i) {
    dst[i] = interp_at(src, n_in, static_cast<double>(i) * step);
  }
}

void log_energy_frames(float* out, std::size_t n_frames, const float* samples,
                       std::size_t frame_length, std::size_t frame_shift,
                       float floor_value) {
  for (std::size_t f = 0; f < n_frames; ++f) {
    out[f] = frame_log_energy(samples + f * frame_shift, frame_length,
                              floor_value);
  }
}

void pcm16_to_float(float* dst, const std::int16_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = static_cast<float>(src[i]) / 32768.0f;
  }
}

void float_to_pcm16(std::int16_t* dst, const float* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = to_pcm16(src[i]);
}

}  // namespace serial

// ---- OpenMP variants ----

namespace parallel {

void scale(float* data, std::size_t n, float gain) {
#pragma omp parallel for
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    data[i] *= gain;
  }
}

void scale_add(float* dst, const float* src, std::size_t n, float gain) {
#pragma omp parallel for
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    dst[i] += gain * src[i];
  }
}

void resample_linear(float* dst, std::size_t n_out, const float* src,
                     std::size_t n_in, double step) {
#pragma omp parallel for
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_out); ++i) {
    dst[i] = interp_at(src, n_in, static_cast<double>(i) * step);
  }
}

void log_energy_frames(float* out, std::size_t n_frames, const float* samples,
                       std::size_t frame_length, std::size_t frame_shift,
                       float floor_value) {
#pragma omp parallel for
  for (std::int64_t f = 0; f < static_cast<std::int64_t>(n_frames); ++f) {
    out[f] = frame_log_energy(samples + f * frame_shift, frame_length,
                              floor_value);
  }
}

void pcm16_to_float(float* dst, const std::int16_t* src, std::size_t n) {
#pragma omp parallel for
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    dst[i] = static_cast<float>(src[i]) / 32768.0f;
  }
}

void float_to_pcm16(std::int16_t* dst, const float* src, std::size_t n) {
#pragma omp parallel for
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    dst[i] = to_pcm16(src[i]);
  }
}

}  // namespace parallel

// ---- dispatchers ----

void scale(float* data, std::size_t n, float gain) {
  use_parallel(n) ? parallel::scale(data, n, gain) : serial::scale(data, n, gain);
}

void scale_add(float* dst, const float* src, std::size_t n, float gain) {
  use_parallel(n) ? parallel::scale_add(dst, src, n, gain)
                  : serial::scale_add(dst, src, n, gain);
}

void resample_linear(float* dst, std::size_t n_out, const float* src,
                     std::size_t n_in, double step) {
  use_parallel(n_out) ? parallel::resample_linear(dst, n_out, src, n_in, step)
                      : serial::resample_linear(dst, n_out, src, n_in, step);
}

void log_energy_frames(float* out, std::size_t n_frames, const float* samples,
                       std::size_t frame_length, std::size_t frame_shift,
                       float floor_value) {
  use_parallel(n_frames)
      ? parallel::log_energy_frames(out, n_frames, samples, frame_length,
                                    frame_shift, floor_value)
      : serial::log_energy_frames(out, n_frames, samples, frame_length,
                                  frame_shift, floor_value);
}

void pcm16_to_float(float* dst, const std::int16_t* src, std::size_t n) {
  use_parallel(n) ? parallel::pcm16_to_float(dst, src, n)
                  : serial::pcm16_to_float(dst, src, n);
}

void float_to_pcm16(std::int16_t* dst, const float* src, std::size_t n) {
  use_parallel(n) ? parallel::float_to_pcm16(dst, src, n)
                  : serial::float_to_pcm16(dst, src, n);
}

double mean_square(const float* data, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(data[i]) * data[i];
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

}  // namespace cutkit::kernels
