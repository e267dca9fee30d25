#pragma once

#include <cstddef>
#include <cstdint>

// Sample-level inner loops. Each kernel has a serial reference
// implementation and an OpenMP variant; the dispatchers at namespace
// scope pick one at runtime. Both variants compute identical results
// bit-for-bit (no reordered reductions), so tests compare them exactly.

namespace cutkit::kernels {

// Runtime switch; defaults to parallel when built with OpenMP.
void set_parallel_enabled(bool enabled);
bool parallel_enabled();

namespace serial {
void scale(float* data, std::size_t n, float gain);
void scale_add(float* dst, const float* src, std::size_t n, float gain);
void resample_linear(float* dst, std::size_t n_out, const float* src,
                     std::size_t n_in, double step);
void log_energy_frames(float* out, std::size_t n_frames, const float* samples,
                       std::size_t frame_length, std::size_t frame_shift,
                       float floor_value);
void pcm16_to_float(float* dst, const std::int16_t* src, std::size_t n);
void float_to_pcm16(std::int16_t* dst, const float* src, std::size_t n);
}  // namespace serial

namespace parallel {
void scale(float* data, std::size_t n, float gain);
void scale_add(float* dst, const float* src, std::size_t n, float gain);
void resample_linear(float* dst, std::size_t n_out, const float* src,
                     std::size_t n_in, double step);
void log_energy_frames(float* out, std::size_t n_frames, const float* samples,
                       std::size_t frame_length, std::size_t frame_shift,
                       float floor_value);
void pcm16_to_float(float* dst, const std::int16_t* src, std::size_t n);
void float_to_pcm16(std::int16_t* dst, const float* src, std::size_t n);
}  // namespace parallel

void scale(float* data, std::size_t n, float gain);
void scale_add(float* dst, const float* src, std::size_t n, float gain);
void resample_linear(float* dst, std::size_t n_out, const float* src,
                     std::size_t n_in, double step);
void log_energy_frames(float* out, std::size_t n_frames, const float* samples,
                       std::size_t frame_length, std::size_t frame_shift,
                       float floor_value);
void pcm16_to_float(float* dst, const std::int16_t* src, std::size_t n);
void float_to_pcm16(std::int16_t* dst, const float* src, std::size_t n);

// Mean squared amplitude, accumulated in double in index order (serial
// on purpose: a parallel reduction would not be bit-stable).
double mean_square(const float* data, std::size_t n);

}  // namespace cutkit::kernels
