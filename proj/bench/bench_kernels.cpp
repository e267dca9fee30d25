#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "cutkit/kernels.hpp"

namespace {

std::vector<float> random_samples(std::size_t n) {
  std::mt19937 gen(42);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> out(n);
  for (auto& v : out) v = dist(gen);
  return out;
}

template <bool kParallel>
void BM_Scale(benchmark::State& state) {
  auto data = random_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (kParallel) {
      cutkit::kernels::parallel::scale(data.data(), data.size(), 1.0001f);
    } else {
      cutkit::kernels::serial::scale(data.data(), data.size(), 1.0001f);
    }
    benchmark::DoNotOptimize(data.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool kParallel>
void BM_ScaleAdd(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto dst = random_samples(n);
  auto src = random_samples(n);
  for (auto _ : state) {
    if constexpr (kParallel) {
      cutkit::kernels::parallel::scale_add(dst.data(), src.data(), n, 0.5f);
    } else {
      cutkit::kernels::serial::scale_add(dst.data(), src.data(), n, 0.5f);
    }
    benchmark::DoNotOptimize(dst.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool kParallel>
void BM_ResampleLinear(benchmark::State& state) {
  auto n_in = static_cast<std::size_t>(state.range(0));
  auto src = random_samples(n_in);
  std::size_t n_out = n_in * 3 / 2;
  std::vector<float> dst(n_out);
  double step = static_cast<double>(n_in) / static_cast<double>(n_out);
  for (auto _ : state) {
    if constexpr (kParallel) {
      cutkit::kernels::parallel::resample_linear(dst.data(), n_out, src.data(),
                                                 n_in, step);
    } else {
      cutkit::kernels::serial::resample_linear(dst.data(), n_out, src.data(),
                                               n_in, step);
    }
    benchmark::DoNotOptimize(dst.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool kParallel>
void BM_LogEnergyFrames(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto src = random_samples(n);
  std::size_t frame_length = 400, frame_shift = 160;
  std::size_t n_frames = n < frame_length ? 0 : (n - frame_length) / frame_shift + 1;
  std::vector<float> out(n_frames);
  for (auto _ : state) {
    if constexpr (kParallel) {
      cutkit::kernels::parallel::log_energy_frames(
          out.data(), n_frames, src.data(), frame_length, frame_shift, -23.0f);
    } else {
      cutkit::kernels::serial::log_energy_frames(
          out.data(), n_frames, src.data(), frame_length, frame_shift, -23.0f);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Scale<false>)->Range(1 << 12, 1 << 22);
BENCHMARK(BM_Scale<true>)->Range(1 << 12, 1 << 22);
BENCHMARK(BM_ScaleAdd<false>)->Range(1 << 12, 1 << 22);
BENCHMARK(BM_ScaleAdd<true>)->Range(1 << 12, 1 << 22);
BENCHMARK(BM_ResampleLinear<false>)->Range(1 << 12, 1 << 22);
BENCHMARK(BM_ResampleLinear<true>)->Range(1 << 12, 1 << 22);
BENCHMARK(BM_LogEnergyFrames<false>)->Range(1 << 14, 1 << 22);
BENCHMARK(BM_LogEnergyFrames<true>)->Range(1 << 14, 1 << 22);

BENCHMARK_MAIN();
