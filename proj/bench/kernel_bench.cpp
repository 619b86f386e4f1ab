// Copyright 2026 The emonet-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parallel vs reference kernels on shapes taken from the full model with a
// batch of 8 five-second clips (64 x 311 log-mel input).
#include <benchmark/benchmark.h>

#include <vector>

#include "emonet/kernels.hpp"
#include "emonet/random.hpp"

namespace k = emonet::kernels;

namespace {

std::vector<float> random_buffer(std::size_t n, std::uint64_t seed) {
  emonet::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(emonet::standard_normal(rng));
  return v;
}

// stem, first conv of each stack (stride 2), and a deep 3x3 conv
k::ConvGeometry layer(int index) {
  switch (index) {
    case 0: return {8, 64, 311, 1, 32, 3, 1};
    case 1: return {8, 64, 311, 32, 64, 3, 2};
    case 2: return {8, 32, 156, 64, 128, 3, 2};
    case 3: return {8, 16, 78, 128, 256, 3, 2};
    default: return {8, 8, 39, 256, 256, 3, 1};
  }
}

template <bool Parallel>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_buffer(n * n, 1);
  const auto b = random_buffer(n * n, 2);
  std::vector<float> c(n * n, 0.0f);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::gemm_nn(n, n, n, a.data(), b.data(), c.data());
    } else {
      k::reference::gemm_nn(n, n, n, a.data(), b.data(), c.data());
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * n * n * n, benchmark::Counter::kIsIterationInvariantRate,
                                                 benchmark::Counter::kIs1000);
}

template <bool Parallel>
void BM_conv_forward(benchmark::State& state) {
  const k::ConvGeometry g = layer(static_cast<int>(state.range(0)));
  const auto x = random_buffer(g.batch * g.height * g.width * g.in_channels, 3);
  const auto w = random_buffer(g.patch() * g.out_channels, 4);
  std::vector<float> y(g.batch * g.out_height() * g.out_width() * g.out_channels);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::conv2d_forward(g, x.data(), w.data(), y.data());
    } else {
      k::reference::conv2d_forward(g, x.data(), w.data(), y.data());
    }
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_conv_backward(benchmark::State& state) {
  const k::ConvGeometry g = layer(static_cast<int>(state.range(0)));
  const auto x = random_buffer(g.batch * g.height * g.width * g.in_channels, 5);
  const auto w = random_buffer(g.patch() * g.out_channels, 6);
  const auto dy = random_buffer(g.batch * g.out_height() * g.out_width() * g.out_channels, 7);
  std::vector<float> dx(x.size());
  std::vector<float> dw(w.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::conv2d_backward(g, x.data(), w.data(), dy.data(), dx.data(), dw.data());
    } else {
      k::reference::conv2d_backward(g, x.data(), w.data(), dy.data(), dx.data(), dw.data());
    }
    benchmark::DoNotOptimize(dw.data());
  }
}

}  // namespace

BENCHMARK(BM_gemm<true>)->Name("gemm/parallel")->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm<false>)->Name("gemm/reference")->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_forward<true>)->Name("conv_forward/parallel")->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_forward<false>)->Name("conv_forward/reference")->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_backward<true>)->Name("conv_backward/parallel")->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_backward<false>)->Name("conv_backward/reference")->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
