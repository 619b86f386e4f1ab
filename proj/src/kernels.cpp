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

#include "emonet/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

namespace emonet::kernels {

int thread_count() { return omp_get_max_threads(); }

void configure_threads_from_env() {
  if (const char* env = std::getenv("EMONET_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelThreshold = 1U << 15;

template <typename T>
constexpr std::size_t kRowTile = 6;
template <typename T>
constexpr std::size_t kColTile = 64 / sizeof(T);

// Every path computes c += (sum_p a_ip * b_pj) with the inner sum started at
// zero and taken in p order, so full tiles and edge tiles round identically.
template <typename T>
inline void tile_full(std::size_t n, std::size_t k, const T* __restrict a,
                      const T* __restrict b, T* __restrict c) {
  constexpr std::size_t MR = kRowTile<T>;
  constexpr std::size_t NR = kColTile<T>;
  T acc[MR][NR] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const T* brow = b + p * n;
    T av[MR];
    for (std::size_t r = 0; r < MR; ++r) av[r] = a[r * k + p];
    for (std::size_t r = 0; r < MR; ++r) {
#pragma omp simd
      for (std::size_t j = 0; j < NR; ++j) acc[r][j] += av[r] * brow[j];
    }
  }
  for (std::size_t r = 0; r < MR; ++r) {
    for (std::size_t j = 0; j < NR; ++j) c[r * n + j] += acc[r][j];
  }
}

template <typename T>
inline void tile_edge(std::size_t mr, std::size_t nr, std::size_t n, std::size_t k,
                      const T* __restrict a, const T* __restrict b, T* __restrict c) {
  constexpr std::size_t MR = kRowTile<T>;
  constexpr std::size_t NR = kColTile<T>;
  T acc[MR][NR] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const T* brow = b + p * n;
    for (std::size_t r = 0; r < mr; ++r) {
      const T av = a[r * k + p];
      for (std::size_t j = 0; j < nr; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < mr; ++r) {
    for (std::size_t j = 0; j < nr; ++j) c[r * n + j] += acc[r][j];
  }
}

template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* src, T* dst) {
  constexpr std::size_t B = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += B) {
    for (std::size_t j0 = 0; j0 < cols; j0 += B) {
      const std::size_t i1 = std::min(rows, i0 + B);
      const std::size_t j1 = std::min(cols, j0 + B);
      for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
      }
    }
  }
}

template <typename T>
std::vector<T>& scratch(int slot) {
  thread_local std::vector<T> buffers[4];
  return buffers[slot];
}

// col[(ho * Wo + wo), (ky * k + kx) * Cin + ci] for one batch item.
template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* col) {
  const std::size_t ho_n = g.out_height();
  const std::size_t wo_n = g.out_width();
  const std::size_t cin = g.in_channels;
  const auto pad = static_cast<std::ptrdiff_t>(g.pad());
  const std::size_t patch = g.patch();
#pragma omp parallel for schedule(static) if (ho_n * wo_n * patch > kParallelThreshold)
  for (std::ptrdiff_t ho = 0; ho < static_cast<std::ptrdiff_t>(ho_n); ++ho) {
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      T* dst = col + (static_cast<std::size_t>(ho) * wo_n + wo) * patch;
      for (std::size_t ky = 0; ky < g.kernel; ++ky) {
        const std::ptrdiff_t h = ho * static_cast<std::ptrdiff_t>(g.stride) +
                                 static_cast<std::ptrdiff_t>(ky) - pad;
        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
          const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(wo * g.stride + kx) - pad;
          T* d = dst + (ky * g.kernel + kx) * cin;
          if (h < 0 || w < 0 || h >= static_cast<std::ptrdiff_t>(g.height) ||
              w >= static_cast<std::ptrdiff_t>(g.width)) {
            std::fill(d, d + cin, T{0});
          } else {
            const T* s = x + (static_cast<std::size_t>(h) * g.width + static_cast<std::size_t>(w)) * cin;
            std::copy(s, s + cin, d);
          }
        }
      }
    }
  }
}

// Gather form of col2im: every input cell sums the patch entries that read it,
// so rows can be processed in parallel without write conflicts.
template <typename T>
void col2im(const ConvGeometry& g, const T* col, T* dx) {
  const std::size_t wo_n = g.out_width();
  const std::size_t ho_n = g.out_height();
  const std::size_t cin = g.in_channels;
  const std::size_t pad = g.pad();
  const std::size_t patch = g.patch();
#pragma omp parallel for schedule(static) if (g.height * g.width * patch > kParallelThreshold)
  for (std::ptrdiff_t hi = 0; hi < static_cast<std::ptrdiff_t>(g.height); ++hi) {
    const auto h = static_cast<std::size_t>(hi);
    for (std::size_t w = 0; w < g.width; ++w) {
      T* d = dx + (h * g.width + w) * cin;
      std::fill(d, d + cin, T{0});
      for (std::size_t ky = 0; ky < g.kernel; ++ky) {
        const std::size_t hp = h + pad;
        if (hp < ky || (hp - ky) % g.stride != 0) continue;
        const std::size_t ho = (hp - ky) / g.stride;
        if (ho >= ho_n) continue;
        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
          const std::size_t wp = w + pad;
          if (wp < kx || (wp - kx) % g.stride != 0) continue;
          const std::size_t wo = (wp - kx) / g.stride;
          if (wo >= wo_n) continue;
          const T* s = col + (ho * wo_n + wo) * patch + (ky * g.kernel + kx) * cin;
          for (std::size_t c = 0; c < cin; ++c) d[c] += s[c];
        }
      }
    }
  }
}

}  // namespace

namespace parallel {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  constexpr std::size_t MR = kRowTile<T>;
  constexpr std::size_t NR = kColTile<T>;
  if (m == 0 || n == 0 || k == 0) return;
  const auto row_blocks = static_cast<std::ptrdiff_t>((m + MR - 1) / MR);
#pragma omp parallel for schedule(static) if (m * n * k > kParallelThreshold)
  for (std::ptrdiff_t rb = 0; rb < row_blocks; ++rb) {
    const std::size_t i0 = static_cast<std::size_t>(rb) * MR;
    const std::size_t mr = std::min(MR, m - i0);
    for (std::size_t j0 = 0; j0 < n; j0 += NR) {
      const std::size_t nr = std::min(NR, n - j0);
      if (mr == MR && nr == NR) {
        tile_full(n, k, a + i0 * k, b + j0, c + i0 * n + j0);
      } else {
        tile_edge(mr, nr, n, k, a + i0 * k, b + j0, c + i0 * n + j0);
      }
    }
  }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  auto& at = scratch<T>(0);
  at.resize(m * k);
  transpose(k, m, a, at.data());
  gemm_nn(m, n, k, at.data(), b, c);
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  auto& bt = scratch<T>(1);
  bt.resize(k * n);
  transpose(n, k, b, bt.data());
  gemm_nn(m, n, k, a, bt.data(), c);
}

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, T* y) {
  const std::size_t in_item = g.height * g.width * g.in_channels;
  const std::size_t positions = g.out_height() * g.out_width();
  const std::size_t out_item = positions * g.out_channels;
  std::fill(y, y + g.batch * out_item, T{0});
  const bool direct = g.kernel == 1 && g.stride == 1;
  auto& col = scratch<T>(2);
  if (!direct) col.resize(positions * g.patch());
  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* xb = x + b * in_item;
    if (!direct) {
      im2col(g, xb, col.data());
      xb = col.data();
    }
    gemm_nn(positions, g.out_channels, g.patch(), xb, w, y + b * out_item);
  }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw) {
  const std::size_t in_item = g.height * g.width * g.in_channels;
  const std::size_t positions = g.out_height() * g.out_width();
  const std::size_t out_item = positions * g.out_channels;
  const std::size_t patch = g.patch();
  const bool direct = g.kernel == 1 && g.stride == 1;
  auto& col = scratch<T>(2);
  if (dw != nullptr) {
    if (!direct) col.resize(positions * patch);
    for (std::size_t b = 0; b < g.batch; ++b) {
      const T* xb = x + b * in_item;
      if (!direct) {
        im2col(g, xb, col.data());
        xb = col.data();
      }
      gemm_tn(patch, g.out_channels, positions, xb, dy + b * out_item, dw);
    }
  }
  if (dx != nullptr) {
    auto& wt = scratch<T>(3);
    wt.resize(patch * g.out_channels);
    transpose(patch, g.out_channels, w, wt.data());
    if (direct) {
      std::fill(dx, dx + g.batch * in_item, T{0});
      for (std::size_t b = 0; b < g.batch; ++b) {
        gemm_nn(positions, patch, g.out_channels, dy + b * out_item, wt.data(), dx + b * in_item);
      }
      return;
    }
    col.resize(positions * patch);
    for (std::size_t b = 0; b < g.batch; ++b) {
      std::fill(col.begin(), col.end(), T{0});
      gemm_nn(positions, patch, g.out_channels, dy + b * out_item, wt.data(), col.data());
      col2im(g, col.data(), dx + b * in_item);
    }
  }
}

}  // namespace parallel

namespace reference {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] += s;
    }
  }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] += s;
    }
  }
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] += s;
    }
  }
}

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, T* y) {
  const auto pad = static_cast<std::ptrdiff_t>(g.pad());
  const std::size_t ho_n = g.out_height();
  const std::size_t wo_n = g.out_width();
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t ho = 0; ho < ho_n; ++ho) {
      for (std::size_t wo = 0; wo < wo_n; ++wo) {
        for (std::size_t co = 0; co < g.out_channels; ++co) {
          T s = 0;
          for (std::size_t ky = 0; ky < g.kernel; ++ky) {
            for (std::size_t kx = 0; kx < g.kernel; ++kx) {
              const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(ho * g.stride + ky) - pad;
              const std::ptrdiff_t wi = static_cast<std::ptrdiff_t>(wo * g.stride + kx) - pad;
              if (h < 0 || wi < 0 || h >= static_cast<std::ptrdiff_t>(g.height) ||
                  wi >= static_cast<std::ptrdiff_t>(g.width)) {
                continue;
              }
              for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                const T xv = x[((b * g.height + static_cast<std::size_t>(h)) * g.width +
                                static_cast<std::size_t>(wi)) *
                                   g.in_channels +
                               ci];
                const T wv = w[((ky * g.kernel + kx) * g.in_channels + ci) * g.out_channels + co];
                s += xv * wv;
              }
            }
          }
          y[((b * ho_n + ho) * wo_n + wo) * g.out_channels + co] = s;
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw) {
  const auto pad = static_cast<std::ptrdiff_t>(g.pad());
  const std::size_t ho_n = g.out_height();
  const std::size_t wo_n = g.out_width();
  if (dx != nullptr) std::fill(dx, dx + g.batch * g.height * g.width * g.in_channels, T{0});
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t ho = 0; ho < ho_n; ++ho) {
      for (std::size_t wo = 0; wo < wo_n; ++wo) {
        for (std::size_t co = 0; co < g.out_channels; ++co) {
          const T d = dy[((b * ho_n + ho) * wo_n + wo) * g.out_channels + co];
          for (std::size_t ky = 0; ky < g.kernel; ++ky) {
            for (std::size_t kx = 0; kx < g.kernel; ++kx) {
              const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(ho * g.stride + ky) - pad;
              const std::ptrdiff_t wi = static_cast<std::ptrdiff_t>(wo * g.stride + kx) - pad;
              if (h < 0 || wi < 0 || h >= static_cast<std::ptrdiff_t>(g.height) ||
                  wi >= static_cast<std::ptrdiff_t>(g.width)) {
                continue;
              }
              for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                const std::size_t xi = ((b * g.height + static_cast<std::size_t>(h)) * g.width +
                                        static_cast<std::size_t>(wi)) *
                                           g.in_channels +
                                       ci;
                const std::size_t wi_idx =
                    ((ky * g.kernel + kx) * g.in_channels + ci) * g.out_channels + co;
                if (dx != nullptr) dx[xi] += d * w[wi_idx];
                if (dw != nullptr) dw[wi_idx] += d * x[xi];
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace reference

#define EMONET_INSTANTIATE_KERNELS(NS, T)                                                    \
  template void NS::gemm_nn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*); \
  template void NS::gemm_tn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*); \
  template void NS::gemm_nt<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*); \
  template void NS::conv2d_forward<T>(const ConvGeometry&, const T*, const T*, T*);            \
  template void NS::conv2d_backward<T>(const ConvGeometry&, const T*, const T*, const T*, T*,  \
                                       T*);

EMONET_INSTANTIATE_KERNELS(parallel, float)
EMONET_INSTANTIATE_KERNELS(parallel, double)
EMONET_INSTANTIATE_KERNELS(reference, float)
EMONET_INSTANTIATE_KERNELS(reference, double)

#undef EMONET_INSTANTIATE_KERNELS

}  // namespace emonet::kernels
