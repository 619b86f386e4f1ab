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

#pragma once

#include <cstddef>

namespace emonet::kernels {

/// Geometry of a bias-free NHWC cross-correlation. The input is padded with
/// (k - 1) / 2 zeros before each spatial axis and as many after as needed to
/// produce ceil(in / stride) outputs, so output position o always reads input
/// rows o * stride - pad ... o * stride - pad + k - 1 regardless of the input
/// extent.
struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;  // square kernels only
  std::size_t stride = 1;

  std::size_t pad() const { return (kernel - 1) / 2; }
  std::size_t out_height() const { return (height + stride - 1) / stride; }
  std::size_t out_width() const { return (width + stride - 1) / stride; }
  std::size_t patch() const { return kernel * kernel * in_channels; }
};

/// Number of threads the parallel kernels use (after EMONET_THREADS capping).
int thread_count();
/// Applies EMONET_THREADS, if set, as the OpenMP thread cap.
void configure_threads_from_env();

// Both namespaces expose the same operations. `parallel` is what the layers
// call: blocked, OpenMP-parallel over output rows, and bit-deterministic for
// any thread count because every output element is reduced by one thread in
// a fixed order. `reference` is the straightforward serial formulation kept
// for tests and benchmarks.

namespace parallel {

/// C[M,N] += A[M,K] * B[K,N]
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
/// C[M,N] += A[K,M]^T * B[K,N]
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
/// C[M,N] += A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

/// y[B,Ho,Wo,Cout] = conv(x[B,H,W,Cin], w[k,k,Cin,Cout]); y is overwritten.
template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, T* y);
/// dx (overwritten, may be null) and dw (accumulated, may be null).
template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw);

}  // namespace parallel

namespace reference {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, T* y);
template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw);

}  // namespace reference

}  // namespace emonet::kernels
