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
#include <vector>

#include "emonet/random.hpp"
#include "emonet/tensor.hpp"

namespace emonet {

enum class Mode { Train, Eval };

/// Per-item count of valid time positions at the current resolution. Empty
/// means every position is valid. Activations are kept exactly zero beyond
/// each item's valid extent.
using TimeMask = std::vector<std::size_t>;

/// Valid extent after a stride-2 reduction: ceil(v / 2).
TimeMask downsample_mask(const TimeMask& mask);

template <typename T>
void apply_time_mask(Tensor<T>& x, const TimeMask& mask);

// ---- convolution --------------------------------------------------------

/// Bias-free cross-correlation; x [B,H,W,Cin], kernel [k,k,Cin,Cout],
/// output [B,ceil(H/s),ceil(W/s),Cout].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride);

/// dx is overwritten when non-null; dkernel is accumulated when non-null.
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride,
                     const Tensor<T>& dy, Tensor<T>* dx, Tensor<T>* dkernel);

// ---- batch normalisation ------------------------------------------------

template <typename T>
struct BatchNormCache {
  Tensor<T> normalized;
  std::vector<T> inv_std;
  std::size_t count = 0;
  Mode mode = Mode::Train;
};

struct BatchNormSettings {
  double momentum = 0.99;
  double epsilon = 1e-3;
};

/// Normalises over every non-channel axis (valid positions only). Train mode
/// uses batch statistics and updates the running ones unless
/// update_running is false; eval mode uses the running statistics.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode,
                     const TimeMask& mask, const BatchNormSettings& settings,
                     BatchNormCache<T>& cache, bool update_running = true);

template <typename T>
Tensor<T> batch_norm_backward(const Tensor<T>& dy, const Tensor<T>& gamma,
                              const BatchNormCache<T>& cache, const TimeMask& mask,
                              Tensor<T>* dgamma, Tensor<T>* dbeta);

// ---- elementwise --------------------------------------------------------

template <typename T>
void relu_inplace(Tensor<T>& x);
/// Zeroes dy where the forward output y was not positive.
template <typename T>
void relu_backward_inplace(Tensor<T>& dy, const Tensor<T>& y);

template <typename T>
struct DropoutCache {
  std::vector<T> scale;  // 0 or 1/(1-rate) per element; empty when inactive
};

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, Rng& rng, DropoutCache<T>& cache);
template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& dy, const DropoutCache<T>& cache);

// ---- pooling ------------------------------------------------------------

/// 2x2 stride-2 average pooling; output [B,ceil(H/2),ceil(W/2),C]. Edge
/// cells average over the input cells that exist (and are valid in time).
template <typename T>
Tensor<T> avg_pool2x2(const Tensor<T>& x, const TimeMask& mask);
template <typename T>
Tensor<T> avg_pool2x2_backward(const Tensor<T>& dy, const Shape& input_shape,
                               const TimeMask& mask);

// ---- dense --------------------------------------------------------------

/// x [B,In] * kernel [In,Out] + bias [Out]
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& bias);
template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& dy,
                         Tensor<T>* dkernel, Tensor<T>* dbias, bool need_dx = true);

// ---- attention pooling --------------------------------------------------

template <typename T>
struct AttentionCache {
  Tensor<T> hidden;   // tanh(W x + b), [B, N, A]
  Tensor<T> weights;  // alpha, [B, N]
  std::vector<std::size_t> valid;  // valid flattened positions per item
};

/// x [B,Nf,Nt,C]; W [C,A]; b [A]; u [A]. Positions are the Nf x Nt cells
/// flattened; positions whose time index is beyond the mask are excluded
/// from the softmax and the sum. Returns [B,C].
template <typename T>
Tensor<T> attention_pool(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                         const Tensor<T>& u, double lambda, const TimeMask& mask,
                         AttentionCache<T>& cache);

template <typename T>
Tensor<T> attention_pool_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& u,
                                  double lambda, const TimeMask& mask,
                                  const AttentionCache<T>& cache, const Tensor<T>& dy,
                                  Tensor<T>* dw, Tensor<T>* db, Tensor<T>* du,
                                  bool need_dx = true);

// ---- loss ---------------------------------------------------------------

/// Mean over the batch of weight(y_i) * -log softmax(logits_i)[y_i].
/// class_weights may be empty (all ones). Writes dlogits when non-null.
template <typename T>
double softmax_xent(const Tensor<T>& logits, const std::vector<int>& labels,
                    const std::vector<double>& class_weights, Tensor<T>* dlogits);

template <typename T>
std::vector<T> softmax_row(std::span<const T> logits);

}  // namespace emonet
