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

#include "emonet/layers.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "emonet/kernels.hpp"

namespace emonet {

std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

TimeMask downsample_mask(const TimeMask& mask) {
  TimeMask out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = (mask[i] + 1) / 2;
  return out;
}

namespace {

struct Dims4 {
  std::size_t b, h, w, c;
};

// Views rank-2 [B,C] tensors as [B,1,1,C].
Dims4 dims4(const Shape& s) {
  if (s.size() == 4) return {s[0], s[1], s[2], s[3]};
  if (s.size() == 2) return {s[0], 1, 1, s[1]};
  fail(ErrorKind::ShapeMismatch, "expected rank 2 or 4, got " + shape_string(s));
}

std::size_t valid_width(const Dims4& d, const TimeMask& mask, std::size_t b) {
  if (mask.empty()) return d.w;
  return std::min(d.w, mask[b]);
}

void check_mask(const TimeMask& mask, std::size_t batch) {
  if (!mask.empty() && mask.size() != batch) {
    fail(ErrorKind::ShapeMismatch, "mask has " + std::to_string(mask.size()) +
                                       " entries for batch " + std::to_string(batch));
  }
}

}  // namespace

template <typename T>
void apply_time_mask(Tensor<T>& x, const TimeMask& mask) {
  if (mask.empty()) return;
  const Dims4 d = dims4(x.shape());
  check_mask(mask, d.b);
  for (std::size_t b = 0; b < d.b; ++b) {
    const std::size_t v = valid_width(d, mask, b);
    if (v == d.w) continue;
    for (std::size_t h = 0; h < d.h; ++h) {
      T* row = x.data() + ((b * d.h + h) * d.w) * d.c;
      std::fill(row + v * d.c, row + d.w * d.c, T{0});
    }
  }
}

// ---- convolution --------------------------------------------------------

namespace {

template <typename T>
kernels::ConvGeometry conv_geometry(const Tensor<T>& x, const Tensor<T>& kernel,
                                    std::size_t stride) {
  if (x.rank() != 4 || kernel.rank() != 4) {
    fail(ErrorKind::ShapeMismatch, "conv2d expects rank-4 input and kernel");
  }
  if (kernel.dim(0) != kernel.dim(1) || (kernel.dim(0) != 1 && kernel.dim(0) != 3)) {
    fail(ErrorKind::ShapeMismatch, "conv2d supports 1x1 and 3x3 kernels, got " +
                                       shape_string(kernel.shape()));
  }
  if (kernel.dim(2) != x.dim(3)) {
    fail(ErrorKind::ShapeMismatch, "conv2d input channels " + std::to_string(x.dim(3)) +
                                       " vs kernel " + shape_string(kernel.shape()));
  }
  if (stride != 1 && stride != 2) fail(ErrorKind::ShapeMismatch, "conv2d stride must be 1 or 2");
  kernels::ConvGeometry g;
  g.batch = x.dim(0);
  g.height = x.dim(1);
  g.width = x.dim(2);
  g.in_channels = x.dim(3);
  g.out_channels = kernel.dim(3);
  g.kernel = kernel.dim(0);
  g.stride = stride;
  return g;
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride) {
  const auto g = conv_geometry(x, kernel, stride);
  Tensor<T> y({g.batch, g.out_height(), g.out_width(), g.out_channels});
  kernels::parallel::conv2d_forward(g, x.data(), kernel.data(), y.data());
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride,
                     const Tensor<T>& dy, Tensor<T>* dx, Tensor<T>* dkernel) {
  const auto g = conv_geometry(x, kernel, stride);
  require_shape(dy.shape(), {g.batch, g.out_height(), g.out_width(), g.out_channels},
                "conv2d_backward dy");
  if (dx != nullptr && dx->shape() != x.shape()) *dx = Tensor<T>(x.shape());
  if (dkernel != nullptr) require_shape(dkernel->shape(), kernel.shape(), "conv2d dkernel");
  kernels::parallel::conv2d_backward(g, x.data(), kernel.data(), dy.data(),
                                     dx ? dx->data() : nullptr,
                                     dkernel ? dkernel->data() : nullptr);
}

// ---- batch normalisation ------------------------------------------------

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode,
                     const TimeMask& mask, const BatchNormSettings& settings,
                     BatchNormCache<T>& cache, bool update_running) {
  const Dims4 d = dims4(x.shape());
  check_mask(mask, d.b);
  for (const Tensor<T>* p : std::initializer_list<const Tensor<T>*>{&gamma, &beta, &running_mean, &running_var}) {
    require_shape(p->shape(), {d.c}, "batch_norm channel parameter");
  }
  std::vector<double> mean(d.c, 0.0);
  std::vector<double> var(d.c, 0.0);
  std::size_t count = 0;
  for (std::size_t b = 0; b < d.b; ++b) count += valid_width(d, mask, b) * d.h;

  if (mode == Mode::Train) {
    if (count == 0) fail(ErrorKind::AllMasked, "batch_norm: no valid positions");
    for (std::size_t b = 0; b < d.b; ++b) {
      const std::size_t v = valid_width(d, mask, b);
      for (std::size_t h = 0; h < d.h; ++h) {
        const T* row = x.data() + ((b * d.h + h) * d.w) * d.c;
        for (std::size_t w = 0; w < v; ++w) {
          const T* px = row + w * d.c;
          for (std::size_t c = 0; c < d.c; ++c) mean[c] += px[c];
        }
      }
    }
    for (auto& m : mean) m /= static_cast<double>(count);
    for (std::size_t b = 0; b < d.b; ++b) {
      const std::size_t v = valid_width(d, mask, b);
      for (std::size_t h = 0; h < d.h; ++h) {
        const T* row = x.data() + ((b * d.h + h) * d.w) * d.c;
        for (std::size_t w = 0; w < v; ++w) {
          const T* px = row + w * d.c;
          for (std::size_t c = 0; c < d.c; ++c) {
            const double dv = px[c] - mean[c];
            var[c] += dv * dv;
          }
        }
      }
    }
    for (auto& s : var) s /= static_cast<double>(count);
    if (update_running) {
      const double mom = settings.momentum;
      const double bessel =
          count > 1 ? static_cast<double>(count) / static_cast<double>(count - 1) : 1.0;
      for (std::size_t c = 0; c < d.c; ++c) {
        running_mean[c] = static_cast<T>(mom * running_mean[c] + (1.0 - mom) * mean[c]);
        running_var[c] = static_cast<T>(mom * running_var[c] + (1.0 - mom) * var[c] * bessel);
      }
    }
  } else {
    for (std::size_t c = 0; c < d.c; ++c) {
      mean[c] = running_mean[c];
      var[c] = running_var[c];
    }
  }

  cache.mode = mode;
  cache.count = count;
  cache.inv_std.resize(d.c);
  std::vector<T> shift(d.c);
  for (std::size_t c = 0; c < d.c; ++c) {
    cache.inv_std[c] = static_cast<T>(1.0 / std::sqrt(var[c] + settings.epsilon));
    shift[c] = static_cast<T>(mean[c]);
  }
  cache.normalized = Tensor<T>(x.shape());
  Tensor<T> y(x.shape());
  for (std::size_t b = 0; b < d.b; ++b) {
    const std::size_t v = valid_width(d, mask, b);
    for (std::size_t h = 0; h < d.h; ++h) {
      const std::size_t base = ((b * d.h + h) * d.w) * d.c;
      const T* px = x.data() + base;
      T* pn = cache.normalized.data() + base;
      T* py = y.data() + base;
      for (std::size_t i = 0; i < v * d.c; ++i) {
        const std::size_t c = i % d.c;
        pn[i] = (px[i] - shift[c]) * cache.inv_std[c];
        py[i] = gamma[c] * pn[i] + beta[c];
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> batch_norm_backward(const Tensor<T>& dy, const Tensor<T>& gamma,
                              const BatchNormCache<T>& cache, const TimeMask& mask,
                              Tensor<T>* dgamma, Tensor<T>* dbeta) {
  const Dims4 d = dims4(dy.shape());
  require_shape(dy.shape(), cache.normalized.shape(), "batch_norm_backward dy");
  std::vector<double> sum_dy(d.c, 0.0);
  std::vector<double> sum_dy_xhat(d.c, 0.0);
  for (std::size_t b = 0; b < d.b; ++b) {
    const std::size_t v = valid_width(d, mask, b);
    for (std::size_t h = 0; h < d.h; ++h) {
      const std::size_t base = ((b * d.h + h) * d.w) * d.c;
      const T* pd = dy.data() + base;
      const T* pn = cache.normalized.data() + base;
      for (std::size_t w = 0; w < v; ++w) {
        for (std::size_t c = 0; c < d.c; ++c) {
          sum_dy[c] += pd[w * d.c + c];
          sum_dy_xhat[c] += pd[w * d.c + c] * pn[w * d.c + c];
        }
      }
    }
  }
  if (dgamma != nullptr) {
    for (std::size_t c = 0; c < d.c; ++c) (*dgamma)[c] += static_cast<T>(sum_dy_xhat[c]);
  }
  if (dbeta != nullptr) {
    for (std::size_t c = 0; c < d.c; ++c) (*dbeta)[c] += static_cast<T>(sum_dy[c]);
  }

  Tensor<T> dx(dy.shape());
  const bool train = cache.mode == Mode::Train;
  const double n = static_cast<double>(cache.count);
  std::vector<T> scale(d.c);
  std::vector<T> mean_dy(d.c);
  std::vector<T> mean_dy_xhat(d.c);
  for (std::size_t c = 0; c < d.c; ++c) {
    scale[c] = gamma[c] * cache.inv_std[c];
    mean_dy[c] = train ? static_cast<T>(sum_dy[c] / n) : T{0};
    mean_dy_xhat[c] = train ? static_cast<T>(sum_dy_xhat[c] / n) : T{0};
  }
  for (std::size_t b = 0; b < d.b; ++b) {
    const std::size_t v = valid_width(d, mask, b);
    for (std::size_t h = 0; h < d.h; ++h) {
      const std::size_t base = ((b * d.h + h) * d.w) * d.c;
      const T* pd = dy.data() + base;
      const T* pn = cache.normalized.data() + base;
      T* px = dx.data() + base;
      for (std::size_t i = 0; i < v * d.c; ++i) {
        const std::size_t c = i % d.c;
        px[i] = scale[c] * (pd[i] - mean_dy[c] - pn[i] * mean_dy_xhat[c]);
      }
    }
  }
  return dx;
}

// ---- elementwise --------------------------------------------------------

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (auto& v : x.values()) v = v > T{0} ? v : T{0};
}

template <typename T>
void relu_backward_inplace(Tensor<T>& dy, const Tensor<T>& y) {
  require_shape(dy.shape(), y.shape(), "relu_backward");
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(y[i] > T{0})) dy[i] = T{0};
  }
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, Rng& rng, DropoutCache<T>& cache) {
  if (rate < 0.0 || rate >= 1.0) fail(ErrorKind::InvalidConfig, "dropout rate must be in [0,1)");
  cache.scale.clear();
  if (mode == Mode::Eval || rate == 0.0) return x;
  const T keep = static_cast<T>(1.0 / (1.0 - rate));
  cache.scale.resize(x.size());
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cache.scale[i] = uniform01(rng) < rate ? T{0} : keep;
    y[i] = x[i] * cache.scale[i];
  }
  return y;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& dy, const DropoutCache<T>& cache) {
  if (cache.scale.empty()) return dy;
  Tensor<T> dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * cache.scale[i];
  return dx;
}

// ---- pooling ------------------------------------------------------------

template <typename T>
Tensor<T> avg_pool2x2(const Tensor<T>& x, const TimeMask& mask) {
  if (x.rank() != 4) fail(ErrorKind::ShapeMismatch, "avg_pool2x2 expects rank 4");
  const Dims4 d = dims4(x.shape());
  check_mask(mask, d.b);
  const std::size_t ho_n = (d.h + 1) / 2;
  const std::size_t wo_n = (d.w + 1) / 2;
  Tensor<T> y({d.b, ho_n, wo_n, d.c});
  for (std::size_t b = 0; b < d.b; ++b) {
    const std::size_t v = valid_width(d, mask, b);
    for (std::size_t ho = 0; ho < ho_n; ++ho) {
      const std::size_t h1 = std::min(d.h, 2 * ho + 2);
      for (std::size_t wo = 0; wo < wo_n; ++wo) {
        const std::size_t w1 = std::min(v, 2 * wo + 2);
        if (2 * wo >= w1) continue;
        const T inv = T{1} / static_cast<T>((h1 - 2 * ho) * (w1 - 2 * wo));
        T* out = &y.at4(b, ho, wo, 0);
        for (std::size_t h = 2 * ho; h < h1; ++h) {
          for (std::size_t w = 2 * wo; w < w1; ++w) {
            const T* in = &x.at4(b, h, w, 0);
            for (std::size_t c = 0; c < d.c; ++c) out[c] += in[c];
          }
        }
        for (std::size_t c = 0; c < d.c; ++c) out[c] *= inv;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> avg_pool2x2_backward(const Tensor<T>& dy, const Shape& input_shape,
                               const TimeMask& mask) {
  const Dims4 d = dims4(input_shape);
  const std::size_t ho_n = (d.h + 1) / 2;
  const std::size_t wo_n = (d.w + 1) / 2;
  require_shape(dy.shape(), {d.b, ho_n, wo_n, d.c}, "avg_pool2x2_backward dy");
  Tensor<T> dx(input_shape);
  for (std::size_t b = 0; b < d.b; ++b) {
    const std::size_t v = valid_width(d, mask, b);
    for (std::size_t ho = 0; ho < ho_n; ++ho) {
      const std::size_t h1 = std::min(d.h, 2 * ho + 2);
      for (std::size_t wo = 0; wo < wo_n; ++wo) {
        const std::size_t w1 = std::min(v, 2 * wo + 2);
        if (2 * wo >= w1) continue;
        const T inv = T{1} / static_cast<T>((h1 - 2 * ho) * (w1 - 2 * wo));
        const T* g = &dy.at4(b, ho, wo, 0);
        for (std::size_t h = 2 * ho; h < h1; ++h) {
          for (std::size_t w = 2 * wo; w < w1; ++w) {
            T* out = &dx.at4(b, h, w, 0);
            for (std::size_t c = 0; c < d.c; ++c) out[c] = g[c] * inv;
          }
        }
      }
    }
  }
  return dx;
}

// ---- dense --------------------------------------------------------------

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& bias) {
  if (x.rank() != 2 || kernel.rank() != 2 || kernel.dim(0) != x.dim(1)) {
    fail(ErrorKind::ShapeMismatch,
         "dense: x " + shape_string(x.shape()) + " vs kernel " + shape_string(kernel.shape()));
  }
  require_shape(bias.shape(), {kernel.dim(1)}, "dense bias");
  const std::size_t batch = x.dim(0);
  const std::size_t out = kernel.dim(1);
  Tensor<T> y({batch, out});
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(bias.data(), bias.data() + out, y.data() + b * out);
  }
  kernels::parallel::gemm_nn(batch, out, x.dim(1), x.data(), kernel.data(), y.data());
  return y;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& dy,
                         Tensor<T>* dkernel, Tensor<T>* dbias, bool need_dx) {
  const std::size_t batch = x.dim(0);
  const std::size_t in = kernel.dim(0);
  const std::size_t out = kernel.dim(1);
  require_shape(dy.shape(), {batch, out}, "dense_backward dy");
  if (dkernel != nullptr) {
    kernels::parallel::gemm_tn(in, out, batch, x.data(), dy.data(), dkernel->data());
  }
  if (dbias != nullptr) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < out; ++j) (*dbias)[j] += dy[b * out + j];
    }
  }
  Tensor<T> dx;
  if (need_dx) {
    dx = Tensor<T>({batch, in});
    kernels::parallel::gemm_nt(batch, in, out, dy.data(), kernel.data(), dx.data());
  }
  return dx;
}

// ---- attention pooling --------------------------------------------------

template <typename T>
Tensor<T> attention_pool(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                         const Tensor<T>& u, double lambda, const TimeMask& mask,
                         AttentionCache<T>& cache) {
  if (x.rank() != 4) fail(ErrorKind::ShapeMismatch, "attention_pool expects [B,Nf,Nt,C]");
  const Dims4 d = dims4(x.shape());
  check_mask(mask, d.b);
  if (w.rank() != 2 || w.dim(0) != d.c) {
    fail(ErrorKind::ShapeMismatch, "attention W " + shape_string(w.shape()) +
                                       " does not match channels " + std::to_string(d.c));
  }
  const std::size_t att = w.dim(1);
  require_shape(b.shape(), {att}, "attention b");
  require_shape(u.shape(), {att}, "attention u");
  const std::size_t n = d.h * d.w;

  cache.hidden = Tensor<T>({d.b, n, att});
  cache.weights = Tensor<T>({d.b, n});
  cache.valid.assign(d.b, 0);
  Tensor<T> out({d.b, d.c});
  std::vector<double> e(n);
  for (std::size_t item = 0; item < d.b; ++item) {
    const std::size_t v = valid_width(d, mask, item);
    if (v == 0) fail(ErrorKind::AllMasked, "attention_pool: item has no valid positions");
    cache.valid[item] = v;
    const T* xb = x.data() + item * n * d.c;
    T* hb = cache.hidden.data() + item * n * att;
    for (std::size_t i = 0; i < n; ++i) std::copy(b.data(), b.data() + att, hb + i * att);
    kernels::parallel::gemm_nn(n, att, d.c, xb, w.data(), hb);
    double e_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      T* hi = hb + i * att;
      double s = 0.0;
      for (std::size_t a = 0; a < att; ++a) {
        hi[a] = std::tanh(hi[a]);
        s += static_cast<double>(u[a]) * hi[a];
      }
      e[i] = lambda * s;
      if (i % d.w < v) e_max = std::max(e_max, e[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % d.w < v) z += std::exp(e[i] - e_max);
    }
    T* alpha = cache.weights.data() + item * n;
    T* ob = out.data() + item * d.c;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % d.w >= v) {
        alpha[i] = T{0};
        continue;
      }
      alpha[i] = static_cast<T>(std::exp(e[i] - e_max) / z);
      const T* xi = xb + i * d.c;
      for (std::size_t c = 0; c < d.c; ++c) ob[c] += alpha[i] * xi[c];
    }
  }
  return out;
}

template <typename T>
Tensor<T> attention_pool_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& u,
                                  double lambda, const TimeMask& mask,
                                  const AttentionCache<T>& cache, const Tensor<T>& dy,
                                  Tensor<T>* dw, Tensor<T>* db, Tensor<T>* du, bool need_dx) {
  (void)mask;
  const Dims4 d = dims4(x.shape());
  const std::size_t att = w.dim(1);
  const std::size_t n = d.h * d.w;
  require_shape(dy.shape(), {d.b, d.c}, "attention_pool_backward dy");
  Tensor<T> dx;
  if (need_dx) dx = Tensor<T>(x.shape());
  std::vector<T> dz(n * att);
  std::vector<double> dalpha(n);
  for (std::size_t item = 0; item < d.b; ++item) {
    const std::size_t v = cache.valid[item];
    const T* xb = x.data() + item * n * d.c;
    const T* hb = cache.hidden.data() + item * n * att;
    const T* alpha = cache.weights.data() + item * n;
    const T* g = dy.data() + item * d.c;
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % d.w >= v) continue;
      double s = 0.0;
      const T* xi = xb + i * d.c;
      for (std::size_t c = 0; c < d.c; ++c) s += static_cast<double>(xi[c]) * g[c];
      dalpha[i] = s;
      weighted += alpha[i] * s;
    }
    std::fill(dz.begin(), dz.end(), T{0});
    for (std::size_t i = 0; i < n; ++i) {
      if (i % d.w >= v) continue;
      const double de = lambda * alpha[i] * (dalpha[i] - weighted);
      const T* hi = hb + i * att;
      T* dzi = dz.data() + i * att;
      for (std::size_t a = 0; a < att; ++a) {
        if (du != nullptr) (*du)[a] += static_cast<T>(de * hi[a]);
        dzi[a] = static_cast<T>(de * u[a] * (1.0 - static_cast<double>(hi[a]) * hi[a]));
      }
    }
    if (dw != nullptr) kernels::parallel::gemm_tn(d.c, att, n, xb, dz.data(), dw->data());
    if (db != nullptr) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < att; ++a) (*db)[a] += dz[i * att + a];
      }
    }
    if (need_dx) {
      T* dxb = dx.data() + item * n * d.c;
      kernels::parallel::gemm_nt(n, d.c, att, dz.data(), w.data(), dxb);
      for (std::size_t i = 0; i < n; ++i) {
        T* dxi = dxb + i * d.c;
        if (i % d.w >= v) {
          std::fill(dxi, dxi + d.c, T{0});
          continue;
        }
        for (std::size_t c = 0; c < d.c; ++c) dxi[c] += alpha[i] * g[c];
      }
    }
  }
  return dx;
}

// ---- loss ---------------------------------------------------------------

template <typename T>
std::vector<T> softmax_row(std::span<const T> logits) {
  double m = -std::numeric_limits<double>::infinity();
  for (T v : logits) m = std::max(m, static_cast<double>(v));
  double z = 0.0;
  for (T v : logits) z += std::exp(v - m);
  std::vector<T> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = static_cast<T>(std::exp(logits[k] - m) / z);
  }
  return out;
}

template <typename T>
double softmax_xent(const Tensor<T>& logits, const std::vector<int>& labels,
                    const std::vector<double>& class_weights, Tensor<T>* dlogits) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    fail(ErrorKind::ShapeMismatch, "softmax_xent: logits " + shape_string(logits.shape()) +
                                       " for " + std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = logits.dim(0);
  const std::size_t k = logits.dim(1);
  if (!class_weights.empty() && class_weights.size() != k) {
    fail(ErrorKind::ShapeMismatch, "softmax_xent: class weight count mismatch");
  }
  if (dlogits != nullptr) *dlogits = Tensor<T>(logits.shape());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      fail(ErrorKind::LabelOutOfRange, "label " + std::to_string(y) + " outside [0," +
                                           std::to_string(k) + ")");
    }
    const T* row = logits.data() + b * k;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) m = std::max(m, static_cast<double>(row[j]));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - m);
    const double log_z = m + std::log(z);
    const double wy = class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(y)];
    loss += wy * (log_z - row[y]);
    if (dlogits != nullptr) {
      T* g = dlogits->data() + b * k;
      for (std::size_t j = 0; j < k; ++j) {
        const double p = std::exp(row[j] - log_z);
        g[j] = static_cast<T>(wy * (p - (static_cast<int>(j) == y ? 1.0 : 0.0)) /
                              static_cast<double>(batch));
      }
    }
  }
  return loss / static_cast<double>(batch);
}

#define EMONET_INSTANTIATE_LAYERS(T)                                                          \
  template void apply_time_mask<T>(Tensor<T>&, const TimeMask&);                              \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, std::size_t);              \
  template void conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, std::size_t,           \
                                   const Tensor<T>&, Tensor<T>*, Tensor<T>*);                 \
  template Tensor<T> batch_norm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,      \
                                   Tensor<T>&, Tensor<T>&, Mode, const TimeMask&,             \
                                   const BatchNormSettings&, BatchNormCache<T>&, bool);       \
  template Tensor<T> batch_norm_backward<T>(const Tensor<T>&, const Tensor<T>&,               \
                                            const BatchNormCache<T>&, const TimeMask&,        \
                                            Tensor<T>*, Tensor<T>*);                          \
  template void relu_inplace<T>(Tensor<T>&);                                                  \
  template void relu_backward_inplace<T>(Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> dropout<T>(const Tensor<T>&, double, Mode, Rng&, DropoutCache<T>&);      \
  template Tensor<T> dropout_backward<T>(const Tensor<T>&, const DropoutCache<T>&);           \
  template Tensor<T> avg_pool2x2<T>(const Tensor<T>&, const TimeMask&);                       \
  template Tensor<T> avg_pool2x2_backward<T>(const Tensor<T>&, const Shape&, const TimeMask&); \
  template Tensor<T> dense<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> dense_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,  \
                                       Tensor<T>*, Tensor<T>*, bool);                         \
  template Tensor<T> attention_pool<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,  \
                                       const Tensor<T>&, double, const TimeMask&,             \
                                       AttentionCache<T>&);                                   \
  template Tensor<T> attention_pool_backward<T>(                                              \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double, const TimeMask&,          \
      const AttentionCache<T>&, const Tensor<T>&, Tensor<T>*, Tensor<T>*, Tensor<T>*, bool);  \
  template double softmax_xent<T>(const Tensor<T>&, const std::vector<int>&,                  \
                                  const std::vector<double>&, Tensor<T>*);                    \
  template std::vector<T> softmax_row<T>(std::span<const T>);

EMONET_INSTANTIATE_LAYERS(float)
EMONET_INSTANTIATE_LAYERS(double)

#undef EMONET_INSTANTIATE_LAYERS

}  // namespace emonet
