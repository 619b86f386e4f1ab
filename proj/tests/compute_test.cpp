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

#include <doctest.h>

#include <cmath>

#include "emonet/error.hpp"
#include "emonet/kernels.hpp"
#include "emonet/layers.hpp"
#include "emonet/optim.hpp"
#include "emonet/random.hpp"

using namespace emonet;

namespace {

Tensor<double> randn(Shape s, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<double> t(std::move(s));
  for (auto& v : t.values()) v = standard_normal(rng);
  return t;
}

template <typename T>
Tensor<T> randn_as(Shape s, std::uint64_t seed) {
  return randn(std::move(s), seed).cast<T>();
}

}  // namespace

TEST_SUITE("compute") {

TEST_CASE("conv2d matches a direct six-loop sum") {
  const Tensor<double> x = randn({2, 4, 4, 3}, 1);
  const Tensor<double> k = randn({3, 3, 3, 5}, 2);
  const Tensor<double> y = conv2d(x, k, 2);
  REQUIRE(y.shape() == Shape{2, 2, 2, 5});
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t ho = 0; ho < 2; ++ho)
      for (std::size_t wo = 0; wo < 2; ++wo)
        for (std::size_t co = 0; co < 5; ++co) {
          double s = 0.0;
          for (std::size_t ky = 0; ky < 3; ++ky)
            for (std::size_t kx = 0; kx < 3; ++kx)
              for (std::size_t ci = 0; ci < 3; ++ci) {
                const long h = long(ho * 2 + ky) - 1;
                const long w = long(wo * 2 + kx) - 1;
                if (h < 0 || w < 0 || h >= 4 || w >= 4) continue;
                s += x.at4(b, std::size_t(h), std::size_t(w), ci) * k.at4(ky, kx, ci, co);
              }
          CHECK(y.at4(b, ho, wo, co) == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE_TEMPLATE("parallel kernels equal the reference bit for bit", T, float, double) {
  for (auto [m, n, k] : {std::array<std::size_t, 3>{1, 1, 1}, {7, 13, 5}, {37, 64, 19}, {130, 48, 300}}) {
    const Tensor<T> a = randn_as<T>({m, k}, m + n);
    const Tensor<T> b = randn_as<T>({k, n}, k + 3);
    const Tensor<T> at = randn_as<T>({k, m}, m + 9);
    const Tensor<T> bt = randn_as<T>({n, k}, n + 11);
    std::vector<T> c1(m * n, T(0.5)), c2(m * n, T(0.5));
    kernels::parallel::gemm_nn(m, n, k, a.data(), b.data(), c1.data());
    kernels::reference::gemm_nn(m, n, k, a.data(), b.data(), c2.data());
    CHECK(c1 == c2);
    kernels::parallel::gemm_tn(m, n, k, at.data(), b.data(), c1.data());
    kernels::reference::gemm_tn(m, n, k, at.data(), b.data(), c2.data());
    CHECK(c1 == c2);
    kernels::parallel::gemm_nt(m, n, k, a.data(), bt.data(), c1.data());
    kernels::reference::gemm_nt(m, n, k, a.data(), bt.data(), c2.data());
    CHECK(c1 == c2);
  }
  for (std::size_t stride : {1u, 2u}) {
    for (std::size_t ks : {1u, 3u}) {
      kernels::ConvGeometry g{2, 7, 6, 5, 9, ks, stride};
      const Tensor<T> x = randn_as<T>({2, 7, 6, 5}, 21);
      const Tensor<T> w = randn_as<T>({ks, ks, 5, 9}, 22);
      const Tensor<T> dy = randn_as<T>({2, g.out_height(), g.out_width(), 9}, 23);
      std::vector<T> y1(dy.size()), y2(dy.size());
      kernels::parallel::conv2d_forward(g, x.data(), w.data(), y1.data());
      kernels::reference::conv2d_forward(g, x.data(), w.data(), y2.data());
      CHECK(y1 == y2);
      std::vector<T> dx1(x.size()), dx2(x.size()), dw1(w.size()), dw2(w.size());
      kernels::parallel::conv2d_backward(g, x.data(), w.data(), dy.data(), dx1.data(), dw1.data());
      kernels::reference::conv2d_backward(g, x.data(), w.data(), dy.data(), dx2.data(), dw2.data());
      // backward sums run in a different order; compare to rounding
      const double tol = std::is_same_v<T, float> ? 1e-4 : 1e-11;
      for (std::size_t i = 0; i < dx1.size(); ++i) CHECK(dx1[i] == doctest::Approx(dx2[i]).epsilon(tol));
      for (std::size_t i = 0; i < dw1.size(); ++i) CHECK(dw1[i] == doctest::Approx(dw2[i]).epsilon(tol));
    }
  }
}

TEST_CASE("batch norm uses valid positions only") {
  Tensor<double> x = randn({2, 3, 4, 2}, 5);
  const TimeMask mask{4, 2};
  apply_time_mask(x, mask);
  Tensor<double> gamma({2}, 1.0), beta({2}, 0.0), mean({2}, 0.0), var({2}, 1.0);
  BatchNormCache<double> cache;
  const Tensor<double> y =
      batch_norm(x, gamma, beta, mean, var, Mode::Train, mask, BatchNormSettings{}, cache);
  for (std::size_t c = 0; c < 2; ++c) {
    double s = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t h = 0; h < 3; ++h)
        for (std::size_t w = 0; w < mask[b]; ++w) {
          s += y.at4(b, h, w, c);
          sq += y.at4(b, h, w, c) * y.at4(b, h, w, c);
          ++n;
        }
    CHECK(n == 18);
    CHECK(s / n == doctest::Approx(0.0).epsilon(1e-12));
    // biased variance of normalised values is var / (var + eps) < 1
    CHECK(sq / n < 1.0);
    CHECK(sq / n > 0.99);
  }
  // running statistics move by (1 - momentum)
  double raw = 0.0;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t h = 0; h < 3; ++h)
      for (std::size_t w = 0; w < mask[b]; ++w) raw += x.at4(b, h, w, 0);
  CHECK(mean[0] == doctest::Approx(0.01 * raw / 18.0));
}

TEST_CASE("attention pooling properties") {
  AttentionCache<double> cache;
  const Tensor<double> x = randn({2, 3, 5, 4}, 7);
  const Tensor<double> w = randn({4, 6}, 8);
  const Tensor<double> b = randn({6}, 9);
  const Tensor<double> u = randn({6}, 10);
  const TimeMask mask{5, 2};

  const Tensor<double> y0 = attention_pool(x, w, b, u, 0.0, mask, cache);
  for (std::size_t item = 0; item < 2; ++item) {
    const double n = 3.0 * mask[item];
    for (std::size_t i = 0; i < 15; ++i) {
      const double a = cache.weights[item * 15 + i];
      CHECK(a == doctest::Approx(i % 5 < mask[item] ? 1.0 / n : 0.0).epsilon(1e-12));
    }
  }

  attention_pool(x, w, b, u, 0.3, mask, cache);
  for (std::size_t item = 0; item < 2; ++item) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 15; ++i) {
      sum += cache.weights[item * 15 + i];
      if (i % 5 >= mask[item]) CHECK(cache.weights[item * 15 + i] == 0.0);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }

  // padded content never reaches the output
  Tensor<double> x2 = x;
  for (std::size_t h = 0; h < 3; ++h)
    for (std::size_t t = 2; t < 5; ++t)
      for (std::size_t c = 0; c < 4; ++c) x2.at4(1, h, t, c) = 100.0;
  const Tensor<double> ya = attention_pool(x, w, b, u, 0.3, mask, cache);
  const Tensor<double> yb = attention_pool(x2, w, b, u, 0.3, mask, cache);
  for (std::size_t c = 0; c < 4; ++c) CHECK(ya[4 + c] == yb[4 + c]);

  CHECK_THROWS_AS(attention_pool(x, w, b, u, 0.3, TimeMask{5, 0}, cache), Error);
}

TEST_CASE("attention crafted two-position case") {
  // e = u * tanh(x_0); positions 0 and 1 give lambda*e = 0 and ln 4
  const double lambda = 0.3;
  const Tensor<double> x({1, 1, 2, 2}, std::vector<double>{0.0, 3.0, 1.0, 5.0});
  const Tensor<double> w({2, 1}, std::vector<double>{1.0, 0.0});
  const Tensor<double> b({1}, 0.0);
  const Tensor<double> u({1}, std::log(4.0) / lambda / std::tanh(1.0));
  AttentionCache<double> cache;
  const Tensor<double> y = attention_pool(x, w, b, u, lambda, TimeMask{2}, cache);
  CHECK(cache.weights[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(cache.weights[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(y[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(0.2 * 3.0 + 0.8 * 5.0).epsilon(1e-12));
}

TEST_CASE("average pooling") {
  const Tensor<double> x = randn({1, 5, 6, 4}, 11);
  const Tensor<double> y = avg_pool2x2(x, TimeMask{6});
  REQUIRE(y.shape() == Shape{1, 3, 3, 4});
  for (std::size_t h = 0; h < 3; ++h)
    for (std::size_t w = 0; w < 3; ++w)
      for (std::size_t c = 0; c < 4; ++c) {
        double s = 0.0;
        int n = 0;
        for (std::size_t dh = 0; dh < 2; ++dh)
          for (std::size_t dw = 0; dw < 2; ++dw) {
            if (2 * h + dh >= 5) continue;
            s += x.at4(0, 2 * h + dh, 2 * w + dw, c);
            ++n;
          }
        CHECK(y.at4(0, h, w, c) == doctest::Approx(s / n).epsilon(1e-12));
      }
  const Tensor<double> z = avg_pool2x2(randn({1, 8, 8, 32}, 12), TimeMask{8});
  CHECK(z.shape() == Shape{1, 4, 4, 32});
  CHECK(downsample_mask(TimeMask{311, 7, 1}) == TimeMask{156, 4, 1});
}

TEST_CASE("weighted cross entropy") {
  const Tensor<double> logits = randn({3, 2}, 13);
  const std::vector<int> all_b{1, 1, 1};
  const double plain = softmax_xent(logits, all_b, {1.0, 1.0}, static_cast<Tensor<double>*>(nullptr));
  const double weighted = softmax_xent(logits, all_b, {0.5, 2.0}, static_cast<Tensor<double>*>(nullptr));
  CHECK(weighted == doctest::Approx(2.0 * plain));
  CHECK_THROWS_AS(softmax_xent(logits, {0, 2, 1}, {1.0, 1.0}, static_cast<Tensor<double>*>(nullptr)), Error);
}

TEST_CASE("dropout") {
  Rng rng(3);
  DropoutCache<double> cache;
  const Tensor<double> x({1000}, 1.0);
  const Tensor<double> y = dropout(x, 0.5, Mode::Train, rng, cache);
  std::size_t kept = 0;
  for (double v : y.values()) {
    CHECK((v == 0.0 || v == 2.0));
    kept += v != 0.0;
  }
  CHECK(kept > 400);
  CHECK(kept < 600);
  CHECK(dropout(x, 0.5, Mode::Eval, rng, cache) == x);
}

TEST_CASE("sgd with momentum follows the scalar recurrence") {
  ParameterStore<double> store;
  store.add("p", Tensor<double>({1}, 1.0));
  double p = 1.0, v = 0.0;
  const SgdSettings s{0.9, 1e-6};
  for (int step = 0; step < 3; ++step) {
    auto& param = store.get("p");
    param.grad[0] = 2.0 * param.value[0];  // d/dp p^2
    sgd_step(store, 0.1, s);
    v = 0.9 * v + (2.0 * p + 1e-6 * p);
    p = p - 0.1 * v;
    CHECK(store.value("p")[0] == doctest::Approx(p).epsilon(1e-15));
  }

  store.add("frozen", Tensor<double>({1}, 1.0));
  store.grad("frozen")[0] = 1.0;
  const std::set<std::string> only{"p"};
  sgd_step(store, 0.1, s, &only);
  CHECK(store.value("frozen")[0] == 1.0);
}

}
