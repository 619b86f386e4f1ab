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

#include "emonet/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace emonet {

namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = scale * standard_normal(rng);
  return t;
}

// Keeps values away from the ReLU kink so h-perturbations never cross it.
Tensor<double> off_kink_tensor(Shape shape, Rng& rng) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) {
    const double m = 0.1 + uniform01(rng);
    v = uniform01(rng) < 0.5 ? -m : m;
  }
  return t;
}

double project(const Tensor<double>& y, const Tensor<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

std::vector<std::size_t> pick(std::size_t size, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count >= size) return idx;
  shuffle(std::span<std::size_t>(idx), rng);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult finite_difference_check(const std::string& name,
                                        const std::function<double()>& loss,
                                        std::vector<GradProbe>& probes,
                                        const GradCheckSettings& settings, std::uint64_t seed) {
  GradCheckResult result;
  result.name = name;
  std::size_t total = 0;
  for (const auto& p : probes) {
    require_shape(p.analytic.shape(), p.value->shape(), "grad_check analytic gradient");
    total += p.value->size();
  }
  Rng rng(derive_seed(seed, "grad_check", name));
  for (auto& p : probes) {
    std::size_t count = p.value->size();
    if (total > settings.max_coordinates) {
      const double share = static_cast<double>(settings.max_coordinates) *
                           static_cast<double>(p.value->size()) / static_cast<double>(total);
      count = std::max(settings.min_per_tensor, static_cast<std::size_t>(share));
    }
    for (std::size_t i : pick(p.value->size(), count, rng)) {
      double& v = (*p.value)[i];
      const double saved = v;
      // The primary step first. A failing coordinate is re-measured at
      // steps that dodge a nearby ReLU kink (smaller) or cancellation on a
      // tiny gradient (larger); a wrong gradient fails at every step.
      double numeric = 0.0;
      double err = std::numeric_limits<double>::infinity();
      for (std::size_t attempt = 0; attempt <= settings.step_ladder.size(); ++attempt) {
        const double step = attempt == 0 ? settings.step : settings.step * settings.step_ladder[attempt - 1];
        v = saved + step;
        const double up = loss();
        v = saved - step;
        const double down = loss();
        v = saved;
        const double n = (up - down) / (2.0 * step);
        const double e = relative_error(p.analytic[i], n);
        if (e < err) {
          err = e;
          numeric = n;
        }
        if (err < settings.tolerance) break;
        if (attempt == 0) ++result.restepped;
      }
      if (err > result.max_relative_error || result.worst.empty()) {
        result.max_relative_error = err;
        result.worst = p.name + "[" + std::to_string(i) + "]";
        result.worst_analytic = p.analytic[i];
        result.worst_numeric = numeric;
      }
      ++result.coordinates;
    }
  }
  result.passed = result.max_relative_error < settings.tolerance;
  return result;
}

std::vector<GradCheckResult> check_ops(std::uint64_t seed, const GradCheckSettings& settings) {
  std::vector<GradCheckResult> out;
  Rng rng(derive_seed(seed, "ops"));

  // conv2d: 3x3 stride 1, 3x3 stride 2 (odd and even extents), 1x1 stride 2
  struct ConvCase {
    const char* name;
    Shape x;
    std::size_t k;
    std::size_t cout;
    std::size_t stride;
  };
  for (const ConvCase& c : {ConvCase{"conv2d 3x3 s1", {2, 5, 6, 3}, 3, 4, 1},
                            ConvCase{"conv2d 3x3 s2", {2, 6, 7, 3}, 3, 4, 2},
                            ConvCase{"conv2d 1x1 s2", {2, 5, 4, 3}, 1, 2, 2}}) {
    Tensor<double> x = random_tensor(c.x, rng);
    Tensor<double> k = random_tensor({c.k, c.k, c.x[3], c.cout}, rng);
    const Tensor<double> y0 = conv2d(x, k, c.stride);
    const Tensor<double> r = random_tensor(y0.shape(), rng);
    std::vector<GradProbe> probes{{"x", &x, {}}, {"kernel", &k, Tensor<double>(k.shape())}};
    conv2d_backward(x, k, c.stride, r, &probes[0].analytic, &probes[1].analytic);
    auto loss = [&] { return project(conv2d(x, k, c.stride), r); };
    out.push_back(finite_difference_check(c.name, loss, probes, settings, seed));
  }

  // batch_norm in train mode with a time mask, and in eval mode
  for (Mode mode : {Mode::Train, Mode::Eval}) {
    const TimeMask mask{4, 2};
    Tensor<double> x = random_tensor({2, 3, 4, 3}, rng);
    apply_time_mask(x, mask);
    Tensor<double> gamma = random_tensor({3}, rng);
    Tensor<double> beta = random_tensor({3}, rng);
    Tensor<double> mean = random_tensor({3}, rng, 0.1);
    Tensor<double> var({3}, 1.5);
    BatchNormCache<double> cache;
    auto run = [&](BatchNormCache<double>& c) {
      Tensor<double> m = mean;
      Tensor<double> v = var;
      return batch_norm(x, gamma, beta, m, v, mode, mask, BatchNormSettings{}, c, false);
    };
    const Tensor<double> y0 = run(cache);
    Tensor<double> r = random_tensor(y0.shape(), rng);
    apply_time_mask(r, mask);
    std::vector<GradProbe> probes{{"x", &x, {}},
                                  {"gamma", &gamma, Tensor<double>({3})},
                                  {"beta", &beta, Tensor<double>({3})}};
    probes[0].analytic =
        batch_norm_backward(r, gamma, cache, mask, &probes[1].analytic, &probes[2].analytic);
    auto loss = [&] {
      BatchNormCache<double> c;
      return project(run(c), r);
    };
    out.push_back(finite_difference_check(
        mode == Mode::Train ? "batch_norm train (masked)" : "batch_norm eval", loss, probes,
        settings, seed));
  }

  {
    Tensor<double> x = off_kink_tensor({3, 7}, rng);
    const Tensor<double> r = random_tensor(x.shape(), rng);
    auto run = [&] {
      Tensor<double> y = x;
      relu_inplace(y);
      return y;
    };
    Tensor<double> dx = r;
    relu_backward_inplace(dx, run());
    std::vector<GradProbe> probes{{"x", &x, dx}};
    out.push_back(finite_difference_check("relu", [&] { return project(run(), r); }, probes,
                                          settings, seed));
  }

  {
    const TimeMask mask{5, 3};
    Tensor<double> x = random_tensor({2, 5, 5, 2}, rng);
    apply_time_mask(x, mask);
    const Tensor<double> y0 = avg_pool2x2(x, mask);
    const Tensor<double> r = random_tensor(y0.shape(), rng);
    std::vector<GradProbe> probes{{"x", &x, avg_pool2x2_backward(r, x.shape(), mask)}};
    out.push_back(finite_difference_check(
        "avg_pool2x2 (masked)", [&] { return project(avg_pool2x2(x, mask), r); }, probes,
        settings, seed));
  }

  {
    Tensor<double> x = random_tensor({3, 5}, rng);
    Tensor<double> k = random_tensor({5, 4}, rng);
    Tensor<double> b = random_tensor({4}, rng);
    const Tensor<double> r = random_tensor({3, 4}, rng);
    std::vector<GradProbe> probes{{"x", &x, {}},
                                  {"kernel", &k, Tensor<double>(k.shape())},
                                  {"bias", &b, Tensor<double>(b.shape())}};
    probes[0].analytic = dense_backward(x, k, r, &probes[1].analytic, &probes[2].analytic);
    out.push_back(finite_difference_check("dense", [&] { return project(dense(x, k, b), r); },
                                          probes, settings, seed));
  }

  {
    Tensor<double> x = random_tensor({4, 6}, rng);
    const Tensor<double> r = random_tensor(x.shape(), rng);
    const std::uint64_t mask_seed = derive_seed(seed, "dropout");
    auto run = [&](DropoutCache<double>& cache) {
      Rng drop(mask_seed);
      return dropout(x, 0.5, Mode::Train, drop, cache);
    };
    DropoutCache<double> cache;
    run(cache);
    std::vector<GradProbe> probes{{"x", &x, dropout_backward(r, cache)}};
    auto loss = [&] {
      DropoutCache<double> c;
      return project(run(c), r);
    };
    out.push_back(finite_difference_check("dropout", loss, probes, settings, seed));
  }

  {
    const TimeMask mask{3, 1};
    const double lambda = 0.3;
    Tensor<double> x = random_tensor({2, 2, 3, 4}, rng);
    apply_time_mask(x, mask);
    Tensor<double> w = random_tensor({4, 4}, rng, 0.5);
    Tensor<double> b = random_tensor({4}, rng, 0.5);
    Tensor<double> u = random_tensor({4}, rng);
    AttentionCache<double> cache;
    const Tensor<double> y0 = attention_pool(x, w, b, u, lambda, mask, cache);
    const Tensor<double> r = random_tensor(y0.shape(), rng);
    std::vector<GradProbe> probes{{"x", &x, {}},
                                  {"W", &w, Tensor<double>(w.shape())},
                                  {"b", &b, Tensor<double>(b.shape())},
                                  {"u", &u, Tensor<double>(u.shape())}};
    probes[0].analytic = attention_pool_backward(x, w, u, lambda, mask, cache, r,
                                                 &probes[1].analytic, &probes[2].analytic,
                                                 &probes[3].analytic);
    auto loss = [&] {
      AttentionCache<double> c;
      return project(attention_pool(x, w, b, u, lambda, mask, c), r);
    };
    out.push_back(finite_difference_check("attention_pool (masked)", loss, probes, settings,
                                          seed));
  }

  {
    Tensor<double> logits = random_tensor({5, 3}, rng);
    const std::vector<int> labels{0, 2, 1, 2, 2};
    const std::vector<double> weights{0.5, 2.0, 1.25};
    std::vector<GradProbe> probes{{"logits", &logits, Tensor<double>(logits.shape())}};
    softmax_xent(logits, labels, weights, &probes[0].analytic);
    auto loss = [&] { return softmax_xent<double>(logits, labels, weights, nullptr); };
    out.push_back(finite_difference_check("softmax_xent (weighted)", loss, probes, settings,
                                          seed));
  }
  return out;
}

GradCheckResult check_model(const ModelConfig& config, std::size_t batch, std::size_t frames,
                            std::size_t coordinates, std::uint64_t seed) {
  Model<double> model(config, seed);
  const std::size_t classes = 4;
  model.add_domain({"check", {"a", "b", "c", "d"}});
  Rng rng(derive_seed(seed, "model_check"));
  // Non-zero adapters so their path contributes to every gradient.
  for (auto& p : model.store().params()) {
    if (p.name.ends_with(".adapter")) {
      for (auto& v : p.value.values()) v = 0.1 * standard_normal(rng);
    }
  }
  Tensor<double> input = random_tensor(
      {batch, static_cast<std::size_t>(config.mel_bands), frames, 1}, rng);
  std::vector<std::size_t> valid(batch, frames);
  for (std::size_t b = 1; b < batch; ++b) valid[b] = std::max<std::size_t>(1, frames - 3 * b);
  std::vector<int> labels(batch);
  for (std::size_t b = 0; b < batch; ++b) labels[b] = static_cast<int>(b % classes);
  const std::vector<double> weights{1.5, 0.75, 1.0, 1.25};
  const std::uint64_t drop_seed = derive_seed(seed, "model_check", "dropout");

  auto run = [&](Tensor<double>* dlogits) {
    Rng drop(drop_seed);
    ForwardOptions<double> opt;
    opt.mode = Mode::Train;
    opt.dropout_rng = &drop;
    const Tensor<double> logits = model.forward(input, valid, "check", opt);
    return softmax_xent(logits, labels, weights, dlogits);
  };

  // Running statistics change on every train-mode forward but never feed
  // the train-mode output, so the loss stays a pure function of the weights.
  model.store().zero_grad();
  Tensor<double> dlogits;
  run(&dlogits);
  model.backward(dlogits);

  std::vector<GradProbe> probes;
  for (auto& p : model.store().params()) {
    if (!p.trainable()) continue;
    probes.push_back({p.name, &p.value, p.grad});
  }
  GradCheckSettings settings;
  settings.max_coordinates = coordinates;
  settings.min_per_tensor = 2;
  return finite_difference_check("full model (masked attention, adapters)",
                                 [&] { return run(nullptr); }, probes, settings, seed);
}

}  // namespace emonet
