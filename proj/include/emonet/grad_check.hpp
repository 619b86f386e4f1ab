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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "emonet/model.hpp"

namespace emonet {

struct GradCheckSettings {
  double step = 1e-5;
  double tolerance = 1e-5;
  /// Above this many coordinates a seeded random subset is checked.
  std::size_t max_coordinates = 10000;
  std::size_t min_per_tensor = 4;
  /// Multiples of `step` tried, in order, for a coordinate that fails.
  std::vector<double> step_ladder{0.1, 0.01, 10.0};
};

struct GradCheckResult {
  std::string name;
  double max_relative_error = 0.0;
  std::string worst;  // "param[index]" of the worst coordinate
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  std::size_t restepped = 0;  // coordinates re-measured off the primary step
  bool passed = false;
};

/// One differentiable input: the value perturbed in place and its analytic
/// gradient.
struct GradProbe {
  std::string name;
  Tensor<double>* value = nullptr;
  Tensor<double> analytic;
};

double relative_error(double analytic, double numeric);

/// Central differences of `loss` against every probe coordinate (or a seeded
/// subset, proportional to tensor size, once the total exceeds the limit).
GradCheckResult finite_difference_check(const std::string& name,
                                        const std::function<double()>& loss,
                                        std::vector<GradProbe>& probes,
                                        const GradCheckSettings& settings, std::uint64_t seed);

/// Checks every layer op (conv, BN, ReLU, pooling, dense, dropout, attention
/// with mask, weighted cross entropy) on small random inputs.
std::vector<GradCheckResult> check_ops(std::uint64_t seed, const GradCheckSettings& settings = {});

/// Checks the whole network (masked input, non-zero adapters, train-mode BN,
/// fixed dropout mask) against a weighted cross-entropy loss.
GradCheckResult check_model(const ModelConfig& config, std::size_t batch, std::size_t frames,
                            std::size_t coordinates, std::uint64_t seed);

}  // namespace emonet
