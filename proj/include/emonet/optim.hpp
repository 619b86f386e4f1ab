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

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "emonet/tensor.hpp"

namespace emonet {

enum class ParamKind {
  Weight,  // trainable
  Buffer,  // persistent state (BN running statistics), never optimised
};

template <typename T>
struct Parameter {
  std::string name;  // hierarchical, e.g. shared.stack2.block1.conv1.kernel
  ParamKind kind = ParamKind::Weight;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> velocity;

  bool trainable() const { return kind == ParamKind::Weight; }
};

/// Named parameters in creation order with name lookup.
template <typename T>
class ParameterStore {
 public:
  Parameter<T>& add(const std::string& name, Tensor<T> value, ParamKind kind = ParamKind::Weight);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Parameter<T>& get(const std::string& name);
  const Parameter<T>& get(const std::string& name) const;
  Tensor<T>& value(const std::string& name) { return get(name).value; }
  const Tensor<T>& value(const std::string& name) const { return get(name).value; }
  Tensor<T>& grad(const std::string& name) { return get(name).grad; }

  std::vector<Parameter<T>>& params() { return params_; }
  const std::vector<Parameter<T>>& params() const { return params_; }
  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }

  void zero_grad();
  /// Number of trainable scalars among `names` (all trainable when empty).
  std::size_t count(const std::set<std::string>* names = nullptr) const;

 private:
  std::vector<Parameter<T>> params_;
  std::map<std::string, std::size_t> index_;
};

struct SgdSettings {
  double momentum = 0.9;
  double l2 = 1e-6;
};

/// v <- momentum * v + (grad + l2 * param); param <- param - lr * v, for every
/// trainable parameter in `names` (all trainable parameters when null).
template <typename T>
void sgd_step(ParameterStore<T>& store, double lr, const SgdSettings& settings,
              const std::set<std::string>* names = nullptr);

}  // namespace emonet
