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

#include "emonet/optim.hpp"

namespace emonet {

template <typename T>
Parameter<T>& ParameterStore<T>::add(const std::string& name, Tensor<T> value, ParamKind kind) {
  if (contains(name)) fail(ErrorKind::InvalidConfig, "parameter '" + name + "' already exists");
  Parameter<T> p;
  p.name = name;
  p.kind = kind;
  p.grad = Tensor<T>(value.shape());
  p.velocity = Tensor<T>(value.shape());
  p.value = std::move(value);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return params_.back();
}

template <typename T>
Parameter<T>& ParameterStore<T>::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::InvalidConfig, "no parameter named '" + name + "'");
  return params_[it->second];
}

template <typename T>
const Parameter<T>& ParameterStore<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::InvalidConfig, "no parameter named '" + name + "'");
  return params_[it->second];
}

template <typename T>
std::vector<std::string> ParameterStore<T>::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p.grad.fill(T{0});
}

template <typename T>
std::size_t ParameterStore<T>::count(const std::set<std::string>* names) const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (!p.trainable()) continue;
    if (names != nullptr && names->count(p.name) == 0) continue;
    n += p.value.size();
  }
  return n;
}

template <typename T>
void sgd_step(ParameterStore<T>& store, double lr, const SgdSettings& settings,
              const std::set<std::string>* names) {
  const T mom = static_cast<T>(settings.momentum);
  const T l2 = static_cast<T>(settings.l2);
  const T rate = static_cast<T>(lr);
  for (auto& p : store.params()) {
    if (!p.trainable()) continue;
    if (names != nullptr && names->count(p.name) == 0) continue;
    T* w = p.value.data();
    T* v = p.velocity.data();
    const T* g = p.grad.data();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      v[i] = mom * v[i] + (g[i] + l2 * w[i]);
      w[i] = w[i] - rate * v[i];
    }
  }
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template void sgd_step<float>(ParameterStore<float>&, double, const SgdSettings&,
                              const std::set<std::string>*);
template void sgd_step<double>(ParameterStore<double>&, double, const SgdSettings&,
                               const std::set<std::string>*);

}  // namespace emonet
