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

#include "emonet/model.hpp"

#include <cmath>

namespace emonet {

void ModelConfig::validate() const {
  auto bad = [](const std::string& why) { fail(ErrorKind::InvalidConfig, "model: " + why); };
  if (mel_bands <= 0 || stem_filters <= 0) bad("mel_bands and stem_filters must be positive");
  if (stack_filters.empty()) bad("stack_filters is empty");
  if (blocks_per_stack < 1) bad("blocks_per_stack must be >= 1");
  int prev = stem_filters;
  for (int f : stack_filters) {
    if (f != 2 * prev) bad("stack_filters must double from stem_filters at every stack");
    prev = f;
  }
  if (attention_dim != stack_filters.back()) {
    bad("attention_dim must equal the last stack's filter count");
  }
  if (head_units <= 0) bad("head_units must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) bad("dropout_rate must be in [0, 1)");
}

Regime parse_regime(std::string_view text) {
  if (text == "scratch") return Regime::Scratch;
  if (text == "full_finetune" || text == "full") return Regime::FullFinetune;
  if (text == "head_only" || text == "head") return Regime::HeadOnly;
  if (text == "adapters") return Regime::Adapters;
  if (text == "multi_domain") return Regime::MultiDomain;
  fail(ErrorKind::UnknownRegime, "unknown regime '" + std::string(text) + "'");
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Scratch: return "scratch";
    case Regime::FullFinetune: return "full_finetune";
    case Regime::HeadOnly: return "head_only";
    case Regime::Adapters: return "adapters";
    case Regime::MultiDomain: return "multi_domain";
  }
  return "scratch";
}

TimeMask backbone_mask(const std::vector<std::size_t>& valid_frames, std::size_t reductions) {
  TimeMask m = valid_frames;
  for (std::size_t i = 0; i < reductions; ++i) m = downsample_mask(m);
  return m;
}

template <typename T>
Model<T>::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {
  config_.validate();
  const auto stem = static_cast<std::size_t>(config_.stem_filters);
  convs_.push_back({"stem.conv", 1, stem, 1});
  std::size_t prev = stem;
  for (std::size_t s = 0; s < config_.stack_filters.size(); ++s) {
    const auto filters = static_cast<std::size_t>(config_.stack_filters[s]);
    for (int b = 0; b < config_.blocks_per_stack; ++b) {
      const std::string block =
          "stack" + std::to_string(s + 1) + ".block" + std::to_string(b + 1) + ".";
      convs_.push_back({block + "conv1", prev, filters, b == 0 ? 2U : 1U});
      convs_.push_back({block + "conv2", filters, filters, 1});
      prev = filters;
    }
  }
  for (const auto& c : convs_) {
    init_param(shared_prefix() + c.name + ".kernel", {3, 3, c.in_channels, c.out_channels}, 'h', 0);
  }
  if (config_.attention_shared) {
    const auto ch = static_cast<std::size_t>(config_.stack_filters.back());
    const auto att = static_cast<std::size_t>(config_.attention_dim);
    init_param("shared.attention.W", {ch, att}, 'h', 0);
    init_param("shared.attention.b", {att}, 'z', 0);
    init_param("shared.attention.u", {att}, 'u', 0);
  }
}

template <typename T>
void Model<T>::init_param(const std::string& name, Shape shape, char kind, std::uint64_t stream) {
  Tensor<T> value(shape);
  Rng rng(derive_seed(seed_, name, stream));
  switch (kind) {
    case 'h': {  // He normal, fan_in = all but the last axis
      const std::size_t fan_in = value.size() / shape.back();
      const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
      for (auto& v : value.values()) v = static_cast<T>(std * standard_normal(rng));
      break;
    }
    case 'u': {  // N(0, 1/A)
      const double std = 1.0 / std::sqrt(static_cast<double>(shape[0]));
      for (auto& v : value.values()) v = static_cast<T>(std * standard_normal(rng));
      break;
    }
    case 'o':
      value.fill(T{1});
      break;
    default:
      break;
  }
  if (store_.contains(name)) {
    auto& p = store_.get(name);
    p.value = std::move(value);
    p.grad.fill(T{0});
    p.velocity.fill(T{0});
    return;
  }
  const bool buffer = name.ends_with(".moving_mean") || name.ends_with(".moving_var");
  store_.add(name, std::move(value), buffer ? ParamKind::Buffer : ParamKind::Weight);
}

template <typename T>
void Model<T>::add_bn(const std::string& prefix, std::size_t channels) {
  init_param(prefix + "gamma", {channels}, 'o', 0);
  init_param(prefix + "beta", {channels}, 'z', 0);
  init_param(prefix + "moving_mean", {channels}, 'z', 0);
  init_param(prefix + "moving_var", {channels}, 'o', 0);
}

template <typename T>
bool Model<T>::has_domain(const std::string& id) const {
  for (const auto& d : domains_) {
    if (d.id == id) return true;
  }
  return false;
}

template <typename T>
const DomainSpec& Model<T>::domain(const std::string& id) const {
  for (const auto& d : domains_) {
    if (d.id == id) return d;
  }
  fail(ErrorKind::UnknownDomain, "domain '" + id + "' is not registered");
}

template <typename T>
void Model<T>::add_domain(const DomainSpec& spec) {
  if (spec.id.empty() || spec.id.find('.') != std::string::npos) {
    fail(ErrorKind::InvalidConfig, "domain id '" + spec.id + "' must be non-empty without dots");
  }
  if (has_domain(spec.id)) fail(ErrorKind::DuplicateDomain, "domain '" + spec.id + "' exists");
  if (spec.classes() < 2) fail(ErrorKind::InvalidConfig, "domain needs at least two classes");
  domains_.push_back(spec);
  const std::string p = domain_prefix(spec.id);
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const auto& c = convs_[i];
    if (config_.adapters && (i > 0 || config_.stem_adapter)) {
      init_param(p + c.name + ".adapter", {1, 1, c.in_channels, c.out_channels}, 'z', 0);
    }
    add_bn(p + c.name + ".bn.", c.out_channels);
  }
  const auto ch = static_cast<std::size_t>(config_.stack_filters.back());
  add_bn(p + "final_bn.", ch);
  if (!config_.attention_shared) {
    const auto att = static_cast<std::size_t>(config_.attention_dim);
    init_param(p + "attention.W", {ch, att}, 'h', 0);
    init_param(p + "attention.b", {att}, 'z', 0);
    init_param(p + "attention.u", {att}, 'u', 0);
  }
  const auto units = static_cast<std::size_t>(config_.head_units);
  init_param(p + "head.dense1.kernel", {ch, units}, 'h', 0);
  init_param(p + "head.dense1.bias", {units}, 'z', 0);
  add_bn(p + "head.bn.", units);
  init_param(p + "head.dense2.kernel", {units, spec.classes()}, 'h', 0);
  init_param(p + "head.dense2.bias", {spec.classes()}, 'z', 0);
}

template <typename T>
void Model<T>::reinitialize_domain(const std::string& id, std::uint64_t stream) {
  const DomainSpec spec = domain(id);
  const std::string p = domain_prefix(id);
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const auto& c = convs_[i];
    if (config_.adapters && (i > 0 || config_.stem_adapter)) {
      init_param(p + c.name + ".adapter", {1, 1, c.in_channels, c.out_channels}, 'z', stream);
    }
  }
  const auto ch = static_cast<std::size_t>(config_.stack_filters.back());
  const auto units = static_cast<std::size_t>(config_.head_units);
  init_param(p + "head.dense1.kernel", {ch, units}, 'h', stream);
  init_param(p + "head.dense1.bias", {units}, 'z', stream);
  add_bn(p + "head.bn.", units);
  init_param(p + "head.dense2.kernel", {units, spec.classes()}, 'h', stream);
  init_param(p + "head.dense2.bias", {spec.classes()}, 'z', stream);
}

template <typename T>
void Model<T>::copy_backbone_state(const std::string& from, const std::string& to) {
  domain(from);
  domain(to);
  const std::string src = domain_prefix(from);
  const std::string dst = domain_prefix(to);
  for (auto& p : store_.params()) {
    if (!p.name.starts_with(dst)) continue;
    const std::string rest = p.name.substr(dst.size());
    const bool backbone_bn = rest.find(".bn.") != std::string::npos && !rest.starts_with("head.");
    const bool final_bn = rest.starts_with("final_bn.");
    const bool attention = rest.starts_with("attention.");
    if (!(backbone_bn || final_bn || attention)) continue;
    p.value = store_.value(src + rest);
    p.grad.fill(T{0});
    p.velocity.fill(T{0});
  }
}

template <typename T>
std::string Model<T>::attention_prefix(const std::string& domain) const {
  return config_.attention_shared ? std::string("shared.attention.")
                                  : domain_prefix(domain) + "attention.";
}

template <typename T>
bool Model<T>::wants(const std::set<std::string>* names, const std::string& name) const {
  if (!store_.contains(name) || !store_.get(name).trainable()) return false;
  return names == nullptr || names->count(name) != 0;
}

template <typename T>
Tensor<T> Model<T>::bn_forward(const std::string& prefix, const Tensor<T>& x,
                               const TimeMask& mask, BatchNormCache<T>& cache,
                               const ForwardOptions<T>& opt) {
  Mode mode = opt.mode;
  if (mode == Mode::Train && !wants(opt.trainable, prefix + "gamma")) mode = Mode::Eval;
  BatchNormSettings settings{config_.bn_momentum, config_.bn_epsilon};
  return batch_norm(x, store_.value(prefix + "gamma"), store_.value(prefix + "beta"),
                    store_.value(prefix + "moving_mean"), store_.value(prefix + "moving_var"),
                    mode, mask, settings, cache);
}

template <typename T>
Tensor<T> Model<T>::bn_backward(const std::string& prefix, const Tensor<T>& dy,
                                const BatchNormCache<T>& cache, const TimeMask& mask,
                                const std::set<std::string>* trainable) {
  Tensor<T>* dgamma = wants(trainable, prefix + "gamma") ? &store_.grad(prefix + "gamma") : nullptr;
  Tensor<T>* dbeta = wants(trainable, prefix + "beta") ? &store_.grad(prefix + "beta") : nullptr;
  return batch_norm_backward(dy, store_.value(prefix + "gamma"), cache, mask, dgamma, dbeta);
}

template <typename T>
Tensor<T> Model<T>::conv_unit_forward(ConvTrace& tr, const Tensor<T>& x, const TimeMask& mask,
                                      const ConvSpec& spec, const std::string& domain, bool relu,
                                      const ForwardOptions<T>& opt) {
  tr.input = x;
  tr.in_mask = mask;
  tr.out_mask = spec.stride == 2 ? downsample_mask(mask) : mask;
  Tensor<T> y = conv2d(x, store_.value(shared_prefix() + spec.name + ".kernel"), spec.stride);
  const std::string adapter = domain_prefix(domain) + spec.name + ".adapter";
  if (store_.contains(adapter)) {
    const Tensor<T> ya = conv2d(x, store_.value(adapter), spec.stride);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += ya[i];
  }
  Tensor<T> z = bn_forward(domain_prefix(domain) + spec.name + ".bn.", y, tr.out_mask, tr.bn, opt);
  if (relu) relu_inplace(z);
  tr.activated = z;
  return z;
}

template <typename T>
Tensor<T> Model<T>::conv_unit_backward(ConvTrace& tr, Tensor<T> dy, const ConvSpec& spec,
                                       const std::string& domain, bool relu,
                                       const std::set<std::string>* trainable, bool need_dx) {
  if (relu) relu_backward_inplace(dy, tr.activated);
  const Tensor<T> dconv =
      bn_backward(domain_prefix(domain) + spec.name + ".bn.", dy, tr.bn, tr.out_mask, trainable);
  const std::string kernel = shared_prefix() + spec.name + ".kernel";
  const std::string adapter = domain_prefix(domain) + spec.name + ".adapter";
  Tensor<T> dx;
  conv2d_backward(tr.input, store_.value(kernel), spec.stride, dconv, need_dx ? &dx : nullptr,
                  wants(trainable, kernel) ? &store_.grad(kernel) : nullptr);
  if (store_.contains(adapter) && (need_dx || wants(trainable, adapter))) {
    Tensor<T> dxa;
    conv2d_backward(tr.input, store_.value(adapter), spec.stride, dconv,
                    need_dx ? &dxa : nullptr,
                    wants(trainable, adapter) ? &store_.grad(adapter) : nullptr);
    if (need_dx) {
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dxa[i];
    }
  }
  return dx;
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input, const std::vector<std::size_t>& valid_frames,
                            const std::string& domain_id, const ForwardOptions<T>& opt) {
  domain(domain_id);
  if (input.rank() != 4 || input.dim(1) != static_cast<std::size_t>(config_.mel_bands) ||
      input.dim(3) != 1 || input.dim(0) != valid_frames.size()) {
    fail(ErrorKind::ShapeMismatch, "model input " + shape_string(input.shape()) + " with " +
                                       std::to_string(valid_frames.size()) + " frame counts");
  }
  Trace& tr = trace_;
  tr = Trace{};
  tr.domain = domain_id;
  TimeMask mask(valid_frames.size());
  for (std::size_t b = 0; b < valid_frames.size(); ++b) {
    mask[b] = std::min(valid_frames[b], input.dim(2));
  }

  Tensor<T> x = input;
  apply_time_mask(x, mask);
  Tensor<T> cur = conv_unit_forward(tr.stem, x, mask, convs_[0], domain_id, false, opt);
  std::size_t idx = 1;
  for (std::size_t s = 0; s < config_.stack_filters.size(); ++s) {
    for (int b = 0; b < config_.blocks_per_stack; ++b) {
      BlockTrace bt;
      bt.input_shape = cur.shape();
      bt.in_mask = mask;
      bt.projected = b == 0;
      const ConvSpec& c1 = convs_[idx];
      const ConvSpec& c2 = convs_[idx + 1];
      idx += 2;
      Tensor<T> a1 = conv_unit_forward(bt.conv1, cur, mask, c1, domain_id, true, opt);
      const TimeMask m1 = bt.conv1.out_mask;
      Tensor<T> out = conv_unit_forward(bt.conv2, a1, m1, c2, domain_id, false, opt);
      if (bt.projected) {
        const Tensor<T> pooled = avg_pool2x2(cur, mask);
        const std::size_t cin = pooled.dim(3);
        const std::size_t cout = out.dim(3);
        const std::size_t cells = pooled.size() / cin;
        for (std::size_t i = 0; i < cells; ++i) {
          for (std::size_t c = 0; c < cin; ++c) out[i * cout + c] += pooled[i * cin + c];
        }
      } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += cur[i];
      }
      relu_inplace(out);
      bt.output = out;
      tr.blocks.push_back(std::move(bt));
      cur = std::move(out);
      mask = m1;
    }
  }

  const std::string dp = domain_prefix(domain_id);
  tr.final_mask = mask;
  tr.backbone = bn_forward(dp + "final_bn.", cur, mask, tr.final_bn, opt);
  relu_inplace(tr.backbone);

  const std::string ap = attention_prefix(domain_id);
  tr.pooled = attention_pool(tr.backbone, store_.value(ap + "W"), store_.value(ap + "b"),
                             store_.value(ap + "u"), config_.attention_lambda, mask, tr.attention);

  tr.head1 = dense(tr.pooled, store_.value(dp + "head.dense1.kernel"),
                   store_.value(dp + "head.dense1.bias"));
  tr.head_act = bn_forward(dp + "head.bn.", tr.head1, {}, tr.head_bn, opt);
  relu_inplace(tr.head_act);
  Rng fallback(0);
  tr.head_drop = dropout(tr.head_act, config_.dropout_rate, opt.mode,
                         opt.dropout_rng ? *opt.dropout_rng : fallback, tr.dropout);
  tr.logits = dense(tr.head_drop, store_.value(dp + "head.dense2.kernel"),
                    store_.value(dp + "head.dense2.bias"));
  return tr.logits;
}

template <typename T>
void Model<T>::backward(const Tensor<T>& dlogits, const std::set<std::string>* trainable) {
  Trace& tr = trace_;
  if (tr.logits.empty()) fail(ErrorKind::ShapeMismatch, "backward called before forward");
  const std::string dp = domain_prefix(tr.domain);
  const std::string ap = attention_prefix(tr.domain);
  auto grad_if = [&](const std::string& name) -> Tensor<T>* {
    return wants(trainable, name) ? &store_.grad(name) : nullptr;
  };

  // need_below[i]: some parameter of conv unit i or an earlier one trains.
  std::vector<bool> need_below(convs_.size(), false);
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const std::string& n = convs_[i].name;
    bool any = wants(trainable, shared_prefix() + n + ".kernel") ||
               wants(trainable, dp + n + ".adapter") || wants(trainable, dp + n + ".bn.gamma") ||
               wants(trainable, dp + n + ".bn.beta");
    need_below[i] = any || (i > 0 && need_below[i - 1]);
  }
  const bool backbone_needed = need_below.back() || wants(trainable, dp + "final_bn.gamma") ||
                               wants(trainable, dp + "final_bn.beta");
  const bool attention_needed =
      backbone_needed || wants(trainable, ap + "W") || wants(trainable, ap + "b") ||
      wants(trainable, ap + "u");

  Tensor<T> d = dense_backward(tr.head_drop, store_.value(dp + "head.dense2.kernel"), dlogits,
                               grad_if(dp + "head.dense2.kernel"), grad_if(dp + "head.dense2.bias"));
  d = dropout_backward(d, tr.dropout);
  relu_backward_inplace(d, tr.head_act);
  d = bn_backward(dp + "head.bn.", d, tr.head_bn, {}, trainable);
  d = dense_backward(tr.pooled, store_.value(dp + "head.dense1.kernel"), d,
                     grad_if(dp + "head.dense1.kernel"), grad_if(dp + "head.dense1.bias"),
                     attention_needed);
  if (!attention_needed) return;

  d = attention_pool_backward(tr.backbone, store_.value(ap + "W"), store_.value(ap + "u"),
                              config_.attention_lambda, tr.final_mask, tr.attention, d,
                              grad_if(ap + "W"), grad_if(ap + "b"), grad_if(ap + "u"),
                              backbone_needed);
  if (!backbone_needed) return;
  relu_backward_inplace(d, tr.backbone);
  d = bn_backward(dp + "final_bn.", d, tr.final_bn, tr.final_mask, trainable);

  std::size_t idx = convs_.size();
  for (std::size_t k = tr.blocks.size(); k-- > 0;) {
    BlockTrace& bt = tr.blocks[k];
    idx -= 2;
    const ConvSpec& c1 = convs_[idx];
    const ConvSpec& c2 = convs_[idx + 1];
    if (!need_below[idx + 1]) return;
    relu_backward_inplace(d, bt.output);
    const bool below = need_below[idx - 1];
    Tensor<T> da1 = conv_unit_backward(bt.conv2, d, c2, tr.domain, false, trainable, true);
    Tensor<T> dx = conv_unit_backward(bt.conv1, std::move(da1), c1, tr.domain, true, trainable,
                                      below);
    if (!below) return;
    if (bt.projected) {
      const std::size_t cin = bt.input_shape[3];
      const std::size_t cout = d.dim(3);
      Tensor<T> dpool({d.dim(0), d.dim(1), d.dim(2), cin});
      const std::size_t cells = dpool.size() / cin;
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t c = 0; c < cin; ++c) dpool[i * cin + c] = d[i * cout + c];
      }
      const Tensor<T> dsc = avg_pool2x2_backward(dpool, bt.input_shape, bt.in_mask);
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dsc[i];
    } else {
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += d[i];
    }
    d = std::move(dx);
  }
  conv_unit_backward(tr.stem, std::move(d), convs_[0], tr.domain, false, trainable, false);
}

template <typename T>
std::set<std::string> Model<T>::trainable_set(Regime regime, const std::string& id) const {
  domain(id);
  const std::string dp = domain_prefix(id);
  std::set<std::string> out;
  for (const auto& p : store_.params()) {
    if (!p.trainable()) continue;
    const bool shared = p.name.starts_with(shared_prefix());
    const bool own = p.name.starts_with(dp);
    switch (regime) {
      case Regime::Scratch:
      case Regime::FullFinetune:
      case Regime::MultiDomain:
        if (shared || own) out.insert(p.name);
        break;
      case Regime::Adapters:
        if (own) out.insert(p.name);
        break;
      case Regime::HeadOnly:
        if (p.name.starts_with(dp + "head.")) out.insert(p.name);
        break;
    }
  }
  return out;
}

template <typename T>
ParamPartition Model<T>::partition() const {
  ParamPartition part;
  for (const auto& p : store_.params()) {
    const std::size_t n = p.trainable() ? p.value.size() : 0;
    if (p.name.starts_with(shared_prefix())) {
      part.shared.push_back(p.name);
      part.shared_count += n;
      continue;
    }
    for (const auto& d : domains_) {
      if (p.name.starts_with(domain_prefix(d.id))) {
        part.domain[d.id].push_back(p.name);
        part.domain_count[d.id] += n;
        break;
      }
    }
  }
  return part;
}

template class Model<float>;
template class Model<double>;

}  // namespace emonet
