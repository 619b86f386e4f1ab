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
#include <set>
#include <string>
#include <vector>

#include "emonet/layers.hpp"
#include "emonet/optim.hpp"

namespace emonet {

struct ModelConfig {
  int mel_bands = 64;
  int stem_filters = 32;
  std::vector<int> stack_filters = {64, 128, 256};
  int blocks_per_stack = 2;
  int attention_dim = 256;
  double attention_lambda = 0.3;
  int head_units = 64;
  double dropout_rate = 0.5;
  bool attention_shared = true;
  bool adapters = true;
  bool stem_adapter = true;
  double bn_momentum = 0.99;
  double bn_epsilon = 1e-3;

  /// Throws InvalidConfig unless stack filters strictly double and the
  /// attention width equals the last stack's filter count.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct DomainSpec {
  std::string id;
  std::vector<std::string> labels;  // class index -> label name

  std::size_t classes() const { return labels.size(); }
  bool operator==(const DomainSpec&) const = default;
};

enum class Regime { Scratch, FullFinetune, HeadOnly, Adapters, MultiDomain };
Regime parse_regime(std::string_view text);
std::string_view to_string(Regime r);

/// Static description of one shared convolution.
struct ConvSpec {
  std::string name;  // e.g. "stack2.block1.conv1"
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t stride = 1;
};

struct ParamPartition {
  std::vector<std::string> shared;
  std::map<std::string, std::vector<std::string>> domain;  // domain id -> names
  std::size_t shared_count = 0;
  std::map<std::string, std::size_t> domain_count;
};

template <typename T>
struct ForwardOptions {
  Mode mode = Mode::Eval;
  /// Parameters that will receive gradients; BN layers whose gamma is not in
  /// the set run with running statistics. Null means everything trains.
  const std::set<std::string>* trainable = nullptr;
  Rng* dropout_rng = nullptr;
};

/// The residual-adapter ResNet: shared 3x3 convolutions, per-domain 1x1
/// adapters in parallel to every one of them, per-domain batch norms, an
/// attention pooling layer (shared or per domain) and per-domain heads.
template <typename T>
class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<ConvSpec>& convs() const { return convs_; }
  const std::vector<DomainSpec>& domains() const { return domains_; }
  const DomainSpec& domain(const std::string& id) const;
  bool has_domain(const std::string& id) const;

  ParameterStore<T>& store() { return store_; }
  const ParameterStore<T>& store() const { return store_; }

  /// Registers a domain with freshly initialised modules (zero adapters).
  void add_domain(const DomainSpec& spec);
  /// Zeroes the domain's adapters and re-draws its head with a new stream.
  void reinitialize_domain(const std::string& id, std::uint64_t stream);
  /// Copies backbone BN parameters and statistics (and per-domain attention,
  /// if any) from one domain to another.
  void copy_backbone_state(const std::string& from, const std::string& to);

  /// input [B, mel, T, 1] with per-item valid frame counts; returns logits.
  Tensor<T> forward(const Tensor<T>& input, const std::vector<std::size_t>& valid_frames,
                    const std::string& domain, const ForwardOptions<T>& options);
  /// Accumulates gradients for the last forward into the store. Only
  /// parameters in `trainable` (all when null) get gradients.
  void backward(const Tensor<T>& dlogits, const std::set<std::string>* trainable = nullptr);

  /// Output of the final BN+ReLU of the last forward, [B, mel/8, ceil(T/8), C].
  const Tensor<T>& backbone_output() const { return trace_.backbone; }
  const Tensor<T>& attention_weights() const { return trace_.attention.weights; }

  std::set<std::string> trainable_set(Regime regime, const std::string& domain) const;
  ParamPartition partition() const;

  static std::string shared_prefix() { return "shared."; }
  static std::string domain_prefix(const std::string& id) { return "domain." + id + "."; }

 private:
  struct ConvTrace {
    Tensor<T> input;
    TimeMask in_mask;
    TimeMask out_mask;
    BatchNormCache<T> bn;
    Tensor<T> activated;  // after BN (and ReLU where applied)
  };
  struct BlockTrace {
    ConvTrace conv1;
    ConvTrace conv2;
    Tensor<T> output;
    bool projected = false;
    Shape input_shape;
    TimeMask in_mask;
  };
  struct Trace {
    std::string domain;
    ConvTrace stem;
    std::vector<BlockTrace> blocks;
    BatchNormCache<T> final_bn;
    TimeMask final_mask;
    Tensor<T> backbone;
    AttentionCache<T> attention;
    Tensor<T> pooled;
    Tensor<T> head1;
    BatchNormCache<T> head_bn;
    Tensor<T> head_act;
    DropoutCache<T> dropout;
    Tensor<T> head_drop;
    Tensor<T> logits;
  };

  void init_param(const std::string& name, Shape shape, char kind, std::uint64_t stream);
  void add_bn(const std::string& prefix, std::size_t channels);
  std::string attention_prefix(const std::string& domain) const;
  bool wants(const std::set<std::string>* names, const std::string& name) const;

  Tensor<T> conv_unit_forward(ConvTrace& tr, const Tensor<T>& x, const TimeMask& mask,
                              const ConvSpec& spec, const std::string& domain, bool relu,
                              const ForwardOptions<T>& opt);
  Tensor<T> conv_unit_backward(ConvTrace& tr, Tensor<T> dy, const ConvSpec& spec,
                               const std::string& domain, bool relu,
                               const std::set<std::string>* trainable, bool need_dx);
  Tensor<T> bn_forward(const std::string& prefix, const Tensor<T>& x, const TimeMask& mask,
                       BatchNormCache<T>& cache, const ForwardOptions<T>& opt);
  Tensor<T> bn_backward(const std::string& prefix, const Tensor<T>& dy,
                        const BatchNormCache<T>& cache, const TimeMask& mask,
                        const std::set<std::string>* trainable);

  ModelConfig config_;
  std::uint64_t seed_;
  std::vector<ConvSpec> convs_;
  std::vector<DomainSpec> domains_;
  ParameterStore<T> store_;
  Trace trace_;
};

/// Mask at the backbone output for the given input frame counts: ceil(T/8).
TimeMask backbone_mask(const std::vector<std::size_t>& valid_frames, std::size_t reductions);

}  // namespace emonet
