#ifndef SIGNBENCH_NN_NETWORK_HPP
#define SIGNBENCH_NN_NETWORK_HPP

#include <memory>
#include <variant>
#include <vector>

#include "signbench/binio.hpp"
#include "signbench/nn/layers.hpp"

namespace signbench {

// Declarative layer list; the runtime network is built from it by chaining
// shapes from the input.

struct ConvSpec {
  std::size_t filters;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  Padding padding = Padding::same;
};
struct BatchNormSpec {
  double epsilon = 1e-5;
  double momentum = 0.9;
};
struct MaxPoolSpec {
  std::size_t size = 2;
  std::size_t stride = 2;
};
struct DenseSpec {
  std::size_t units;
};
struct DropoutSpec {
  double keep_prob = 0.5;
};
struct ActivationSpec {
  ActivationKind kind;
};
struct FlattenSpec {};

using LayerSpec = std::variant<ConvSpec, BatchNormSpec, MaxPoolSpec, DenseSpec, DropoutSpec,
                               ActivationSpec, FlattenSpec>;

struct NetworkSpec {
  std::size_t input_h = 128;
  std::size_t input_w = 128;
  std::size_t input_c = 3;
  std::vector<LayerSpec> layers;
  std::size_t class_count = 0;
};

/// The benchmark CNN: conv16–BN–act–pool, then two double-conv stages at 32
/// and 64 filters, then FC 512/256/128 (each BN–act–dropout) and the class
/// layer under softmax. 128×128×3 input; three pools take the spatial side
/// 128→64→32→16.
inline NetworkSpec build_proposed_network(std::size_t class_count,
                                          ActivationKind act = ActivationKind::mish,
                                          double dropout_keep = 0.5) {
  if (class_count < 2) throw Error("network needs at least 2 classes");
  NetworkSpec spec;
  spec.class_count = class_count;
  auto conv_bn_act = [&](std::size_t filters) {
    spec.layers.push_back(ConvSpec{filters});
    spec.layers.push_back(BatchNormSpec{});
    spec.layers.push_back(ActivationSpec{act});
  };
  conv_bn_act(16);
  spec.layers.push_back(MaxPoolSpec{});
  conv_bn_act(32);
  conv_bn_act(32);
  spec.layers.push_back(MaxPoolSpec{});
  conv_bn_act(64);
  conv_bn_act(64);
  spec.layers.push_back(MaxPoolSpec{});
  spec.layers.push_back(FlattenSpec{});
  for (std::size_t units : {512u, 256u, 128u}) {
    spec.layers.push_back(DenseSpec{units});
    spec.layers.push_back(BatchNormSpec{});
    spec.layers.push_back(ActivationSpec{act});
    spec.layers.push_back(DropoutSpec{dropout_keep});
  }
  spec.layers.push_back(DenseSpec{class_count});
  spec.layers.push_back(ActivationSpec{ActivationKind::softmax});
  return spec;
}

/// Runtime network: instantiated layers with parameters and optimizer-ready
/// gradient storage. Forward/backward mutate per-layer caches, so a network
/// instance is single-writer; weight snapshots are plain tensor copies.
template <typename T>
class Network {
 public:
  Network(const NetworkSpec& spec, SeededRng rng) : spec_(spec) {
    Shape shape = {1, spec.input_h, spec.input_w, spec.input_c};
    std::size_t index = 0;
    for (const auto& ls : spec.layers) {
      SeededRng stream = rng.substream(index++);
      std::unique_ptr<Layer<T>> layer;
      if (auto* conv = std::get_if<ConvSpec>(&ls)) {
        if (shape.size() != 4)
          throw Error("conv2d needs N×H×W×C input, got " + shape_str(shape));
        layer = std::make_unique<Conv2dLayer<T>>(shape[3], conv->filters, conv->kernel,
                                                 conv->stride, conv->padding, stream);
      } else if (auto* bn = std::get_if<BatchNormSpec>(&ls)) {
        layer = std::make_unique<BatchNormLayer<T>>(shape.back(), bn->epsilon, bn->momentum);
      } else if (auto* pool = std::get_if<MaxPoolSpec>(&ls)) {
        layer = std::make_unique<MaxPoolLayer<T>>(pool->size, pool->stride);
      } else if (auto* dense = std::get_if<DenseSpec>(&ls)) {
        if (shape.size() != 2)
          throw Error("dense needs flattened N×D input, got " + shape_str(shape));
        layer = std::make_unique<DenseLayer<T>>(shape[1], dense->units, stream);
      } else if (auto* drop = std::get_if<DropoutSpec>(&ls)) {
        layer = std::make_unique<DropoutLayer<T>>(drop->keep_prob, stream);
      } else if (auto* act = std::get_if<ActivationSpec>(&ls)) {
        layer = std::make_unique<ActivationLayer<T>>(act->kind);
      } else {
        layer = std::make_unique<FlattenLayer<T>>();
      }
      shape = layer->output_shape(shape);
      layers_.push_back(std::move(layer));
    }
    if (spec.class_count > 0 && (shape.size() != 2 || shape[1] != spec.class_count))
      throw Error("network output " + shape_str(shape) + " does not match class count " +
                  std::to_string(spec.class_count));
  }

  const NetworkSpec& spec() const { return spec_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }

  bool has_trailing_softmax() const {
    if (layers_.empty()) return false;
    auto* act = dynamic_cast<ActivationLayer<T>*>(layers_.back().get());
    return act && act->activation() == ActivationKind::softmax;
  }

  /// Runs every layer (softmax included): class probabilities.
  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> cur = x;
    for (auto& layer : layers_) cur = layer->forward(cur, mode);
    return cur;
  }

  /// Runs all layers but a trailing softmax; pair with the fused
  /// softmax_cross_entropy loss.
  Tensor<T> forward_logits(const Tensor<T>& x, Mode mode) {
    Tensor<T> cur = x;
    std::size_t stop = layers_.size() - (has_trailing_softmax() ? 1 : 0);
    for (std::size_t i = 0; i < stop; ++i) cur = layers_[i]->forward(cur, mode);
    return cur;
  }

  /// Backpropagates a logits-space gradient, accumulating weight gradients.
  Tensor<T> backward_from_logits(const Tensor<T>& dlogits) {
    Tensor<T> cur = dlogits;
    std::size_t stop = layers_.size() - (has_trailing_softmax() ? 1 : 0);
    for (std::size_t i = stop; i-- > 0;) cur = layers_[i]->backward(cur);
    return cur;
  }

  std::vector<Tensor<T>*> parameters() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_)
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }

  std::vector<Tensor<T>*> gradients() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_)
      for (auto* g : l->grads()) out.push_back(g);
    return out;
  }

  std::vector<Tensor<T>*> state() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_)
      for (auto* s : l->state()) out.push_back(s);
    return out;
  }

  void zero_grads() {
    for (auto& l : layers_) l->zero_grads();
  }

  /// Copies of all learned parameters plus BN running stats.
  std::vector<Tensor<T>> snapshot_weights() {
    std::vector<Tensor<T>> out;
    for (auto* p : parameters()) out.push_back(*p);
    for (auto* s : state()) out.push_back(*s);
    return out;
  }

  void restore_weights(const std::vector<Tensor<T>>& snapshot) {
    auto params = parameters();
    auto st = state();
    if (snapshot.size() != params.size() + st.size())
      throw Error("weight snapshot does not match network");
    std::size_t i = 0;
    for (auto* p : params) *p = snapshot[i++];
    for (auto* s : st) *s = snapshot[i++];
  }

  void set_dropout_masks_frozen(bool freeze) {
    for (auto& l : layers_)
      if (auto* drop = dynamic_cast<DropoutLayer<T>*>(l.get())) drop->set_freeze_mask(freeze);
  }

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// --------------------------------------------------------------------------
// Checkpoint: "SBNN" magic, version, layer count, then per layer a kind id
// and shape-prefixed f32 tensor blocks (params plus BN running stats).
// --------------------------------------------------------------------------

constexpr char kCheckpointMagic[4] = {'S', 'B', 'N', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {
inline std::uint32_t layer_kind_id(const std::string& kind) {
  if (kind == "conv2d") return 1;
  if (kind == "batchnorm") return 2;
  if (kind == "maxpool") return 3;
  if (kind == "dense") return 4;
  if (kind == "dropout") return 5;
  if (kind == "flatten") return 6;
  if (kind == "relu") return 7;
  if (kind == "swish") return 8;
  if (kind == "mish") return 9;
  if (kind == "softmax") return 10;
  return 0;
}
}  // namespace detail

template <typename T>
void save_checkpoint(Network<T>& net, const std::string& path) {
  auto os = binio::open_out(path);
  binio::write_magic(os, kCheckpointMagic);
  binio::write_u32(os, kCheckpointVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(net.layer_count()));
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    auto& layer = net.layer(i);
    binio::write_u32(os, detail::layer_kind_id(layer.kind()));
    auto params = layer.params();
    auto state = layer.state();
    binio::write_u32(os, static_cast<std::uint32_t>(params.size() + state.size()));
    auto write_tensor = [&os](const Tensor<T>* t) {
      binio::write_u32(os, static_cast<std::uint32_t>(t->rank()));
      for (std::size_t d = 0; d < t->rank(); ++d)
        binio::write_u32(os, static_cast<std::uint32_t>(t->dim(d)));
      for (std::size_t j = 0; j < t->size(); ++j)
        binio::write_f32(os, static_cast<float>((*t)[j]));
    };
    for (auto* p : params) write_tensor(p);
    for (auto* s : state) write_tensor(s);
  }
  if (!os) throw DataError("failed writing checkpoint: " + path);
}

/// Loads weights into an already-built network; layer kinds and tensor
/// shapes must match the checkpoint exactly.
template <typename T>
void load_checkpoint(Network<T>& net, const std::string& path) {
  auto is = binio::open_in(path);
  binio::expect_magic(is, kCheckpointMagic, "checkpoint");
  std::uint32_t version = binio::read_u32(is);
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  std::uint32_t layer_count = binio::read_u32(is);
  if (layer_count != net.layer_count())
    throw DataError("checkpoint has " + std::to_string(layer_count) + " layers, network has " +
                    std::to_string(net.layer_count()));
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    auto& layer = net.layer(i);
    std::uint32_t kind = binio::read_u32(is);
    if (kind != detail::layer_kind_id(layer.kind()))
      throw DataError("checkpoint layer " + std::to_string(i) + " kind mismatch");
    auto params = layer.params();
    auto state = layer.state();
    std::uint32_t tensors = binio::read_u32(is);
    if (tensors != params.size() + state.size())
      throw DataError("checkpoint layer " + std::to_string(i) + " tensor count mismatch");
    auto read_tensor = [&is, i](Tensor<T>* t) {
      std::uint32_t rank = binio::read_u32(is);
      Shape shape(rank);
      for (auto& d : shape) d = binio::read_u32(is);
      if (shape != t->shape())
        throw DataError("checkpoint layer " + std::to_string(i) + " tensor shape mismatch: " +
                        shape_str(shape) + " vs " + shape_str(t->shape()));
      for (std::size_t j = 0; j < t->size(); ++j)
        (*t)[j] = static_cast<T>(binio::read_f32(is));
    };
    for (auto* p : params) read_tensor(p);
    for (auto* s : state) read_tensor(s);
  }
}

}  // namespace signbench

#endif  // SIGNBENCH_NN_NETWORK_HPP
