#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "fgl/rng.hpp"
#include "fgl/tensor.hpp"

namespace fgl {

enum class LayerKind : uint8_t {
  Conv3x3Relu = 1,
  MaxPool2x2 = 2,
  Upsample2x = 3,
  ConcatSkip = 4,
  Conv1x1Sigmoid = 5,
};

/// One stage of the architecture descriptor. Non-parametric stages carry
/// kh = kw = 0; c_in/c_out track the channel chain for validation. The skip
/// pairing is positional: each MaxPool2x2 pushes its input, each ConcatSkip
/// pops the most recent one.
struct LayerDesc {
  LayerKind kind;
  int kh = 0, kw = 0;
  int c_in = 0, c_out = 0;
};

/// Two-stage U-Net on a square input: base channels at full resolution,
/// doubled at each of the two down-sampling stages (base/2*base/4*base),
/// nearest-neighbor upsampling with skip concatenations on the way back,
/// and a final 1x1 sigmoid head.
std::vector<LayerDesc> make_unet_arch(int base_channels);

/// Throws if the channel chain (including skip concatenations) is broken.
void validate_arch(const std::vector<LayerDesc>& arch);

template <typename T>
struct ModelParamsT {
  std::vector<LayerDesc> arch;
  std::vector<ConvFilter<T>> convs;  // one per parametric stage, arch order

  size_t param_count() const {
    size_t total = 0;
    for (const auto& f : convs) total += f.w.size() + f.b.size();
    return total;
  }
};
using ModelParams = ModelParamsT<float>;

/// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
template <typename T>
ModelParamsT<T> init_params(const std::vector<LayerDesc>& arch, RngSeed seed);

template <typename T>
struct ForwardCacheT {
  Tensor3T<T> input;
  std::vector<Tensor3T<T>> outputs;           // one per arch stage
  std::vector<std::vector<int>> pool_argmax;  // one per MaxPool2x2 stage
};
using ForwardCache = ForwardCacheT<float>;

/// Runs the stage chain; fills cache (when given) for the backward pass.
template <typename T>
Tensor3T<T> forward(const ModelParamsT<T>& params, const Tensor3T<T>& x,
                    ForwardCacheT<T>* cache = nullptr);

template <typename T>
struct GradientsT {
  std::vector<ConvFilter<T>> convs;  // same shapes as ModelParamsT::convs
};
using Gradients = GradientsT<float>;

/// Exact analytic gradients for every kernel weight and bias by reverse
/// traversal of the cached stage outputs.
template <typename T>
GradientsT<T> backward(const ModelParamsT<T>& params,
                       const ForwardCacheT<T>& cache,
                       const Tensor3T<T>& loss_grad);

/// Mean binary cross entropy with predictions clamped to
/// [1e-7, 1-1e-7]; returns (loss, d loss / d pred).
template <typename T>
std::pair<double, Tensor3T<T>> bce_loss(const Tensor3T<T>& pred,
                                        const Tensor3T<T>& target);

constexpr double kBceClamp = 1e-7;

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamStateT {
  int64_t t = 0;
  std::vector<T> m;  // flattened, params.param_count() entries
  std::vector<T> v;
  AdamConfig hp;
};
using AdamState = AdamStateT<float>;

template <typename T>
AdamStateT<T> make_adam_state(const ModelParamsT<T>& params,
                              const AdamConfig& hp = {});

/// One bias-corrected Adam update; per-element arithmetic in double.
template <typename T>
void adam_step(ModelParamsT<T>* params, const GradientsT<T>& grads,
               AdamStateT<T>* state);

struct Checkpoint {
  ModelParams params;
  AdamState state;
};

/// Binary checkpoint: magic "FGL1", architecture descriptor, float32
/// weights/biases in descriptor order, then the Adam state (t as int64,
/// m/v as float32, hyperparameters as float64). Little-endian throughout.
void save_checkpoint(const ModelParams& params, const AdamState& state,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fgl

#include "fgl/minicnn_impl.hpp"
