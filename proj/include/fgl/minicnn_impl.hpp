#pragma once

// Template bodies for minicnn.hpp. Included at the end of that header;
// not meant to be included directly.

#include <cmath>
#include <stdexcept>

namespace fgl {

template <typename T>
ModelParamsT<T> init_params(const std::vector<LayerDesc>& arch, RngSeed seed) {
  validate_arch(arch);
  ModelParamsT<T> params;
  params.arch = arch;
  Rng rng(seed);
  for (const LayerDesc& l : arch) {
    if (l.kind != LayerKind::Conv3x3Relu && l.kind != LayerKind::Conv1x1Sigmoid) {
      continue;
    }
    ConvFilter<T> f(l.kh, l.kw, l.c_in, l.c_out);
    const double fan_in = static_cast<double>(l.kh) * l.kw * l.c_in;
    const double fan_out = static_cast<double>(l.kh) * l.kw * l.c_out;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (T& w : f.w) w = static_cast<T>(rng.next_uniform(-limit, limit));
    params.convs.push_back(std::move(f));
  }
  return params;
}

template <typename T>
Tensor3T<T> forward(const ModelParamsT<T>& params, const Tensor3T<T>& x,
                    ForwardCacheT<T>* cache) {
  if (cache) {
    cache->input = x;
    cache->outputs.clear();
    cache->pool_argmax.clear();
  }
  Tensor3T<T> cur = x;
  std::vector<Tensor3T<T>> skips;
  size_t conv_idx = 0;
  for (const LayerDesc& l : params.arch) {
    switch (l.kind) {
      case LayerKind::Conv3x3Relu:
        cur = relu(conv3x3_same(cur, params.convs[conv_idx++]));
        break;
      case LayerKind::MaxPool2x2: {
        skips.push_back(cur);
        std::vector<int> argmax;
        cur = maxpool2x2(cur, cache ? &argmax : nullptr);
        if (cache) cache->pool_argmax.push_back(std::move(argmax));
        break;
      }
      case LayerKind::Upsample2x:
        cur = upsample2x(cur);
        break;
      case LayerKind::ConcatSkip: {
        if (skips.empty()) throw std::runtime_error("forward: skip stack empty");
        Tensor3T<T> skip = std::move(skips.back());
        skips.pop_back();
        cur = concat_channels(cur, skip);
        break;
      }
      case LayerKind::Conv1x1Sigmoid:
        cur = conv1x1_sigmoid(cur, params.convs[conv_idx++]);
        break;
    }
    if (cache) cache->outputs.push_back(cur);
  }
  return cur;
}

template <typename T>
GradientsT<T> backward(const ModelParamsT<T>& params,
                       const ForwardCacheT<T>& cache,
                       const Tensor3T<T>& loss_grad) {
  const auto& arch = params.arch;
  if (cache.outputs.size() != arch.size()) {
    throw std::invalid_argument("backward: cache does not match architecture");
  }
  const Tensor3T<T>& final_out = cache.outputs.back();
  if (loss_grad.h != final_out.h || loss_grad.w != final_out.w ||
      loss_grad.c != final_out.c) {
    throw std::invalid_argument("backward: loss gradient shape mismatch");
  }

  GradientsT<T> grads;
  grads.convs.resize(params.convs.size());

  std::vector<Tensor3T<T>> skip_grads;
  Tensor3T<T> g = loss_grad;
  size_t conv_idx = params.convs.size();
  size_t pool_idx = cache.pool_argmax.size();

  for (size_t li = arch.size(); li-- > 0;) {
    const Tensor3T<T>& in = li == 0 ? cache.input : cache.outputs[li - 1];
    const Tensor3T<T>& out = cache.outputs[li];
    switch (arch[li].kind) {
      case LayerKind::Conv1x1Sigmoid: {
        --conv_idx;
        Tensor3T<T> gx;
        conv1x1_sigmoid_backward(in, params.convs[conv_idx], out, g, &gx,
                                 &grads.convs[conv_idx]);
        g = std::move(gx);
        break;
      }
      case LayerKind::Conv3x3Relu: {
        --conv_idx;
        // ReLU gate: the cached output is zero exactly where the
        // pre-activation was clipped.
        Tensor3T<T> gz = g;
        for (size_t p = 0; p < gz.data.size(); ++p) {
          if (!(out.data[p] > T(0))) gz.data[p] = T(0);
        }
        Tensor3T<T> gx;
        conv3x3_same_backward(in, params.convs[conv_idx], gz, &gx,
                              &grads.convs[conv_idx]);
        g = std::move(gx);
        break;
      }
      case LayerKind::MaxPool2x2: {
        --pool_idx;
        Tensor3T<T> gx =
            maxpool2x2_backward(g, cache.pool_argmax[pool_idx], in.h, in.w);
        if (skip_grads.empty()) {
          throw std::runtime_error("backward: skip gradient stack empty");
        }
        const Tensor3T<T>& gs = skip_grads.back();
        for (size_t p = 0; p < gx.data.size(); ++p) gx.data[p] += gs.data[p];
        skip_grads.pop_back();
        g = std::move(gx);
        break;
      }
      case LayerKind::Upsample2x:
        g = upsample2x_backward(g);
        break;
      case LayerKind::ConcatSkip: {
        Tensor3T<T> g_main, g_skip;
        split_channels(g, in.c, &g_main, &g_skip);
        skip_grads.push_back(std::move(g_skip));
        g = std::move(g_main);
        break;
      }
    }
  }
  return grads;
}

template <typename T>
std::pair<double, Tensor3T<T>> bce_loss(const Tensor3T<T>& pred,
                                        const Tensor3T<T>& target) {
  if (pred.h != target.h || pred.w != target.w || pred.c != target.c) {
    throw std::invalid_argument("bce_loss: shape mismatch");
  }
  const double count = static_cast<double>(pred.size());
  Tensor3T<T> grad(pred.h, pred.w, pred.c);
  double loss = 0.0;
  for (size_t p = 0; p < pred.data.size(); ++p) {
    double yhat = static_cast<double>(pred.data[p]);
    yhat = std::min(std::max(yhat, kBceClamp), 1.0 - kBceClamp);
    const double y = static_cast<double>(target.data[p]);
    loss -= y * std::log(yhat) + (1.0 - y) * std::log(1.0 - yhat);
    grad.data[p] =
        static_cast<T>((yhat - y) / (yhat * (1.0 - yhat)) / count);
  }
  return {loss / count, std::move(grad)};
}

template <typename T>
AdamStateT<T> make_adam_state(const ModelParamsT<T>& params,
                              const AdamConfig& hp) {
  AdamStateT<T> s;
  s.hp = hp;
  s.m.assign(params.param_count(), T(0));
  s.v.assign(params.param_count(), T(0));
  return s;
}

template <typename T>
void adam_step(ModelParamsT<T>* params, const GradientsT<T>& grads,
               AdamStateT<T>* state) {
  if (grads.convs.size() != params->convs.size() ||
      state->m.size() != params->param_count()) {
    throw std::invalid_argument("adam_step: gradient/state shape mismatch");
  }
  state->t += 1;
  const AdamConfig& hp = state->hp;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state->t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state->t));
  size_t off = 0;
  auto update = [&](T& theta, T grad) {
    const double gd = static_cast<double>(grad);
    const double m =
        hp.beta1 * static_cast<double>(state->m[off]) + (1.0 - hp.beta1) * gd;
    const double v = hp.beta2 * static_cast<double>(state->v[off]) +
                     (1.0 - hp.beta2) * gd * gd;
    state->m[off] = static_cast<T>(m);
    state->v[off] = static_cast<T>(v);
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    theta = static_cast<T>(static_cast<double>(theta) -
                           hp.lr * mhat / (std::sqrt(vhat) + hp.eps));
    ++off;
  };
  for (size_t f = 0; f < params->convs.size(); ++f) {
    auto& pf = params->convs[f];
    const auto& gf = grads.convs[f];
    for (size_t i = 0; i < pf.w.size(); ++i) update(pf.w[i], gf.w[i]);
    for (size_t i = 0; i < pf.b.size(); ++i) update(pf.b[i], gf.b[i]);
  }
}

}  // namespace fgl
