#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fgl/minicnn.hpp"
#include "support/fd.hpp"

using namespace fgl;
using namespace fgl::testing;

namespace {

Tensor3T<double> random_tensor(int h, int w, int c, Rng& rng, double lo = -1.0,
                               double hi = 1.0) {
  Tensor3T<double> x(h, w, c);
  for (double& v : x.data) v = rng.next_uniform(lo, hi);
  return x;
}

ConvFilter<double> random_filter(int kh, int kw, int ci, int co, Rng& rng) {
  ConvFilter<double> f(kh, kw, ci, co);
  for (double& v : f.w) v = rng.next_uniform(-1.0, 1.0);
  for (double& v : f.b) v = rng.next_uniform(-1.0, 1.0);
  return f;
}

// Direct-summation oracle for 3x3 same-padded cross-correlation.
Tensor3T<double> conv_oracle(const Tensor3T<double>& x,
                             const ConvFilter<double>& f) {
  Tensor3T<double> y(x.h, x.w, f.c_out);
  for (int i = 0; i < x.h; ++i) {
    for (int j = 0; j < x.w; ++j) {
      for (int co = 0; co < f.c_out; ++co) {
        double acc = f.b[co];
        for (int di = 0; di < 3; ++di) {
          for (int dj = 0; dj < 3; ++dj) {
            const int ii = i + di - 1;
            const int jj = j + dj - 1;
            if (ii < 0 || ii >= x.h || jj < 0 || jj >= x.w) continue;
            for (int ci = 0; ci < x.c; ++ci) {
              acc += x.at(ii, jj, ci) *
                     f.w[((static_cast<size_t>(di) * 3 + dj) * x.c + ci) *
                             f.c_out +
                         co];
            }
          }
        }
        y.at(i, j, co) = acc;
      }
    }
  }
  return y;
}

}  // namespace

TEST_CASE("conv3x3_same") {
  SUBCASE("identity kernel") {
    Rng rng(51, 0);
    const auto x = random_tensor(6, 6, 1, rng);
    ConvFilter<double> f(3, 3, 1, 1);
    f.w[(1 * 3 + 1) * 1 * 1] = 1.0;  // center tap
    const auto y = conv3x3_same(x, f);
    for (size_t p = 0; p < x.data.size(); ++p) CHECK(y.data[p] == x.data[p]);
  }
  SUBCASE("all-ones kernel tap counts") {
    Tensor3T<double> x(5, 5, 1);
    for (double& v : x.data) v = 2.0;
    ConvFilter<double> f(3, 3, 1, 1);
    for (double& w : f.w) w = 1.0;
    const auto y = conv3x3_same(x, f);
    CHECK(y.at(0, 0, 0) == doctest::Approx(4 * 2.0));  // corner
    CHECK(y.at(0, 2, 0) == doctest::Approx(6 * 2.0));  // edge
    CHECK(y.at(2, 2, 0) == doctest::Approx(9 * 2.0));  // interior
  }
  SUBCASE("random against the direct-summation oracle") {
    Rng rng(51, 1);
    const auto x = random_tensor(7, 9, 3, rng);
    const auto f = random_filter(3, 3, 3, 4, rng);
    const auto y = conv3x3_same(x, f);
    const auto expect = conv_oracle(x, f);
    for (size_t p = 0; p < y.data.size(); ++p) {
      CHECK(std::fabs(y.data[p] - expect.data[p]) < 1e-6);
    }
  }
  SUBCASE("linearity with zero bias") {
    Rng rng(51, 2);
    auto f = random_filter(3, 3, 2, 3, rng);
    for (double& b : f.b) b = 0.0;
    const auto x = random_tensor(6, 6, 2, rng);
    const auto y = random_tensor(6, 6, 2, rng);
    const double alpha = 0.7, beta = -1.3;
    Tensor3T<double> mix(6, 6, 2);
    for (size_t p = 0; p < mix.data.size(); ++p) {
      mix.data[p] = alpha * x.data[p] + beta * y.data[p];
    }
    const auto lhs = conv3x3_same(mix, f);
    const auto cx = conv3x3_same(x, f);
    const auto cy = conv3x3_same(y, f);
    for (size_t p = 0; p < lhs.data.size(); ++p) {
      CHECK(std::fabs(lhs.data[p] - (alpha * cx.data[p] + beta * cy.data[p])) <
            1e-6);
    }
  }
  SUBCASE("channel mismatch throws") {
    const Tensor3T<double> x(4, 4, 2);
    const ConvFilter<double> f(3, 3, 3, 1);
    CHECK_THROWS_AS(conv3x3_same(x, f), std::invalid_argument);
  }
}

TEST_CASE("relu") {
  Tensor3T<double> x(1, 3, 1);
  x.data = {-1.0, 0.0, 2.0};
  const auto y = relu(x);
  CHECK(y.data == std::vector<double>{0.0, 0.0, 2.0});

  Tensor3T<double> neg(2, 2, 1);
  for (double& v : neg.data) v = -3.5;
  for (double v : relu(neg).data) CHECK(v == 0.0);

  Tensor3T<double> pos(2, 2, 1);
  for (double& v : pos.data) v = 3.5;
  for (double v : relu(pos).data) CHECK(v == 3.5);
}

TEST_CASE("maxpool2x2") {
  SUBCASE("single block") {
    Tensor3T<double> x(2, 2, 1);
    x.at(0, 0, 0) = 1;
    x.at(0, 1, 0) = 2;
    x.at(1, 0, 0) = 3;
    x.at(1, 1, 0) = 4;
    std::vector<int> argmax;
    const auto y = maxpool2x2(x, &argmax);
    CHECK(y.data == std::vector<double>{4.0});
    CHECK(argmax[0] == 3);
  }
  SUBCASE("constant input keeps value, ties route to the first entry") {
    Tensor3T<double> x(4, 4, 2);
    for (double& v : x.data) v = 1.5;
    std::vector<int> argmax;
    const auto y = maxpool2x2(x, &argmax);
    for (double v : y.data) CHECK(v == 1.5);
    CHECK(argmax[0] == 0);  // first in row-major order
    // Backward routes everything to the block's first element.
    Tensor3T<double> gy(2, 2, 2);
    for (double& v : gy.data) v = 1.0;
    const auto gx = maxpool2x2_backward(gy, argmax, 4, 4);
    CHECK(gx.at(0, 0, 0) == 1.0);
    CHECK(gx.at(0, 1, 0) == 0.0);
    CHECK(gx.at(1, 1, 0) == 0.0);
  }
  SUBCASE("28 -> 14 -> 7 shape chain") {
    Tensor3T<double> x(28, 28, 1);
    const auto y = maxpool2x2(x, nullptr);
    CHECK(y.h == 14);
    const auto z = maxpool2x2(y, nullptr);
    CHECK(z.h == 7);
  }
  SUBCASE("odd dimension throws") {
    const Tensor3T<double> x(5, 4, 1);
    CHECK_THROWS_AS(maxpool2x2(x, nullptr), std::invalid_argument);
  }
}

TEST_CASE("upsample2x") {
  Tensor3T<double> x(2, 2, 1);
  x.at(0, 0, 0) = 1;
  x.at(0, 1, 0) = 2;
  x.at(1, 0, 0) = 3;
  x.at(1, 1, 0) = 4;
  const auto y = upsample2x(x);
  CHECK(y.h == 4);
  CHECK(y.w == 4);
  const std::vector<double> expect = {1, 1, 2, 2, 1, 1, 2, 2,
                                      3, 3, 4, 4, 3, 3, 4, 4};
  CHECK(y.data == expect);

  Tensor3T<double> seven(7, 7, 3);
  CHECK(upsample2x(seven).h == 14);

  Tensor3T<double> c(2, 2, 1);
  for (double& v : c.data) v = 9.0;
  for (double v : upsample2x(c).data) CHECK(v == 9.0);
}

TEST_CASE("concat_channels") {
  Rng rng(52, 0);
  const auto a = random_tensor(3, 3, 2, rng);
  const auto b = random_tensor(3, 3, 3, rng);
  const auto y = concat_channels(a, b);
  CHECK(y.c == 5);
  CHECK(y.at(1, 2, 0) == a.at(1, 2, 0));
  CHECK(y.at(1, 2, 2) == b.at(1, 2, 0));

  const auto yr = concat_channels(b, a);
  CHECK(yr.at(1, 2, 0) == b.at(1, 2, 0));

  const Tensor3T<double> zero(3, 3, 0);
  const auto same = concat_channels(a, zero);
  CHECK(same.data == a.data);

  const Tensor3T<double> tall(4, 3, 1);
  CHECK_THROWS_AS(concat_channels(a, tall), std::invalid_argument);
}

TEST_CASE("conv1x1_sigmoid") {
  SUBCASE("zero weights and bias give one half") {
    const Tensor3T<double> x(3, 3, 4);
    const ConvFilter<double> f(1, 1, 4, 1);
    for (double v : conv1x1_sigmoid(x, f).data) CHECK(v == 0.5);
  }
  SUBCASE("large positive bias saturates") {
    const Tensor3T<double> x(2, 2, 1);
    ConvFilter<double> f(1, 1, 1, 1);
    f.b[0] = 20.0;
    for (double v : conv1x1_sigmoid(x, f).data) {
      CHECK(std::fabs(v - 1.0) < 1e-8);
    }
  }
  SUBCASE("random against a direct loop") {
    Rng rng(52, 1);
    const auto x = random_tensor(4, 5, 3, rng);
    const auto f = random_filter(1, 1, 3, 1, rng);
    const auto y = conv1x1_sigmoid(x, f);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 5; ++j) {
        double z = f.b[0];
        for (int ci = 0; ci < 3; ++ci) z += x.at(i, j, ci) * f.w[ci];
        CHECK(std::fabs(y.at(i, j, 0) - 1.0 / (1.0 + std::exp(-z))) < 1e-6);
      }
    }
  }
}

TEST_CASE("forward contract on the 28x28 U-Net") {
  const auto arch = make_unet_arch(16);
  // Conv channel plan doubles per down-stage: 16 -> 32 -> 64.
  int max_conv_c = 0;
  for (const LayerDesc& l : arch) {
    if (l.kind == LayerKind::Conv3x3Relu) max_conv_c = std::max(max_conv_c, l.c_out);
  }
  CHECK(max_conv_c == 64);

  const auto params = init_params<float>(arch, {7, 0});
  Tensor3 x(28, 28, 1);
  Rng rng(53, 0);
  for (float& v : x.data) v = static_cast<float>(rng.next_double());

  const Tensor3 y = forward(params, x);
  CHECK(y.h == 28);
  CHECK(y.w == 28);
  CHECK(y.c == 1);
  for (float v : y.data) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }

  // Same seed, same input: bit-identical output.
  const auto params2 = init_params<float>(arch, {7, 0});
  const Tensor3 y2 = forward(params2, x);
  CHECK(y.data == y2.data);

  Tensor3 bad(14, 28, 1);
  CHECK_THROWS(forward(params, bad));
}

TEST_CASE("bce_loss") {
  SUBCASE("perfect prediction after clamping") {
    Tensor3T<double> target(2, 2, 1);
    target.data = {1, 0, 1, 0};
    Tensor3T<double> pred = target;
    const auto [loss, grad] = bce_loss(pred, target);
    CHECK(loss < 1e-6);
    CHECK(loss > 0.0);
  }
  SUBCASE("uniform half prediction") {
    Tensor3T<double> target(3, 3, 1);
    Tensor3T<double> pred(3, 3, 1);
    for (double& v : pred.data) v = 0.5;
    const auto [loss, grad] = bce_loss(pred, target);
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("gradient matches finite differences") {
    Rng rng(54, 0);
    Tensor3T<double> target(3, 4, 1);
    for (double& v : target.data) v = rng.next_double() < 0.5 ? 0.0 : 1.0;
    Tensor3T<double> pred(3, 4, 1);
    for (double& v : pred.data) v = rng.next_uniform(0.05, 0.95);
    const auto [loss, grad] = bce_loss(pred, target);
    for (size_t p = 0; p < pred.data.size(); ++p) {
      const double h = 1e-4;
      const double saved = pred.data[p];
      pred.data[p] = saved + h;
      const double up = bce_loss(pred, target).first;
      pred.data[p] = saved - h;
      const double down = bce_loss(pred, target).first;
      pred.data[p] = saved;
      CHECK(std::fabs(grad.data[p] - (up - down) / (2.0 * h)) < 1e-5);
    }
  }
  SUBCASE("shape mismatch throws") {
    const Tensor3T<double> a(2, 2, 1), b(2, 3, 1);
    CHECK_THROWS_AS(bce_loss(a, b), std::invalid_argument);
  }
}

TEST_CASE("backward") {
  const auto arch = make_unet_arch(4);
  auto params = init_params<double>(arch, {55, 0});
  Rng rng(55, 1);
  Tensor3T<double> x(8, 8, 1);
  for (double& v : x.data) v = rng.next_double();
  Tensor3T<double> target(8, 8, 1);
  for (double& v : target.data) v = rng.next_double() < 0.5 ? 0.0 : 1.0;

  SUBCASE("zero loss gradient gives zero parameter gradients") {
    ForwardCacheT<double> cache;
    forward(params, x, &cache);
    const Tensor3T<double> zero(8, 8, 1);
    const auto grads = backward(params, cache, zero);
    for (const auto& f : grads.convs) {
      for (double w : f.w) CHECK(w == 0.0);
      for (double b : f.b) CHECK(b == 0.0);
    }
  }
  SUBCASE("spot check against central finite differences") {
    ForwardCacheT<double> cache;
    const auto pred = forward(params, x, &cache);
    const auto [loss, lgrad] = bce_loss(pred, target);
    const auto grads = backward(params, cache, lgrad);

    Rng pick(55, 2);
    for (int probe = 0; probe < 120; ++probe) {
      const size_t f = pick.next_below(params.convs.size());
      auto& filt = params.convs[f];
      const bool bias = pick.next_double() < 0.2;
      if (bias) {
        const size_t i = pick.next_below(filt.b.size());
        const double fd = central_difference(params, x, target, filt.b[i], 1e-5);
        CHECK(relative_error(grads.convs[f].b[i], fd) < 1e-4);
      } else {
        const size_t i = pick.next_below(filt.w.size());
        const double fd = central_difference(params, x, target, filt.w[i], 1e-5);
        CHECK(relative_error(grads.convs[f].w[i], fd) < 1e-4);
      }
    }
  }
  SUBCASE("dead first stage blocks its weight gradients") {
    auto dead = params;
    // Push the first conv's pre-activations far below zero everywhere.
    for (double& b : dead.convs[0].b) b = -100.0;
    ForwardCacheT<double> cache;
    const auto pred = forward(dead, x, &cache);
    const auto [loss, lgrad] = bce_loss(pred, target);
    const auto grads = backward(dead, cache, lgrad);
    for (double w : grads.convs[0].w) CHECK(w == 0.0);
    for (double b : grads.convs[0].b) CHECK(b == 0.0);
  }
  SUBCASE("stale cache is rejected") {
    ForwardCacheT<double> cache;
    forward(params, x, &cache);
    cache.outputs.pop_back();
    const Tensor3T<double> zero(8, 8, 1);
    CHECK_THROWS_AS(backward(params, cache, zero), std::invalid_argument);
  }
}

TEST_CASE("adam_step") {
  // Minimal two-parameter model: a single 1x1 sigmoid head.
  const std::vector<LayerDesc> arch = {{LayerKind::Conv1x1Sigmoid, 1, 1, 1, 1}};
  auto params = init_params<double>(arch, {56, 0});
  auto state = make_adam_state(params);

  SUBCASE("zero gradient keeps parameters") {
    const auto before = params.convs[0];
    GradientsT<double> grads;
    grads.convs.emplace_back(1, 1, 1, 1);
    adam_step(&params, grads, &state);
    CHECK(params.convs[0].w == before.w);
    CHECK(params.convs[0].b == before.b);
    CHECK(state.t == 1);
  }
  SUBCASE("first step moves by about lr in the gradient direction") {
    const double w0 = params.convs[0].w[0];
    GradientsT<double> grads;
    grads.convs.emplace_back(1, 1, 1, 1);
    grads.convs[0].w[0] = 0.37;
    grads.convs[0].b[0] = -2.1;
    adam_step(&params, grads, &state);
    CHECK(params.convs[0].w[0] ==
          doctest::Approx(w0 - state.hp.lr).epsilon(1e-6));
    CHECK(params.convs[0].b[0] == doctest::Approx(state.hp.lr).epsilon(1e-6));
  }
  SUBCASE("three scripted steps match a hand-executed trace") {
    params.convs[0].w[0] = 0.5;
    params.convs[0].b[0] = 0.0;
    state = make_adam_state(params);
    const double g_seq[3] = {0.2, -0.4, 0.1};

    // Independent re-execution of the update equations.
    double theta = 0.5, m = 0.0, v = 0.0;
    const double lr = state.hp.lr, b1 = state.hp.beta1, b2 = state.hp.beta2,
                 eps = state.hp.eps;
    for (int t = 1; t <= 3; ++t) {
      const double g = g_seq[t - 1];
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g * g;
      const double mhat = m / (1 - std::pow(b1, t));
      const double vhat = v / (1 - std::pow(b2, t));
      theta -= lr * mhat / (std::sqrt(vhat) + eps);

      GradientsT<double> grads;
      grads.convs.emplace_back(1, 1, 1, 1);
      grads.convs[0].w[0] = g;
      adam_step(&params, grads, &state);
      CHECK(params.convs[0].w[0] == doctest::Approx(theta).epsilon(1e-12));
    }
    CHECK(state.t == 3);
  }
}

TEST_CASE("small-step Adam does not increase batch loss") {
  // Adam is not a strict descent method; one violation is tolerated.
  Rng data_rng(58, 100);
  std::vector<Tensor3T<double>> xs, ys;
  for (int k = 0; k < 3; ++k) {
    xs.push_back(random_tensor(8, 8, 1, data_rng, 0.0, 1.0));
    Tensor3T<double> t(8, 8, 1);
    for (double& v : t.data) v = data_rng.next_double() < 0.5 ? 0.0 : 1.0;
    ys.push_back(std::move(t));
  }

  auto batch_loss = [&](const ModelParamsT<double>& p) {
    double total = 0.0;
    for (size_t k = 0; k < xs.size(); ++k) {
      total += bce_loss(forward(p, xs[k]), ys[k]).first;
    }
    return total / static_cast<double>(xs.size());
  };

  int violations = 0;
  for (uint64_t trial = 0; trial < 20; ++trial) {
    auto params = init_params<double>(make_unet_arch(4), {58, trial});
    AdamConfig hp;
    hp.lr = 1e-4;
    auto state = make_adam_state(params, hp);

    const double before = batch_loss(params);
    GradientsT<double> total;
    for (size_t k = 0; k < xs.size(); ++k) {
      ForwardCacheT<double> cache;
      const auto pred = forward(params, xs[k], &cache);
      const auto [loss, grad] = bce_loss(pred, ys[k]);
      GradientsT<double> g = backward(params, cache, grad);
      if (k == 0) {
        total = std::move(g);
      } else {
        for (size_t f = 0; f < total.convs.size(); ++f) {
          for (size_t p = 0; p < total.convs[f].w.size(); ++p) {
            total.convs[f].w[p] += g.convs[f].w[p];
          }
          for (size_t p = 0; p < total.convs[f].b.size(); ++p) {
            total.convs[f].b[p] += g.convs[f].b[p];
          }
        }
      }
    }
    for (auto& f : total.convs) {
      for (double& w : f.w) w /= 3.0;
      for (double& b : f.b) b /= 3.0;
    }
    adam_step(&params, total, &state);
    if (batch_loss(params) > before) ++violations;
  }
  CHECK(violations <= 1);
}

TEST_CASE("checkpoint round trip and corruption") {
  const auto dir = std::filesystem::temp_directory_path() / "fgl_ckpt";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.fgl";

  const auto arch = make_unet_arch(4);
  auto params = init_params<float>(arch, {57, 0});
  auto state = make_adam_state(params);
  state.t = 12;
  for (size_t i = 0; i < state.m.size(); ++i) {
    state.m[i] = static_cast<float>(i % 7) * 0.25f;
    state.v[i] = static_cast<float>(i % 5) * 0.5f;
  }
  save_checkpoint(params, state, path);

  SUBCASE("round trip is bit exact") {
    const Checkpoint ck = load_checkpoint(path);
    CHECK(ck.state.t == 12);
    CHECK(ck.state.m == state.m);
    CHECK(ck.state.v == state.v);
    REQUIRE(ck.params.convs.size() == params.convs.size());
    for (size_t f = 0; f < params.convs.size(); ++f) {
      CHECK(ck.params.convs[f].w == params.convs[f].w);
      CHECK(ck.params.convs[f].b == params.convs[f].b);
    }
    Tensor3 x(8, 8, 1);
    Rng rng(57, 1);
    for (float& v : x.data) v = static_cast<float>(rng.next_double());
    CHECK(forward(params, x).data == forward(ck.params, x).data);
  }
  SUBCASE("corrupt magic") {
    auto bytes = path;
    std::fstream f(bytes, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
    f.close();
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("version mismatch"),
                         std::runtime_error);
    save_checkpoint(params, state, path);  // restore
  }
  SUBCASE("truncated file") {
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("truncated"),
                         std::runtime_error);
    save_checkpoint(params, state, path);
  }
  SUBCASE("broken descriptor chain") {
    // Second layer's c_in lives right after the first layer record:
    // magic(4) + count(4) + [kind(1) + 4*int32(16)] + kind(1) + kh+kw(8) = 34.
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4 + 4 + 17 + 1 + 8);
    const int32_t bogus = 999;
    f.write(reinterpret_cast<const char*>(&bogus), sizeof(bogus));
    f.close();
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("shape-chain"), std::runtime_error);
  }
  std::filesystem::remove_all(dir);
}
