#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fgl {

/// Dense h x w x c tensor, row-major (row, column, channel).
template <typename T>
struct Tensor3T {
  int h = 0, w = 0, c = 0;
  std::vector<T> data;

  Tensor3T() = default;
  Tensor3T(int h_, int w_, int c_)
      : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, T(0)) {}

  T& at(int i, int j, int k) {
    return data[(static_cast<size_t>(i) * w + j) * c + k];
  }
  const T& at(int i, int j, int k) const {
    return data[(static_cast<size_t>(i) * w + j) * c + k];
  }
  size_t size() const { return data.size(); }
};

using Tensor3 = Tensor3T<float>;

/// Convolution kernel plus bias. Weight layout ((di*kw + dj)*c_in + ci)*c_out + co.
template <typename T>
struct ConvFilter {
  int kh = 0, kw = 0, c_in = 0, c_out = 0;
  std::vector<T> w;
  std::vector<T> b;

  ConvFilter() = default;
  ConvFilter(int kh_, int kw_, int ci, int co)
      : kh(kh_), kw(kw_), c_in(ci), c_out(co),
        w(static_cast<size_t>(kh_) * kw_ * ci * co, T(0)), b(co, T(0)) {}
};

/// 3x3 cross-correlation with zero padding 1; output h x w x c_out.
template <typename T>
Tensor3T<T> conv3x3_same(const Tensor3T<T>& x, const ConvFilter<T>& f) {
  if (f.kh != 3 || f.kw != 3) throw std::invalid_argument("conv3x3: kernel is not 3x3");
  if (f.c_in != x.c) throw std::invalid_argument("conv3x3: channel mismatch");
  Tensor3T<T> y(x.h, x.w, f.c_out);
  const int co_n = f.c_out;
  for (int i = 0; i < x.h; ++i) {
    for (int j = 0; j < x.w; ++j) {
      T* yo = &y.at(i, j, 0);
      for (int co = 0; co < co_n; ++co) yo[co] = f.b[co];
      for (int di = 0; di < 3; ++di) {
        const int ii = i + di - 1;
        if (ii < 0 || ii >= x.h) continue;
        for (int dj = 0; dj < 3; ++dj) {
          const int jj = j + dj - 1;
          if (jj < 0 || jj >= x.w) continue;
          const T* xi = &x.at(ii, jj, 0);
          const T* wk = &f.w[static_cast<size_t>(di * 3 + dj) * x.c * co_n];
          for (int ci = 0; ci < x.c; ++ci) {
            const T xv = xi[ci];
            const T* wr = wk + static_cast<size_t>(ci) * co_n;
            for (int co = 0; co < co_n; ++co) yo[co] += xv * wr[co];
          }
        }
      }
    }
  }
  return y;
}

/// Gradients of conv3x3_same: writes gx (overwritten) and gf (overwritten).
template <typename T>
void conv3x3_same_backward(const Tensor3T<T>& x, const ConvFilter<T>& f,
                           const Tensor3T<T>& gy, Tensor3T<T>* gx,
                           ConvFilter<T>* gf) {
  *gx = Tensor3T<T>(x.h, x.w, x.c);
  *gf = ConvFilter<T>(3, 3, f.c_in, f.c_out);
  const int co_n = f.c_out;
  for (int i = 0; i < x.h; ++i) {
    for (int j = 0; j < x.w; ++j) {
      const T* g = &gy.at(i, j, 0);
      for (int co = 0; co < co_n; ++co) gf->b[co] += g[co];
      for (int di = 0; di < 3; ++di) {
        const int ii = i + di - 1;
        if (ii < 0 || ii >= x.h) continue;
        for (int dj = 0; dj < 3; ++dj) {
          const int jj = j + dj - 1;
          if (jj < 0 || jj >= x.w) continue;
          const T* xi = &x.at(ii, jj, 0);
          T* gxi = &gx->at(ii, jj, 0);
          const size_t base = static_cast<size_t>(di * 3 + dj) * x.c * co_n;
          const T* wk = &f.w[base];
          T* gwk = &gf->w[base];
          for (int ci = 0; ci < x.c; ++ci) {
            const T xv = xi[ci];
            const T* wr = wk + static_cast<size_t>(ci) * co_n;
            T* gwr = gwk + static_cast<size_t>(ci) * co_n;
            T acc = T(0);
            for (int co = 0; co < co_n; ++co) {
              acc += wr[co] * g[co];
              gwr[co] += xv * g[co];
            }
            gxi[ci] += acc;
          }
        }
      }
    }
  }
}

template <typename T>
Tensor3T<T> relu(Tensor3T<T> x) {
  for (T& v : x.data) {
    if (v < T(0)) v = T(0);
  }
  return x;
}

/// Per-channel max over disjoint 2x2 blocks; h and w must be even. Argmax
/// flat indices into the input are recorded for the backward pass, ties
/// resolved to the first element in row-major order.
template <typename T>
Tensor3T<T> maxpool2x2(const Tensor3T<T>& x, std::vector<int>* argmax) {
  if (x.h % 2 != 0 || x.w % 2 != 0) {
    throw std::invalid_argument("maxpool2x2: odd spatial dimension");
  }
  Tensor3T<T> y(x.h / 2, x.w / 2, x.c);
  if (argmax) argmax->assign(y.size(), 0);
  for (int i = 0; i < y.h; ++i) {
    for (int j = 0; j < y.w; ++j) {
      for (int k = 0; k < x.c; ++k) {
        T best = x.at(2 * i, 2 * j, k);
        int best_idx = (2 * i * x.w + 2 * j) * x.c + k;
        for (int di = 0; di < 2; ++di) {
          for (int dj = 0; dj < 2; ++dj) {
            const T v = x.at(2 * i + di, 2 * j + dj, k);
            if (v > best) {
              best = v;
              best_idx = ((2 * i + di) * x.w + (2 * j + dj)) * x.c + k;
            }
          }
        }
        y.at(i, j, k) = best;
        if (argmax) (*argmax)[(static_cast<size_t>(i) * y.w + j) * y.c + k] = best_idx;
      }
    }
  }
  return y;
}

template <typename T>
Tensor3T<T> maxpool2x2_backward(const Tensor3T<T>& gy,
                                const std::vector<int>& argmax, int in_h,
                                int in_w) {
  Tensor3T<T> gx(in_h, in_w, gy.c);
  for (size_t p = 0; p < gy.data.size(); ++p) {
    gx.data[argmax[p]] += gy.data[p];
  }
  return gx;
}

/// Nearest-neighbor 2x replication.
template <typename T>
Tensor3T<T> upsample2x(const Tensor3T<T>& x) {
  Tensor3T<T> y(2 * x.h, 2 * x.w, x.c);
  for (int i = 0; i < y.h; ++i) {
    for (int j = 0; j < y.w; ++j) {
      for (int k = 0; k < x.c; ++k) {
        y.at(i, j, k) = x.at(i / 2, j / 2, k);
      }
    }
  }
  return y;
}

template <typename T>
Tensor3T<T> upsample2x_backward(const Tensor3T<T>& gy) {
  Tensor3T<T> gx(gy.h / 2, gy.w / 2, gy.c);
  for (int i = 0; i < gy.h; ++i) {
    for (int j = 0; j < gy.w; ++j) {
      for (int k = 0; k < gy.c; ++k) {
        gx.at(i / 2, j / 2, k) += gy.at(i, j, k);
      }
    }
  }
  return gx;
}

/// Channels of a followed by channels of b; spatial dims must match.
template <typename T>
Tensor3T<T> concat_channels(const Tensor3T<T>& a, const Tensor3T<T>& b) {
  if (a.h != b.h || a.w != b.w) {
    throw std::invalid_argument("concat_channels: spatial mismatch");
  }
  Tensor3T<T> y(a.h, a.w, a.c + b.c);
  for (int i = 0; i < a.h; ++i) {
    for (int j = 0; j < a.w; ++j) {
      for (int k = 0; k < a.c; ++k) y.at(i, j, k) = a.at(i, j, k);
      for (int k = 0; k < b.c; ++k) y.at(i, j, a.c + k) = b.at(i, j, k);
    }
  }
  return y;
}

template <typename T>
void split_channels(const Tensor3T<T>& y, int c_a, Tensor3T<T>* a,
                    Tensor3T<T>* b) {
  *a = Tensor3T<T>(y.h, y.w, c_a);
  *b = Tensor3T<T>(y.h, y.w, y.c - c_a);
  for (int i = 0; i < y.h; ++i) {
    for (int j = 0; j < y.w; ++j) {
      for (int k = 0; k < c_a; ++k) a->at(i, j, k) = y.at(i, j, k);
      for (int k = c_a; k < y.c; ++k) b->at(i, j, k - c_a) = y.at(i, j, k);
    }
  }
}

/// Per-pixel 1x1 convolution followed by the logistic sigmoid.
template <typename T>
Tensor3T<T> conv1x1_sigmoid(const Tensor3T<T>& x, const ConvFilter<T>& f) {
  if (f.kh != 1 || f.kw != 1) throw std::invalid_argument("conv1x1: kernel is not 1x1");
  if (f.c_in != x.c) throw std::invalid_argument("conv1x1: channel mismatch");
  Tensor3T<T> y(x.h, x.w, f.c_out);
  for (int i = 0; i < x.h; ++i) {
    for (int j = 0; j < x.w; ++j) {
      const T* xi = &x.at(i, j, 0);
      T* yo = &y.at(i, j, 0);
      for (int co = 0; co < f.c_out; ++co) {
        double z = static_cast<double>(f.b[co]);
        for (int ci = 0; ci < x.c; ++ci) {
          z += static_cast<double>(xi[ci]) *
               static_cast<double>(f.w[static_cast<size_t>(ci) * f.c_out + co]);
        }
        yo[co] = static_cast<T>(1.0 / (1.0 + std::exp(-z)));
      }
    }
  }
  return y;
}

/// Gradients of conv1x1_sigmoid given the cached output y = sigmoid(z):
/// gz = gy * y * (1 - y), then the linear-layer gradients.
template <typename T>
void conv1x1_sigmoid_backward(const Tensor3T<T>& x, const ConvFilter<T>& f,
                              const Tensor3T<T>& y, const Tensor3T<T>& gy,
                              Tensor3T<T>* gx, ConvFilter<T>* gf) {
  *gx = Tensor3T<T>(x.h, x.w, x.c);
  *gf = ConvFilter<T>(1, 1, f.c_in, f.c_out);
  for (int i = 0; i < x.h; ++i) {
    for (int j = 0; j < x.w; ++j) {
      const T* xi = &x.at(i, j, 0);
      T* gxi = &gx->at(i, j, 0);
      for (int co = 0; co < f.c_out; ++co) {
        const T yv = y.at(i, j, co);
        const T gz = gy.at(i, j, co) * yv * (T(1) - yv);
        gf->b[co] += gz;
        for (int ci = 0; ci < x.c; ++ci) {
          gxi[ci] += f.w[static_cast<size_t>(ci) * f.c_out + co] * gz;
          gf->w[static_cast<size_t>(ci) * f.c_out + co] += xi[ci] * gz;
        }
      }
    }
  }
}

}  // namespace fgl
