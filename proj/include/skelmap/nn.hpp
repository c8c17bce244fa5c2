/*
 * Copyright 2026 The skelmap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "skelmap/rng.hpp"
#include "skelmap/tensor.hpp"

// Dense NN kernels, forward and backward. The parallel loops always run over
// independent output elements with a fixed-order inner summation, so results
// are bit-identical for any thread count. Serial twins of the heavy kernels
// live in ref_kernels.hpp for parity testing and benchmarking.

namespace skelmap::nn {

inline int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& in, const Tensor<T>& weight,
                         const Tensor<T>& bias, int stride, int pad) {
  if (in.shape.size() != 4 || weight.shape.size() != 4 || in.shape[1] != weight.shape[1]) {
    throw Error(ErrorCode::ShapeMismatch, "conv2d expects [N,C,H,W] and [K,C,kh,kw]");
  }
  if (bias.shape.size() != 1 || bias.shape[0] != weight.shape[0]) {
    throw Error(ErrorCode::ShapeMismatch, "conv2d bias must be [K]");
  }
  const int N = in.shape[0], C = in.shape[1], H = in.shape[2], W = in.shape[3];
  const int K = weight.shape[0], kh = weight.shape[2], kw = weight.shape[3];
  const int OH = conv_out_dim(H, kh, stride, pad);
  const int OW = conv_out_dim(W, kw, stride, pad);
  if (OH < 1 || OW < 1) throw Error(ErrorCode::ShapeMismatch, "conv2d output would be empty");

  Tensor<T> out({N, K, OH, OW});
  const T* ip = in.ptr();
  const T* wp = weight.ptr();
  const T* bp = bias.ptr();
  T* op = out.ptr();

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      for (int oy = 0; oy < OH; ++oy) {
        const int iy0 = oy * stride - pad;
        const int ky_lo = std::max(0, -iy0);
        const int ky_hi = std::min(kh, H - iy0);
        for (int ox = 0; ox < OW; ++ox) {
          const int ix0 = ox * stride - pad;
          const int kx_lo = std::max(0, -ix0);
          const int kx_hi = std::min(kw, W - ix0);
          T acc = bp[k];
          for (int c = 0; c < C; ++c) {
            const T* in_plane = ip + (static_cast<std::size_t>(n) * C + c) * H * W;
            const T* w_plane = wp + (static_cast<std::size_t>(k) * C + c) * kh * kw;
            for (int ky = ky_lo; ky < ky_hi; ++ky) {
              const T* in_row = in_plane + static_cast<std::size_t>(iy0 + ky) * W + ix0;
              const T* w_row = w_plane + static_cast<std::size_t>(ky) * kw;
              for (int kx = kx_lo; kx < kx_hi; ++kx) {
                acc += in_row[kx] * w_row[kx];
              }
            }
          }
          op[((static_cast<std::size_t>(n) * K + k) * OH + oy) * OW + ox] = acc;
        }
      }
    }
  }
  assert(out.all_finite());
  return out;
}

// Gradient w.r.t. the conv input; gathers over (k, ky, kx) per input element.
template <typename T>
Tensor<T> conv2d_backward_input(const Tensor<T>& dout, const Tensor<T>& weight,
                                const std::vector<int>& in_shape, int stride, int pad) {
  const int N = in_shape[0], C = in_shape[1], H = in_shape[2], W = in_shape[3];
  const int K = weight.shape[0], kh = weight.shape[2], kw = weight.shape[3];
  const int OH = dout.shape[2], OW = dout.shape[3];

  Tensor<T> din(in_shape);
  const T* dp = dout.ptr();
  const T* wp = weight.ptr();
  T* gp = din.ptr();

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      for (int iy = 0; iy < H; ++iy) {
        for (int ix = 0; ix < W; ++ix) {
          T acc = T{0};
          for (int k = 0; k < K; ++k) {
            const T* d_plane = dp + (static_cast<std::size_t>(n) * K + k) * OH * OW;
            const T* w_plane = wp + (static_cast<std::size_t>(k) * C + c) * kh * kw;
            for (int ky = 0; ky < kh; ++ky) {
              const int num_y = iy + pad - ky;
              if (num_y < 0 || num_y % stride != 0) continue;
              const int oy = num_y / stride;
              if (oy >= OH) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int num_x = ix + pad - kx;
                if (num_x < 0 || num_x % stride != 0) continue;
                const int ox = num_x / stride;
                if (ox >= OW) continue;
                acc += d_plane[static_cast<std::size_t>(oy) * OW + ox] *
                       w_plane[static_cast<std::size_t>(ky) * kw + kx];
              }
            }
          }
          gp[((static_cast<std::size_t>(n) * C + c) * H + iy) * W + ix] = acc;
        }
      }
    }
  }
  return din;
}

// Gradient w.r.t. the conv weight and bias; accumulates into dweight/dbias.
template <typename T>
void conv2d_backward_weight(const Tensor<T>& in, const Tensor<T>& dout, int stride,
                            int pad, Tensor<T>& dweight, Tensor<T>& dbias) {
  const int N = in.shape[0], C = in.shape[1], H = in.shape[2], W = in.shape[3];
  const int K = dout.shape[1], OH = dout.shape[2], OW = dout.shape[3];
  const int kh = dweight.shape[2], kw = dweight.shape[3];
  const T* ip = in.ptr();
  const T* dp = dout.ptr();
  T* wg = dweight.ptr();
  T* bg = dbias.ptr();

#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < C; ++c) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          T acc = T{0};
          for (int n = 0; n < N; ++n) {
            const T* d_plane = dp + (static_cast<std::size_t>(n) * K + k) * OH * OW;
            const T* in_plane = ip + (static_cast<std::size_t>(n) * C + c) * H * W;
            for (int oy = 0; oy < OH; ++oy) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= H) continue;
              const T* d_row = d_plane + static_cast<std::size_t>(oy) * OW;
              const T* in_row = in_plane + static_cast<std::size_t>(iy) * W;
              for (int ox = 0; ox < OW; ++ox) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= W) continue;
                acc += d_row[ox] * in_row[ix];
              }
            }
          }
          wg[((static_cast<std::size_t>(k) * C + c) * kh + ky) * kw + kx] += acc;
        }
      }
    }
  }

#pragma omp parallel for schedule(static)
  for (int k = 0; k < K; ++k) {
    T acc = T{0};
    for (int n = 0; n < N; ++n) {
      const T* d_plane = dp + (static_cast<std::size_t>(n) * K + k) * OH * OW;
      for (int i = 0; i < OH * OW; ++i) acc += d_plane[i];
    }
    bg[k] += acc;
  }
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (in.shape.size() != 2 || weight.shape.size() != 2 || in.shape[1] != weight.shape[1]) {
    throw Error(ErrorCode::ShapeMismatch, "dense expects [N,F] and [O,F]");
  }
  const int N = in.shape[0], F = in.shape[1], O = weight.shape[0];
  Tensor<T> out({N, O});
#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    const T* in_row = in.ptr() + static_cast<std::size_t>(n) * F;
    T* out_row = out.ptr() + static_cast<std::size_t>(n) * O;
    for (int o = 0; o < O; ++o) {
      const T* w_row = weight.ptr() + static_cast<std::size_t>(o) * F;
      T acc = bias.ptr()[o];
      for (int f = 0; f < F; ++f) acc += in_row[f] * w_row[f];
      out_row[o] = acc;
    }
  }
  assert(out.all_finite());
  return out;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& dout,
                         Tensor<T>& dweight, Tensor<T>& dbias) {
  const int N = in.shape[0], F = in.shape[1], O = weight.shape[0];
  Tensor<T> din({N, F});
#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    const T* d_row = dout.ptr() + static_cast<std::size_t>(n) * O;
    T* g_row = din.ptr() + static_cast<std::size_t>(n) * F;
    for (int f = 0; f < F; ++f) {
      T acc = T{0};
      for (int o = 0; o < O; ++o) acc += d_row[o] * weight.ptr()[static_cast<std::size_t>(o) * F + f];
      g_row[f] = acc;
    }
  }
#pragma omp parallel for schedule(static)
  for (int o = 0; o < O; ++o) {
    T* wg_row = dweight.ptr() + static_cast<std::size_t>(o) * F;
    T bacc = T{0};
    for (int n = 0; n < N; ++n) {
      const T d = dout.ptr()[static_cast<std::size_t>(n) * O + o];
      const T* in_row = in.ptr() + static_cast<std::size_t>(n) * F;
      for (int f = 0; f < F; ++f) wg_row[f] += d * in_row[f];
      bacc += d;
    }
    dbias.ptr()[o] += bacc;
  }
  return din;
}

// --- layers ------------------------------------------------------------------

template <typename T>
struct Conv2d {
  Tensor<T> weight, bias, grad_weight, grad_bias;
  int stride = 1, pad = 1;
  Tensor<T> cached_input;

  Conv2d(int in_channels, int out_channels, int kernel, int stride_ = 1, int pad_ = 1)
      : weight({out_channels, in_channels, kernel, kernel}),
        bias({out_channels}),
        grad_weight({out_channels, in_channels, kernel, kernel}),
        grad_bias({out_channels}),
        stride(stride_),
        pad(pad_) {}

  void init(CounterRng& rng) {
    const double fan_in = weight.shape[1] * weight.shape[2] * weight.shape[3];
    weight.init_normal(rng, std::sqrt(2.0 / fan_in));
    bias.zero();
  }

  Tensor<T> forward(const Tensor<T>& x) {
    cached_input = x;
    return conv2d_forward(x, weight, bias, stride, pad);
  }

  Tensor<T> backward(const Tensor<T>& dout) {
    conv2d_backward_weight(cached_input, dout, stride, pad, grad_weight, grad_bias);
    return conv2d_backward_input(dout, weight, cached_input.shape, stride, pad);
  }

  std::vector<ParamRef<T>> params(const std::string& prefix) {
    return {{prefix + ".weight", &weight, &grad_weight},
            {prefix + ".bias", &bias, &grad_bias}};
  }
};

template <typename T>
struct BatchNorm2d {
  Tensor<T> gamma, beta, grad_gamma, grad_beta;
  Tensor<T> running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  Tensor<T> cached_xhat;
  std::vector<T> cached_inv_std;

  explicit BatchNorm2d(int channels, double momentum_ = 0.1, double eps_ = 1e-5)
      : gamma({channels}), beta({channels}), grad_gamma({channels}), grad_beta({channels}),
        running_mean({channels}), running_var({channels}), momentum(momentum_), eps(eps_) {
    gamma.fill(T{1});
    running_var.fill(T{1});
  }

  int channels() const { return gamma.shape[0]; }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    if (x.shape.size() != 4 || x.shape[1] != channels()) {
      throw Error(ErrorCode::ShapeMismatch, "batch_norm expects [N,C,H,W]");
    }
    const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    const std::size_t count = static_cast<std::size_t>(N) * plane;
    Tensor<T> out(x.shape);

    if (!training) {
      // Deterministic affine map from running statistics.
#pragma omp parallel for schedule(static)
      for (int c = 0; c < C; ++c) {
        const T scale = gamma[c] / std::sqrt(static_cast<T>(running_var[c]) + static_cast<T>(eps));
        const T shift = beta[c] - scale * running_mean[c];
        for (int n = 0; n < N; ++n) {
          const T* xr = x.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
          T* yr = out.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
          for (std::size_t i = 0; i < plane; ++i) yr[i] = scale * xr[i] + shift;
        }
      }
      return out;
    }

    if (N < 2) throw Error(ErrorCode::BatchTooSmall, "batch_norm training needs batch >= 2");
    cached_xhat = Tensor<T>(x.shape);
    cached_inv_std.assign(C, T{0});

#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
      T mean = T{0};
      for (int n = 0; n < N; ++n) {
        const T* xr = x.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) mean += xr[i];
      }
      mean /= static_cast<T>(count);
      T var = T{0};
      for (int n = 0; n < N; ++n) {
        const T* xr = x.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const T d = xr[i] - mean;
          var += d * d;
        }
      }
      var /= static_cast<T>(count);
      const T inv_std = T{1} / std::sqrt(var + static_cast<T>(eps));
      cached_inv_std[c] = inv_std;
      for (int n = 0; n < N; ++n) {
        const T* xr = x.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        T* xh = cached_xhat.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        T* yr = out.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          xh[i] = (xr[i] - mean) * inv_std;
          yr[i] = gamma[c] * xh[i] + beta[c];
        }
      }
      // Running stats use the unbiased variance.
      const T unbiased = count > 1 ? var * static_cast<T>(count) / static_cast<T>(count - 1) : var;
      running_mean[c] = static_cast<T>((1.0 - momentum) * running_mean[c] + momentum * mean);
      running_var[c] = static_cast<T>((1.0 - momentum) * running_var[c] + momentum * unbiased);
    }
    assert(out.all_finite());
    return out;
  }

  Tensor<T> backward(const Tensor<T>& dout) {
    const int N = dout.shape[0], C = dout.shape[1], H = dout.shape[2], W = dout.shape[3];
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    const T count = static_cast<T>(static_cast<std::size_t>(N) * plane);
    Tensor<T> din(dout.shape);

#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
      T sum_d = T{0}, sum_dx = T{0};
      for (int n = 0; n < N; ++n) {
        const T* dr = dout.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        const T* xh = cached_xhat.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          sum_d += dr[i];
          sum_dx += dr[i] * xh[i];
        }
      }
      grad_gamma[c] += sum_dx;
      grad_beta[c] += sum_d;
      const T scale = gamma[c] * cached_inv_std[c];
      for (int n = 0; n < N; ++n) {
        const T* dr = dout.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        const T* xh = cached_xhat.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        T* gr = din.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          gr[i] = scale * (dr[i] - sum_d / count - xh[i] * sum_dx / count);
        }
      }
    }
    return din;
  }

  std::vector<ParamRef<T>> params(const std::string& prefix) {
    return {{prefix + ".gamma", &gamma, &grad_gamma}, {prefix + ".beta", &beta, &grad_beta}};
  }

  std::vector<BufferRef<T>> buffers(const std::string& prefix) {
    return {{prefix + ".running_mean", &running_mean}, {prefix + ".running_var", &running_var}};
  }
};

template <typename T>
struct Relu {
  Tensor<T> cached_input;

  Tensor<T> forward(const Tensor<T>& x) {
    cached_input = x;
    Tensor<T> out(x.shape);
    const std::size_t n = x.numel();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      out[i] = x[i] > T{0} ? x[i] : T{0};
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& dout) {
    Tensor<T> din(dout.shape);
    const std::size_t n = dout.numel();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      din[i] = cached_input[i] > T{0} ? dout[i] : T{0};
    }
    return din;
  }
};

// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped. Ties
// resolve to the first maximum in scan order.
template <typename T>
struct MaxPool2d {
  std::vector<int> cached_in_shape;
  std::vector<std::size_t> cached_argmax;

  Tensor<T> forward(const Tensor<T>& x) {
    const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    const int OH = H / 2, OW = W / 2;
    if (OH < 1 || OW < 1) throw Error(ErrorCode::ShapeMismatch, "max_pool input too small");
    cached_in_shape = x.shape;
    Tensor<T> out({N, C, OH, OW});
    cached_argmax.assign(out.numel(), 0);

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) {
        for (int oy = 0; oy < OH; ++oy) {
          for (int ox = 0; ox < OW; ++ox) {
            std::size_t best_idx = x.off4(n, c, oy * 2, ox * 2);
            T best = x[best_idx];
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                const std::size_t idx = x.off4(n, c, oy * 2 + dy, ox * 2 + dx);
                if (x[idx] > best) {
                  best = x[idx];
                  best_idx = idx;
                }
              }
            }
            const std::size_t o = out.off4(n, c, oy, ox);
            out[o] = best;
            cached_argmax[o] = best_idx;
          }
        }
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& dout) {
    Tensor<T> din(cached_in_shape);
    for (std::size_t o = 0; o < dout.numel(); ++o) {
      din[cached_argmax[o]] += dout[o];
    }
    return din;
  }
};

template <typename T>
struct GlobalAvgPool {
  std::vector<int> cached_in_shape;

  Tensor<T> forward(const Tensor<T>& x) {
    const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    cached_in_shape = x.shape;
    Tensor<T> out({N, C});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) {
        const T* xr = x.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        T acc = T{0};
        for (std::size_t i = 0; i < plane; ++i) acc += xr[i];
        out[out.off2(n, c)] = acc / static_cast<T>(plane);
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& dout) {
    Tensor<T> din(cached_in_shape);
    const int N = cached_in_shape[0], C = cached_in_shape[1];
    const std::size_t plane =
        static_cast<std::size_t>(cached_in_shape[2]) * cached_in_shape[3];
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) {
        const T g = dout[dout.off2(n, c)] / static_cast<T>(plane);
        T* gr = din.ptr() + (static_cast<std::size_t>(n) * C + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) gr[i] = g;
      }
    }
    return din;
  }
};

// Inverted dropout: surviving activations are scaled by 1/(1-rate) during
// training; inference is the identity.
template <typename T>
struct Dropout {
  double rate = 0.5;
  Tensor<T> cached_mask;

  explicit Dropout(double rate_ = 0.5) : rate(rate_) {}

  Tensor<T> forward(const Tensor<T>& x, bool training, CounterRng& rng) {
    if (!training || rate <= 0.0) {
      cached_mask = Tensor<T>();
      return x;
    }
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
    cached_mask = Tensor<T>(x.shape);
    Tensor<T> out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) {
      const T m = rng.uniform() >= rate ? keep_scale : T{0};
      cached_mask[i] = m;
      out[i] = x[i] * m;
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& dout) {
    if (cached_mask.numel() == 0) return dout;
    Tensor<T> din(dout.shape);
    for (std::size_t i = 0; i < dout.numel(); ++i) din[i] = dout[i] * cached_mask[i];
    return din;
  }
};

template <typename T>
struct Dense {
  Tensor<T> weight, bias, grad_weight, grad_bias;
  Tensor<T> cached_input;

  Dense(int in_features, int out_features)
      : weight({out_features, in_features}),
        bias({out_features}),
        grad_weight({out_features, in_features}),
        grad_bias({out_features}) {}

  void init(CounterRng& rng) {
    weight.init_normal(rng, std::sqrt(2.0 / weight.shape[1]));
    bias.zero();
  }

  Tensor<T> forward(const Tensor<T>& x) {
    cached_input = x;
    return dense_forward(x, weight, bias);
  }

  Tensor<T> backward(const Tensor<T>& dout) {
    return dense_backward(cached_input, weight, dout, grad_weight, grad_bias);
  }

  std::vector<ParamRef<T>> params(const std::string& prefix) {
    return {{prefix + ".weight", &weight, &grad_weight},
            {prefix + ".bias", &bias, &grad_bias}};
  }
};

}  // namespace skelmap::nn
