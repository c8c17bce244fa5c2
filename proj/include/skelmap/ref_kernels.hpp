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

#include "skelmap/nn.hpp"
#include "skelmap/tensor.hpp"

// Textbook serial implementations of the heavy kernels. These stay around as
// the oracle the parallel kernels are tested against, and as the baseline in
// the kernel benchmark. The backward passes deliberately use the scatter
// formulation, which accumulates in a different order than the parallel
// gather kernels.

namespace skelmap::ref {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& in, const Tensor<T>& weight,
                         const Tensor<T>& bias, int stride, int pad) {
  const int N = in.shape[0], C = in.shape[1], H = in.shape[2], W = in.shape[3];
  const int K = weight.shape[0], kh = weight.shape[2], kw = weight.shape[3];
  const int OH = nn::conv_out_dim(H, kh, stride, pad);
  const int OW = nn::conv_out_dim(W, kw, stride, pad);
  Tensor<T> out({N, K, OH, OW});
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      for (int oy = 0; oy < OH; ++oy)
        for (int ox = 0; ox < OW; ++ox) {
          T acc = bias[k];
          for (int c = 0; c < C; ++c)
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx) {
                const int iy = oy * stride - pad + ky;
                const int ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                acc += in[in.off4(n, c, iy, ix)] * weight[weight.off4(k, c, ky, kx)];
              }
          out[out.off4(n, k, oy, ox)] = acc;
        }
  return out;
}

template <typename T>
void conv2d_backward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& dout,
                     int stride, int pad, Tensor<T>& din, Tensor<T>& dweight,
                     Tensor<T>& dbias) {
  const int N = in.shape[0], C = in.shape[1], H = in.shape[2], W = in.shape[3];
  const int K = weight.shape[0], kh = weight.shape[2], kw = weight.shape[3];
  const int OH = dout.shape[2], OW = dout.shape[3];
  din = Tensor<T>(in.shape);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      for (int oy = 0; oy < OH; ++oy)
        for (int ox = 0; ox < OW; ++ox) {
          const T d = dout[dout.off4(n, k, oy, ox)];
          dbias[k] += d;
          for (int c = 0; c < C; ++c)
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx) {
                const int iy = oy * stride - pad + ky;
                const int ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                dweight[dweight.off4(k, c, ky, kx)] += d * in[in.off4(n, c, iy, ix)];
                din[din.off4(n, c, iy, ix)] += d * weight[weight.off4(k, c, ky, kx)];
              }
        }
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& bias) {
  const int N = in.shape[0], F = in.shape[1], O = weight.shape[0];
  Tensor<T> out({N, O});
  for (int n = 0; n < N; ++n)
    for (int o = 0; o < O; ++o) {
      T acc = bias[o];
      for (int f = 0; f < F; ++f) acc += in[in.off2(n, f)] * weight[weight.off2(o, f)];
      out[out.off2(n, o)] = acc;
    }
  return out;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& dout,
                         Tensor<T>& dweight, Tensor<T>& dbias) {
  const int N = in.shape[0], F = in.shape[1], O = weight.shape[0];
  Tensor<T> din({N, F});
  for (int n = 0; n < N; ++n)
    for (int o = 0; o < O; ++o) {
      const T d = dout[dout.off2(n, o)];
      dbias[o] += d;
      for (int f = 0; f < F; ++f) {
        dweight[dweight.off2(o, f)] += d * in[in.off2(n, f)];
        din[din.off2(n, f)] += d * weight[weight.off2(o, f)];
      }
    }
  return din;
}

}  // namespace skelmap::ref
