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

#include <cmath>
#include <limits>
#include <vector>

#include "skelmap/tensor.hpp"

namespace skelmap {

// Module-level default step size; the trainer configures its own base lr.
inline constexpr double kDefaultLearningRate = 0.05;

// --- optimizers --------------------------------------------------------------

template <typename T>
struct SgdState {
  Tensor<T> velocity;
  double momentum = 0.0;
  double weight_decay = 0.0;
};

// Momentum SGD: v <- mu*v + g + wd*x; x <- x - lr*v.
template <typename T>
void sgd_step(Tensor<T>& params, const Tensor<T>& grads, double lr, SgdState<T>& state) {
  if (!params.same_shape(grads)) {
    throw Error(ErrorCode::ShapeMismatch, "sgd: params and grads differ");
  }
  if (state.velocity.numel() == 0) state.velocity = Tensor<T>(params.shape);
  for (std::size_t i = 0; i < params.numel(); ++i) {
    const T g = grads[i] + static_cast<T>(state.weight_decay) * params[i];
    state.velocity[i] = static_cast<T>(state.momentum) * state.velocity[i] + g;
    params[i] -= static_cast<T>(lr) * state.velocity[i];
  }
}

// Dual-averaging state for one parameter tensor.
template <typename T>
struct MadgradState {
  Tensor<T> grad_sum;      // s_k
  Tensor<T> grad_sq_sum;   // nu_k, element-wise >= 0
  Tensor<T> initial;       // x_0
  long long step = 0;      // k
  double momentum = 0.9;   // averaging weight c on z
  double eps = 1e-6;
};

// One MADGRAD step:
//   lambda_k = lr * sqrt(k+1)
//   s    <- s  + lambda_k * g
//   nu   <- nu + lambda_k * g*g
//   z     = x0 - s / (cbrt(nu) + eps)
//   x    <- (1-c) * x + c * z, computed as x + c*(z - x) so a zero-gradient
//           step leaves the parameters bit-identical
template <typename T>
void madgrad_step(Tensor<T>& params, const Tensor<T>& grads, double lr,
                  MadgradState<T>& state) {
  if (!params.same_shape(grads)) {
    throw Error(ErrorCode::ShapeMismatch, "madgrad: params and grads differ");
  }
  if (state.grad_sum.numel() == 0) {
    state.grad_sum = Tensor<T>(params.shape);
    state.grad_sq_sum = Tensor<T>(params.shape);
    state.initial = params;
  }
  const double lambda = lr * std::sqrt(static_cast<double>(state.step + 1));
  const double c = state.momentum;
  for (std::size_t i = 0; i < params.numel(); ++i) {
    const double g = grads[i];
    const double s = static_cast<double>(state.grad_sum[i]) + lambda * g;
    const double nu = static_cast<double>(state.grad_sq_sum[i]) + lambda * g * g;
    state.grad_sum[i] = static_cast<T>(s);
    state.grad_sq_sum[i] = static_cast<T>(nu);
    const double x = static_cast<double>(params[i]);
    const double z = static_cast<double>(state.initial[i]) - s / (std::cbrt(nu) + state.eps);
    params[i] = static_cast<T>(x + c * (z - x));
  }
  ++state.step;
}

// --- schedulers ----------------------------------------------------------------

// lr(t) = lr_min + 0.5*(lr_max - lr_min)*(1 + cos(pi * t / T_max)).
inline double cosine_lr(long long t, long long t_max, double lr_min, double lr_max) {
  if (t_max <= 0) return lr_max;
  const double phase = 3.14159265358979323846 * static_cast<double>(t) / static_cast<double>(t_max);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

// Reduce-on-plateau: after `patience` consecutive epochs without improvement
// the multiplier shrinks by `factor` and the counter resets. Improvement is
// checked before counting, so an improvement exactly at the boundary blocks
// the reduction.
struct PlateauState {
  double factor = 0.5;
  int patience = 5;
  bool maximize = true;  // validation accuracy: maximize; train loss: minimize

  double best = 0.0;
  bool has_best = false;
  int epochs_since_improve = 0;
  double multiplier = 1.0;
};

inline void plateau_update(PlateauState& state, double metric) {
  const double tol = 1e-6;
  const bool improved =
      !state.has_best ||
      (state.maximize ? metric > state.best + tol : metric < state.best - tol);
  if (improved) {
    state.best = metric;
    state.has_best = true;
    state.epochs_since_improve = 0;
    return;
  }
  if (++state.epochs_since_improve >= state.patience) {
    state.multiplier *= state.factor;
    state.epochs_since_improve = 0;
  }
}

}  // namespace skelmap
