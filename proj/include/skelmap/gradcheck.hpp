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
#include <cmath>
#include <functional>

#include "skelmap/tensor.hpp"

// Central finite-difference verification harness. Loss functions are
// re-evaluated with one element of the probed tensor nudged by +-eps; the
// numeric slope is compared against the analytic gradient with
//   rel = |a - n| / max(|a|, |n|, 1e-8).
// Double precision only.

namespace skelmap {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

// `loss` must be a pure function of the current contents of `x`.
inline GradCheckResult grad_check_tensor(Tensor<double>& x, const Tensor<double>& analytic,
                                         const std::function<double()>& loss,
                                         double eps = 1e-5) {
  GradCheckResult result;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double plus = loss();
    x[i] = saved - eps;
    const double minus = loss();
    x[i] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace skelmap
