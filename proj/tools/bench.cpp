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

// Kernel benchmark: OpenMP-parallel kernels against their serial reference
// twins, plus a cross-check that both produce the same numbers.

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cmath>
#include <cstdio>

#include "skelmap/nn.hpp"
#include "skelmap/ref_kernels.hpp"
#include "skelmap/rng.hpp"

using namespace skelmap;

namespace {

Tensor<float> random_tensor(std::vector<int> shape, CounterRng& rng) {
  Tensor<float> t(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

template <typename F>
double time_best_of(int repeats, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    best = std::min(best, s);
  }
  return best;
}

double max_abs_diff(const Tensor<float>& a, const Tensor<float>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]));
  }
  return worst;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  CounterRng rng(42);

  {
    const int N = 16, C = 32, H = 32, W = 32, K = 64;
    const Tensor<float> in = random_tensor({N, C, H, W}, rng);
    const Tensor<float> weight = random_tensor({K, C, 3, 3}, rng);
    const Tensor<float> bias = random_tensor({K}, rng);

    Tensor<float> out_par, out_ser;
    const double t_par =
        time_best_of(3, [&] { out_par = nn::conv2d_forward(in, weight, bias, 1, 1); });
    const double t_ser =
        time_best_of(3, [&] { out_ser = ref::conv2d_forward(in, weight, bias, 1, 1); });
    const double gflop = 2.0 * N * K * C * 9.0 * H * W * 1e-9;
    std::printf("conv2d fwd  %dx%dx%dx%d k3      parallel %.3fs (%.2f GFLOP/s)  serial %.3fs  "
                "speedup %.2fx  max|diff| %.2e\n",
                N, C, H, W, t_par, gflop / t_par, t_ser, t_ser / t_par,
                max_abs_diff(out_par, out_ser));

    const Tensor<float> dout = random_tensor(out_par.shape, rng);
    Tensor<float> dw(weight.shape), db(bias.shape), din;
    const double t_bwd_par = time_best_of(3, [&] {
      dw.zero();
      db.zero();
      nn::conv2d_backward_weight(in, dout, 1, 1, dw, db);
      din = nn::conv2d_backward_input(dout, weight, in.shape, 1, 1);
    });
    Tensor<float> rdw(weight.shape), rdb(bias.shape), rdin;
    const double t_bwd_ser = time_best_of(3, [&] {
      rdw.zero();
      rdb.zero();
      ref::conv2d_backward(in, weight, dout, 1, 1, rdin, rdw, rdb);
    });
    std::printf("conv2d bwd  %dx%dx%dx%d k3      parallel %.3fs                serial %.3fs  "
                "speedup %.2fx  max|diff| %.2e\n",
                N, C, H, W, t_bwd_par, t_bwd_ser, t_bwd_ser / t_bwd_par,
                std::max(max_abs_diff(din, rdin), max_abs_diff(dw, rdw)));
  }

  {
    const int N = 256, F = 1024, O = 512;
    const Tensor<float> in = random_tensor({N, F}, rng);
    const Tensor<float> weight = random_tensor({O, F}, rng);
    const Tensor<float> bias = random_tensor({O}, rng);
    Tensor<float> out_par, out_ser;
    const double t_par = time_best_of(5, [&] { out_par = nn::dense_forward(in, weight, bias); });
    const double t_ser = time_best_of(5, [&] { out_ser = ref::dense_forward(in, weight, bias); });
    std::printf("dense fwd   %dx%d -> %d     parallel %.4fs               serial %.4fs  "
                "speedup %.2fx  max|diff| %.2e\n",
                N, F, O, t_par, t_ser, t_ser / t_par, max_abs_diff(out_par, out_ser));
  }

  return 0;
}
