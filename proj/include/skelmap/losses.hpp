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
#include <vector>

#include "skelmap/rng.hpp"
#include "skelmap/tensor.hpp"

namespace skelmap {

// (1 - eps) one-hot plus eps/K everywhere; rows always sum to 1.
template <typename T>
Tensor<T> smooth_labels(int label, int num_classes, double epsilon) {
  if (label < 0 || label >= num_classes) {
    throw Error(ErrorCode::IndexOutOfRange, "label outside [0, K)");
  }
  Tensor<T> target({num_classes});
  const T off = static_cast<T>(epsilon / num_classes);
  target.fill(off);
  target[static_cast<std::size_t>(label)] =
      static_cast<T>(1.0 - epsilon + epsilon / num_classes);
  return target;
}

template <typename T>
Tensor<T> smooth_label_batch(const std::vector<int>& labels, int num_classes, double epsilon) {
  Tensor<T> targets({static_cast<int>(labels.size()), num_classes});
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const Tensor<T> row = smooth_labels<T>(labels[n], num_classes, epsilon);
    std::copy(row.data.begin(), row.data.end(),
              targets.data.begin() + n * static_cast<std::size_t>(num_classes));
  }
  return targets;
}

template <typename T>
struct CrossEntropyResult {
  double loss = 0.0;
  Tensor<T> grad_logits;  // (softmax - target) / N
};

// Mean batch cross-entropy against (possibly smoothed) target rows, computed
// in the log-sum-exp stabilized form.
template <typename T>
CrossEntropyResult<T> cross_entropy(const Tensor<T>& logits, const Tensor<T>& targets) {
  if (!logits.same_shape(targets)) {
    throw Error(ErrorCode::ShapeMismatch, "logits and targets must agree");
  }
  const int N = logits.shape[0], K = logits.shape[1];
  CrossEntropyResult<T> result;
  result.grad_logits = Tensor<T>(logits.shape);
  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    const T* row = logits.ptr() + static_cast<std::size_t>(n) * K;
    const T* t = targets.ptr() + static_cast<std::size_t>(n) * K;
    T* g = result.grad_logits.ptr() + static_cast<std::size_t>(n) * K;
    T row_max = row[0];
    for (int k = 1; k < K; ++k) row_max = std::max(row_max, row[k]);
    double sum_exp = 0.0;
    for (int k = 0; k < K; ++k) sum_exp += std::exp(static_cast<double>(row[k] - row_max));
    const double log_sum = std::log(sum_exp);
    for (int k = 0; k < K; ++k) {
      const double log_p = static_cast<double>(row[k] - row_max) - log_sum;
      total -= static_cast<double>(t[k]) * log_p;
      g[k] = static_cast<T>((std::exp(log_p) - static_cast<double>(t[k])) / N);
    }
  }
  result.loss = total / N;
  return result;
}

// Additive-angular-margin head over normalized embeddings and class weights.
// Training logits: s*cos(theta + m) for the labeled class (falling back to
// s*(cos(theta) - m*sin(m)) once theta + m would pass pi), s*cos(theta)
// elsewhere. Inference: s*cos(theta) everywhere.
template <typename T>
struct ArcFaceHead {
  Tensor<T> weight;  // [num_classes, embed_dim]
  Tensor<T> grad_weight;
  double scale = 30.0;
  double margin = 0.5;  // radians, in [0, pi/2)

  static constexpr double kCosClamp = 1e-7;
  static constexpr double kMinNorm = 1e-12;

  ArcFaceHead(int num_classes, int embed_dim, double scale_ = 30.0, double margin_ = 0.5)
      : weight({num_classes, embed_dim}), grad_weight({num_classes, embed_dim}),
        scale(scale_), margin(margin_) {}

  void init(CounterRng& rng) { weight.init_normal(rng, std::sqrt(1.0 / weight.shape[1])); }

  int num_classes() const { return weight.shape[0]; }
  int embed_dim() const { return weight.shape[1]; }

  // labels empty -> inference mode.
  Tensor<T> forward(const Tensor<T>& embeddings, const std::vector<int>& labels) {
    if (embeddings.shape.size() != 2 || embeddings.shape[1] != embed_dim()) {
      throw Error(ErrorCode::ShapeMismatch, "embeddings must be [N, embed_dim]");
    }
    const int N = embeddings.shape[0], D = embed_dim(), K = num_classes();
    const bool training = !labels.empty();

    cached_embeddings_ = embeddings;
    cached_labels_ = labels;
    embed_norms_.assign(N, 0.0);
    weight_norms_.assign(K, 0.0);
    cached_cos_ = Tensor<T>({N, K});

    for (int n = 0; n < N; ++n) {
      double norm_sq = 0.0;
      const T* e = embeddings.ptr() + static_cast<std::size_t>(n) * D;
      for (int d = 0; d < D; ++d) norm_sq += static_cast<double>(e[d]) * e[d];
      const double norm = std::sqrt(norm_sq);
      if (norm < kMinNorm) {
        throw Error(ErrorCode::ZeroEmbedding, "embedding row has near-zero norm");
      }
      embed_norms_[n] = norm;
    }
    for (int k = 0; k < K; ++k) {
      double norm_sq = 0.0;
      const T* w = weight.ptr() + static_cast<std::size_t>(k) * D;
      for (int d = 0; d < D; ++d) norm_sq += static_cast<double>(w[d]) * w[d];
      weight_norms_[k] = std::max(std::sqrt(norm_sq), kMinNorm);
    }

    Tensor<T> logits({N, K});
    const double cos_m = std::cos(margin), sin_m = std::sin(margin);
    for (int n = 0; n < N; ++n) {
      const T* e = embeddings.ptr() + static_cast<std::size_t>(n) * D;
      for (int k = 0; k < K; ++k) {
        const T* w = weight.ptr() + static_cast<std::size_t>(k) * D;
        double dot = 0.0;
        for (int d = 0; d < D; ++d) dot += static_cast<double>(e[d]) * w[d];
        double cos_t = dot / (embed_norms_[n] * weight_norms_[k]);
        cos_t = std::clamp(cos_t, -1.0 + kCosClamp, 1.0 - kCosClamp);
        cached_cos_[cached_cos_.off2(n, k)] = static_cast<T>(cos_t);
        double logit;
        if (training && labels[n] == k) {
          if (cos_t > -cos_m) {
            const double sin_t = std::sqrt(1.0 - cos_t * cos_t);
            logit = scale * (cos_t * cos_m - sin_t * sin_m);
          } else {
            logit = scale * (cos_t - margin * sin_m);
          }
        } else {
          logit = scale * cos_t;
        }
        logits[logits.off2(n, k)] = static_cast<T>(logit);
      }
    }
    return logits;
  }

  // Backward through the margin, the cosine, and both normalizations.
  // Accumulates into grad_weight and returns d(embeddings).
  Tensor<T> backward(const Tensor<T>& dlogits) {
    const int N = cached_embeddings_.shape[0], D = embed_dim(), K = num_classes();
    const double cos_m = std::cos(margin), sin_m = std::sin(margin);
    Tensor<T> dembed({N, D});
    std::vector<double> dcos(static_cast<std::size_t>(N) * K);

    for (int n = 0; n < N; ++n) {
      for (int k = 0; k < K; ++k) {
        const double d = dlogits[dlogits.off2(n, k)];
        const double cos_t = cached_cos_[cached_cos_.off2(n, k)];
        double factor = scale;
        if (!cached_labels_.empty() && cached_labels_[n] == k && cos_t > -cos_m) {
          const double sin_t = std::sqrt(1.0 - cos_t * cos_t);
          factor = scale * (cos_m + cos_t * sin_m / sin_t);
        }
        dcos[static_cast<std::size_t>(n) * K + k] = d * factor;
      }
    }

    // d cos / d e = (w_hat - cos * e_hat) / |e|; symmetric for w.
    for (int n = 0; n < N; ++n) {
      const T* e = cached_embeddings_.ptr() + static_cast<std::size_t>(n) * D;
      T* ge = dembed.ptr() + static_cast<std::size_t>(n) * D;
      const double inv_en = 1.0 / embed_norms_[n];
      for (int k = 0; k < K; ++k) {
        const double dc = dcos[static_cast<std::size_t>(n) * K + k];
        if (dc == 0.0) continue;
        const double cos_t = cached_cos_[cached_cos_.off2(n, k)];
        const T* w = weight.ptr() + static_cast<std::size_t>(k) * D;
        T* gw = grad_weight.ptr() + static_cast<std::size_t>(k) * D;
        const double inv_wn = 1.0 / weight_norms_[k];
        for (int d = 0; d < D; ++d) {
          const double e_hat = e[d] * inv_en;
          const double w_hat = w[d] * inv_wn;
          ge[d] += static_cast<T>(dc * (w_hat - cos_t * e_hat) * inv_en);
          gw[d] += static_cast<T>(dc * (e_hat - cos_t * w_hat) * inv_wn);
        }
      }
    }
    return dembed;
  }

  std::vector<ParamRef<T>> params(const std::string& prefix) {
    return {{prefix + ".weight", &weight, &grad_weight}};
  }

 private:
  Tensor<T> cached_embeddings_;
  Tensor<T> cached_cos_;
  std::vector<int> cached_labels_;
  std::vector<double> embed_norms_;
  std::vector<double> weight_norms_;
};

}  // namespace skelmap
