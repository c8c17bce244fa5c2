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
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "skelmap/error.hpp"
#include "skelmap/rng.hpp"

namespace skelmap {

// Dense row-major N-d array; the sole currency of the nn/loss/optimizer code.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), T{0});
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  static Tensor from(std::vector<int> s, std::vector<T> values) {
    Tensor t;
    t.shape = std::move(s);
    if (values.size() != numel_of(t.shape)) {
      throw Error(ErrorCode::ShapeMismatch, "value count does not match shape");
    }
    t.data = std::move(values);
    return t;
  }

  static std::size_t numel_of(const std::vector<int>& s) {
    std::size_t n = 1;
    for (const int d : s) {
      if (d <= 0) throw Error(ErrorCode::ShapeMismatch, "non-positive dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t numel() const { return data.size(); }
  int dim(std::size_t i) const { return shape.at(i); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  // 4-d and 2-d offset helpers for the [N,C,H,W] / [N,F] layouts.
  std::size_t off4(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w;
  }
  std::size_t off2(int n, int f) const {
    return static_cast<std::size_t>(n) * shape[1] + f;
  }

  void fill(T value) { std::fill(data.begin(), data.end(), value); }

  void zero() { fill(T{0}); }

  bool all_finite() const {
    for (const T v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  // He-style normal init, deterministic under the stream.
  void init_normal(CounterRng& rng, double stddev) {
    for (auto& v : data) v = static_cast<T>(rng.normal() * stddev);
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

// Named view of one parameter and its gradient slot.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value = nullptr;
  Tensor<T>* grad = nullptr;
};

// Named view of a non-trained buffer (e.g. batch-norm running stats).
template <typename T>
struct BufferRef {
  std::string name;
  Tensor<T>* value = nullptr;
};

}  // namespace skelmap
