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

#include "skelmap/model.hpp"

#include <cstring>

#include "skelmap/error.hpp"
#include "skelmap/io.hpp"

namespace skelmap {

namespace {

constexpr char kMagic[8] = {'S', 'K', 'M', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  template <typename V>
  void value(V v) { raw(&v, sizeof v); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void raw(void* p, std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorCode::IoError, "truncated checkpoint");
    }
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  template <typename V>
  V value() {
    V v{};
    raw(&v, sizeof v);
    return v;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void write_config(Writer& w, const ModelConfig& cfg) {
  w.raw(kMagic, sizeof kMagic);
  w.value<std::uint32_t>(kVersion);
  w.value<std::uint32_t>(cfg.precision == Precision::Float64 ? 1u : 0u);
  w.value<std::int32_t>(cfg.num_classes);
  w.value<std::int32_t>(cfg.embed_dim);
  w.value<std::int32_t>(cfg.image_size);
  for (const int c : cfg.channels) w.value<std::int32_t>(c);
  w.value<std::int32_t>(static_cast<std::int32_t>(cfg.loss));
  w.value<std::int32_t>(static_cast<std::int32_t>(cfg.normalize));
  w.value<double>(cfg.arcface_scale);
  w.value<double>(cfg.arcface_margin);
  w.value<double>(cfg.label_smoothing);
  w.value<double>(cfg.dropout);
  w.value<double>(cfg.bn_momentum);
}

ModelConfig read_config(Reader& r) {
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::IoError, "bad checkpoint magic");
  }
  if (r.value<std::uint32_t>() != kVersion) {
    throw Error(ErrorCode::IoError, "unsupported checkpoint version");
  }
  ModelConfig cfg;
  cfg.precision = r.value<std::uint32_t>() == 1u ? Precision::Float64 : Precision::Float32;
  cfg.num_classes = r.value<std::int32_t>();
  cfg.embed_dim = r.value<std::int32_t>();
  cfg.image_size = r.value<std::int32_t>();
  for (int& c : cfg.channels) c = r.value<std::int32_t>();
  cfg.loss = static_cast<LossKind>(r.value<std::int32_t>());
  cfg.normalize = static_cast<NormalizeMode>(r.value<std::int32_t>());
  cfg.arcface_scale = r.value<double>();
  cfg.arcface_margin = r.value<double>();
  cfg.label_smoothing = r.value<double>();
  cfg.dropout = r.value<double>();
  cfg.bn_momentum = r.value<double>();
  return cfg;
}

template <typename T>
void write_entry(Writer& w, const std::string& name, const Tensor<T>& t) {
  w.value<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
  w.raw(name.data(), name.size());
  w.value<std::uint8_t>(static_cast<std::uint8_t>(t.shape.size()));
  for (const int d : t.shape) w.value<std::int32_t>(d);
  w.raw(t.data.data(), t.data.size() * sizeof(T));
}

template <typename T>
void read_entry_into(Reader& r, const std::string& expect_name, Tensor<T>& t) {
  const std::uint16_t name_len = r.value<std::uint16_t>();
  std::string name(name_len, '\0');
  r.raw(name.data(), name_len);
  if (name != expect_name) {
    throw Error(ErrorCode::ShapeMismatch,
                "checkpoint entry '" + name + "' where '" + expect_name + "' expected");
  }
  const std::uint8_t ndim = r.value<std::uint8_t>();
  std::vector<int> shape(ndim);
  for (auto& d : shape) d = r.value<std::int32_t>();
  if (shape != t.shape) {
    throw Error(ErrorCode::ShapeMismatch, "checkpoint entry '" + name + "' has shape mismatch");
  }
  r.raw(t.data.data(), t.data.size() * sizeof(T));
}

}  // namespace

std::vector<std::uint8_t> serialize_model_config(const ModelConfig& cfg) {
  Writer w;
  write_config(w, cfg);
  return w.take();
}

ModelConfig peek_checkpoint_config(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  return read_config(r);
}

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(Classifier<T>& model) {
  Writer w;
  write_config(w, model.cfg);
  const auto params = model.params();
  const auto buffers = model.buffers();
  w.value<std::uint32_t>(static_cast<std::uint32_t>(params.size() + buffers.size()));
  for (const auto& p : params) write_entry(w, p.name, *p.value);
  for (const auto& b : buffers) write_entry(w, b.name, *b.value);
  return w.take();
}

template <typename T>
Classifier<T> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const ModelConfig cfg = read_config(r);
  if ((cfg.precision == Precision::Float64) != (sizeof(T) == 8)) {
    throw Error(ErrorCode::ShapeMismatch, "checkpoint precision does not match requested type");
  }
  Classifier<T> model(cfg);
  const auto params = model.params();
  const auto buffers = model.buffers();
  const std::uint32_t count = r.value<std::uint32_t>();
  if (count != params.size() + buffers.size()) {
    throw Error(ErrorCode::ShapeMismatch, "checkpoint entry count mismatch");
  }
  for (const auto& p : params) read_entry_into(r, p.name, *p.value);
  for (const auto& b : buffers) read_entry_into(r, b.name, *b.value);
  return model;
}

void save_checkpoint_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  atomic_write_file(path, bytes);
}

template std::vector<std::uint8_t> serialize_checkpoint<float>(Classifier<float>&);
template std::vector<std::uint8_t> serialize_checkpoint<double>(Classifier<double>&);
template Classifier<float> deserialize_checkpoint<float>(const std::vector<std::uint8_t>&);
template Classifier<double> deserialize_checkpoint<double>(const std::vector<std::uint8_t>&);

}  // namespace skelmap
