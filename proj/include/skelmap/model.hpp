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

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "skelmap/losses.hpp"
#include "skelmap/nn.hpp"
#include "skelmap/normalize.hpp"

namespace skelmap {

enum class LossKind { CrossEntropy, CrossEntropySmooth, ArcFace };
enum class Precision { Float32, Float64 };

struct ModelConfig {
  int num_classes = 5;
  int embed_dim = 128;
  int image_size = 224;
  std::array<int, 3> channels{32, 64, 128};
  double dropout = 0.5;
  double bn_momentum = 0.1;
  LossKind loss = LossKind::ArcFace;
  double arcface_scale = 30.0;
  double arcface_margin = 0.5;
  double label_smoothing = 0.1;
  NormalizeMode normalize = NormalizeMode::SequenceBased;
  Precision precision = Precision::Float32;
};

// Three conv/bn/relu/pool blocks, global average pooling, dropout, a dense
// embedding, and either a dense softmax head or the angular-margin head.
template <typename T>
struct Classifier {
  ModelConfig cfg;
  nn::Conv2d<T> conv1, conv2, conv3;
  nn::BatchNorm2d<T> bn1, bn2, bn3;
  nn::Relu<T> relu1, relu2, relu3;
  nn::MaxPool2d<T> pool1, pool2, pool3;
  nn::GlobalAvgPool<T> gap;
  nn::Dropout<T> dropout;
  nn::Dense<T> embed;
  std::unique_ptr<nn::Dense<T>> softmax_head;       // CE paths
  std::unique_ptr<ArcFaceHead<T>> arcface_head;     // ArcFace path

  explicit Classifier(const ModelConfig& config)
      : cfg(config),
        conv1(3, config.channels[0], 3),
        conv2(config.channels[0], config.channels[1], 3),
        conv3(config.channels[1], config.channels[2], 3),
        bn1(config.channels[0], config.bn_momentum),
        bn2(config.channels[1], config.bn_momentum),
        bn3(config.channels[2], config.bn_momentum),
        dropout(config.dropout),
        embed(config.channels[2], config.embed_dim) {
    if (config.loss == LossKind::ArcFace) {
      arcface_head = std::make_unique<ArcFaceHead<T>>(
          config.num_classes, config.embed_dim, config.arcface_scale, config.arcface_margin);
    } else {
      softmax_head = std::make_unique<nn::Dense<T>>(config.embed_dim, config.num_classes);
    }
  }

  void init(std::uint64_t seed) {
    CounterRng rng = CounterRng::substream(seed, 0x1017);
    conv1.init(rng);
    conv2.init(rng);
    conv3.init(rng);
    embed.init(rng);
    if (softmax_head) softmax_head->init(rng);
    if (arcface_head) arcface_head->init(rng);
  }

  // images [N,3,S,S] -> embedding [N, embed_dim]. The rng feeds dropout and
  // is only consumed when training.
  Tensor<T> forward_embedding(const Tensor<T>& images, bool training, CounterRng& rng) {
    Tensor<T> x = pool1.forward(relu1.forward(bn1.forward(conv1.forward(images), training)));
    x = pool2.forward(relu2.forward(bn2.forward(conv2.forward(x), training)));
    x = pool3.forward(relu3.forward(bn3.forward(conv3.forward(x), training)));
    x = gap.forward(x);
    x = dropout.forward(x, training, rng);
    return embed.forward(x);
  }

  // Head logits; labels are required (and used) only by the ArcFace head in
  // training mode.
  Tensor<T> forward_logits(const Tensor<T>& embedding, const std::vector<int>& labels,
                           bool training) {
    if (arcface_head) {
      return arcface_head->forward(embedding, training ? labels : std::vector<int>{});
    }
    return softmax_head->forward(embedding);
  }

  Tensor<T> backward_from_logits(const Tensor<T>& dlogits) {
    Tensor<T> dembed =
        arcface_head ? arcface_head->backward(dlogits) : softmax_head->backward(dlogits);
    Tensor<T> dx = embed.backward(dembed);
    dx = dropout.backward(dx);
    dx = gap.backward(dx);
    dx = pool3.backward(dx);
    dx = relu3.backward(dx);
    dx = bn3.backward(dx);
    dx = conv3.backward(dx);
    dx = pool2.backward(dx);
    dx = relu2.backward(dx);
    dx = bn2.backward(dx);
    dx = conv2.backward(dx);
    dx = pool1.backward(dx);
    dx = relu1.backward(dx);
    dx = bn1.backward(dx);
    return conv1.backward(dx);
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> all;
    for (auto& p : conv1.params("conv1")) all.push_back(p);
    for (auto& p : bn1.params("bn1")) all.push_back(p);
    for (auto& p : conv2.params("conv2")) all.push_back(p);
    for (auto& p : bn2.params("bn2")) all.push_back(p);
    for (auto& p : conv3.params("conv3")) all.push_back(p);
    for (auto& p : bn3.params("bn3")) all.push_back(p);
    for (auto& p : embed.params("embed")) all.push_back(p);
    if (softmax_head) {
      for (auto& p : softmax_head->params("head")) all.push_back(p);
    }
    if (arcface_head) {
      for (auto& p : arcface_head->params("arcface")) all.push_back(p);
    }
    return all;
  }

  std::vector<BufferRef<T>> buffers() {
    std::vector<BufferRef<T>> all;
    for (auto& b : bn1.buffers("bn1")) all.push_back(b);
    for (auto& b : bn2.buffers("bn2")) all.push_back(b);
    for (auto& b : bn3.buffers("bn3")) all.push_back(b);
    return all;
  }

  void zero_grad() {
    for (auto& p : params()) p.grad->zero();
  }
};

// --- checkpoint format --------------------------------------------------------
//
// Little-endian binary:
//   magic "SKMCKPT1", u32 version
//   u32 precision (0 = float32, 1 = float64)
//   i32 num_classes, embed_dim, image_size, channels[3], loss, normalize
//   f64 arcface_scale, arcface_margin, label_smoothing, dropout, bn_momentum
//   u32 entry count; per entry: u16 name length, name bytes,
//     u8 ndim, i32 dims[ndim], raw scalar data
// Entries cover all parameters followed by all buffers.

std::vector<std::uint8_t> serialize_model_config(const ModelConfig& cfg);
ModelConfig peek_checkpoint_config(const std::vector<std::uint8_t>& bytes);

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(Classifier<T>& model);

template <typename T>
Classifier<T> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace skelmap
