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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "skelmap/augment.hpp"
#include "skelmap/model.hpp"
#include "skelmap/skeleton.hpp"

namespace skelmap {

struct LabeledSequence {
  SkeletonSequence seq;
  int label = 0;  // 0-based class index
  std::string name;
};

enum class OptimizerKind { Sgd, Madgrad };
enum class PlateauMetric { TrainLoss, ValAcc };

struct TrainConfig {
  ModelConfig model;
  int epochs = 30;
  int batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::Madgrad;
  double lr = 1e-2;
  double sgd_momentum = 0.9;
  double weight_decay = 0.0;
  double madgrad_momentum = 0.9;
  double madgrad_eps = 1e-6;
  double cosine_lr_min = 1e-4;
  double plateau_factor = 0.5;
  int plateau_patience = 5;
  PlateauMetric plateau_metric = PlateauMetric::ValAcc;
  int early_stop_patience = 10;
  double val_fraction = 0.1;
  std::uint64_t master_seed = 1;
  bool augment_enabled = true;
  AugmentPolicy policy;
  // Wall-clock seconds in the metrics rows; cleared for byte-comparable runs.
  bool record_seconds = true;
};

struct EpochReport {
  int epoch = 0;  // 0-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;  // effective lr at the last step of the epoch
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<std::uint8_t> final_checkpoint;
  std::vector<std::uint8_t> best_checkpoint;  // best validation accuracy
  std::vector<EpochReport> reports;
  int best_epoch = 0;
  double best_val_acc = 0.0;
  std::vector<std::size_t> val_indices;  // indices into the input collection
  std::vector<std::pair<long long, double>> lr_trace;  // (step, effective lr)
};

// Runs the full loop: stratified validation split, per-epoch seeded shuffle,
// policy augmentation, encode/resize, forward/backward, optimizer step under
// cosine x plateau learning rate, early stopping on validation accuracy.
// Deterministic given (data, config).
TrainResult train(const std::vector<LabeledSequence>& data, const TrainConfig& config);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<long long>> confusion;  // [true][predicted]
  std::vector<int> predictions;
};

// Inference-only evaluation of a serialized checkpoint; never augments and
// never touches batch-norm running statistics.
EvalResult evaluate_checkpoint(const std::vector<std::uint8_t>& checkpoint,
                               const std::vector<LabeledSequence>& data);

enum class EarlyStop { Continue, Stop };

// Stop iff the best value in the history is more than `patience` entries old.
EarlyStop early_stop_check(const std::vector<double>& val_history, int patience);

// Fixed-header CSV renderings (doubles via %.17g so equal runs are
// byte-equal).
std::string metrics_csv(const std::vector<EpochReport>& reports);
std::string confusion_csv(const std::vector<std::vector<long long>>& confusion);
std::string lr_trace_csv(const std::vector<std::pair<long long, double>>& trace);

}  // namespace skelmap
