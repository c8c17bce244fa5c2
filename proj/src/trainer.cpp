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

#include "skelmap/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "skelmap/error.hpp"
#include "skelmap/image.hpp"
#include "skelmap/normalize.hpp"
#include "skelmap/optim.hpp"

namespace skelmap {

namespace {

// Seed-domain tags keeping the trainer's rng streams disjoint.
constexpr std::uint64_t kSeedValSplit = 0x76616c73ull;
constexpr std::uint64_t kSeedShuffle = 0x73687566ull;
constexpr std::uint64_t kSeedDropout = 0x64726f70ull;
constexpr std::uint64_t kSeedAugment = 0x6175676dull;

template <typename T>
void image_into_batch(const SkeletonImage& img, Tensor<T>& batch, int row) {
  const int size = batch.shape[2];
  T* dst = batch.ptr() + static_cast<std::size_t>(row) * 3 * size * size;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        dst[(static_cast<std::size_t>(c) * size + y) * size + x] =
            static_cast<T>(img.at(y, x, c));
      }
    }
  }
}

SkeletonImage clean_encode(const SkeletonSequence& normalized, int image_size) {
  const SkeletonImage img = encode(normalized, compute_channel_range(normalized));
  return resize_bilinear(img, image_size, image_size);
}

template <typename T>
int argmax_row(const Tensor<T>& logits, int row) {
  const int k_count = logits.shape[1];
  const T* r = logits.ptr() + static_cast<std::size_t>(row) * k_count;
  int best = 0;
  for (int k = 1; k < k_count; ++k) {
    if (r[k] > r[best]) best = k;
  }
  return best;
}

// Batches of indices; a trailing singleton is merged into the previous batch
// so training-mode batch norm always sees >= 2 rows.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order,
                                                   int batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }
  if (batches.size() >= 2 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back()[0]);
    batches.pop_back();
  }
  return batches;
}

template <typename T>
struct OptimizerBank {
  OptimizerKind kind;
  std::vector<SgdState<T>> sgd;
  std::vector<MadgradState<T>> madgrad;

  OptimizerBank(OptimizerKind kind_, std::size_t n, const TrainConfig& cfg) : kind(kind_) {
    if (kind == OptimizerKind::Sgd) {
      sgd.resize(n);
      for (auto& s : sgd) {
        s.momentum = cfg.sgd_momentum;
        s.weight_decay = cfg.weight_decay;
      }
    } else {
      madgrad.resize(n);
      for (auto& s : madgrad) {
        s.momentum = cfg.madgrad_momentum;
        s.eps = cfg.madgrad_eps;
      }
    }
  }

  void step(std::vector<ParamRef<T>>& params, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (kind == OptimizerKind::Sgd) {
        sgd_step(*params[i].value, *params[i].grad, lr, sgd[i]);
      } else {
        madgrad_step(*params[i].value, *params[i].grad, lr, madgrad[i]);
      }
    }
  }
};

template <typename T>
double run_split_accuracy(Classifier<T>& model, const std::vector<Tensor<T>>& tensors,
                          const std::vector<int>& labels, int batch_size) {
  const int size = model.cfg.image_size;
  long long correct = 0;
  CounterRng unused(0);
  for (std::size_t start = 0; start < tensors.size(); start += batch_size) {
    const std::size_t end = std::min(tensors.size(), start + batch_size);
    Tensor<T> batch({static_cast<int>(end - start), 3, size, size});
    for (std::size_t i = start; i < end; ++i) {
      std::copy(tensors[i].data.begin(), tensors[i].data.end(),
                batch.data.begin() + (i - start) * tensors[i].numel());
    }
    Tensor<T> embedding = model.forward_embedding(batch, false, unused);
    Tensor<T> logits = model.forward_logits(embedding, {}, false);
    for (std::size_t i = start; i < end; ++i) {
      if (argmax_row(logits, static_cast<int>(i - start)) == labels[i]) ++correct;
    }
  }
  return tensors.empty() ? 0.0 : static_cast<double>(correct) / tensors.size();
}

template <typename T>
TrainResult train_impl(const std::vector<LabeledSequence>& data, const TrainConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 2 || cfg.val_fraction < 0.0 || cfg.val_fraction > 0.5) {
    throw Error(ErrorCode::ConfigInvalid, "epochs >= 1, batch_size >= 2, val_fraction in [0,0.5]");
  }
  if (cfg.lr < 0.0 || cfg.cosine_lr_min < 0.0 || cfg.cosine_lr_min > std::max(cfg.lr, 1e-300)) {
    throw Error(ErrorCode::ConfigInvalid, "need 0 <= lr_min <= lr");
  }
  if (data.empty()) throw Error(ErrorCode::DataEmpty, "no training samples");
  const int num_classes = cfg.model.num_classes;
  for (const auto& s : data) {
    if (s.label < 0 || s.label >= num_classes) {
      throw Error(ErrorCode::ConfigInvalid, "label outside [0, num_classes)");
    }
  }

  // Normalization is deterministic per sample, so it runs once up front.
  std::vector<SkeletonSequence> normalized(data.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(data.size()); ++i) {
    normalized[i] = normalize_sequence(data[i].seq, cfg.model.normalize);
  }

  // Stratified validation split.
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);
  std::vector<std::size_t> train_idx, val_idx;
  for (auto& [label, members] : by_class) {
    CounterRng rng = CounterRng::substream(cfg.master_seed, kSeedValSplit, label);
    rng.shuffle(members);
    std::size_t n_val = static_cast<std::size_t>(cfg.val_fraction * members.size());
    if (cfg.val_fraction > 0.0 && n_val == 0 && members.size() >= 2) n_val = 1;
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < n_val ? val_idx : train_idx).push_back(members[i]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  std::vector<bool> in_train_class(num_classes, false);
  for (const std::size_t i : train_idx) in_train_class[data[i].label] = true;
  for (int k = 0; k < num_classes; ++k) {
    if (!in_train_class[k]) {
      throw Error(ErrorCode::DataEmpty, "class " + std::to_string(k) + " missing from train");
    }
  }

  const int size = cfg.model.image_size;

  // Clean (augmentation-free) tensors, reused by the per-epoch accuracy
  // passes.
  std::vector<Tensor<T>> clean_train(train_idx.size()), clean_val(val_idx.size());
  std::vector<int> train_labels(train_idx.size()), val_labels(val_idx.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(train_idx.size()); ++i) {
    const SkeletonImage img = clean_encode(normalized[train_idx[i]], size);
    clean_train[i] = Tensor<T>({3, size, size});
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          clean_train[i][(static_cast<std::size_t>(c) * size + y) * size + x] =
              static_cast<T>(img.at(y, x, c));
  }
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(val_idx.size()); ++i) {
    const SkeletonImage img = clean_encode(normalized[val_idx[i]], size);
    clean_val[i] = Tensor<T>({3, size, size});
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          clean_val[i][(static_cast<std::size_t>(c) * size + y) * size + x] =
              static_cast<T>(img.at(y, x, c));
  }
  for (std::size_t i = 0; i < train_idx.size(); ++i) train_labels[i] = data[train_idx[i]].label;
  for (std::size_t i = 0; i < val_idx.size(); ++i) val_labels[i] = data[val_idx[i]].label;

  Classifier<T> model(cfg.model);
  model.init(cfg.master_seed);
  auto params = model.params();
  OptimizerBank<T> optimizer(cfg.optimizer, params.size(), cfg);

  const long long steps_per_epoch =
      static_cast<long long>(make_batches(train_idx, cfg.batch_size).size());
  const long long t_max = steps_per_epoch * cfg.epochs;

  PlateauState plateau;
  plateau.factor = cfg.plateau_factor;
  plateau.patience = cfg.plateau_patience;
  plateau.maximize = cfg.plateau_metric == PlateauMetric::ValAcc;

  TrainResult result;
  result.val_indices = val_idx;
  std::vector<double> val_history;
  long long global_step = 0;

  const bool augment = cfg.augment_enabled && cfg.policy.num_ops > 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();

    std::vector<std::size_t> order = train_idx;
    CounterRng shuffle_rng = CounterRng::substream(cfg.master_seed, kSeedShuffle, epoch);
    shuffle_rng.shuffle(order);
    const auto batches = make_batches(order, cfg.batch_size);

    double loss_sum = 0.0;
    double last_lr = 0.0;

    for (const auto& batch_indices : batches) {
      const int bn = static_cast<int>(batch_indices.size());
      Tensor<T> batch({bn, 3, size, size});
      std::vector<int> labels(bn);
#pragma omp parallel for schedule(static)
      for (int i = 0; i < bn; ++i) {
        const std::size_t sample = batch_indices[i];
        SkeletonImage img;
        if (augment) {
          CounterRng aug_rng =
              CounterRng::substream(cfg.master_seed ^ kSeedAugment ^ cfg.policy.seed, epoch, sample);
          img = resize_bilinear(rand_augment(normalized[sample], cfg.policy, aug_rng), size, size);
        } else {
          img = clean_encode(normalized[sample], size);
        }
        image_into_batch(img, batch, i);
      }
      for (int i = 0; i < bn; ++i) labels[i] = data[batch_indices[i]].label;

      CounterRng dropout_rng =
          CounterRng::substream(cfg.master_seed, kSeedDropout, epoch, global_step);
      Tensor<T> embedding = model.forward_embedding(batch, true, dropout_rng);
      Tensor<T> logits = model.forward_logits(embedding, labels, true);

      const double epsilon = cfg.model.loss == LossKind::CrossEntropySmooth
                                 ? cfg.model.label_smoothing
                                 : 0.0;
      const Tensor<T> targets = smooth_label_batch<T>(labels, num_classes, epsilon);
      CrossEntropyResult<T> ce = cross_entropy(logits, targets);
      loss_sum += ce.loss * bn;

      model.zero_grad();
      model.backward_from_logits(ce.grad_logits);

      const double lr_eff =
          cosine_lr(global_step, t_max, cfg.cosine_lr_min, cfg.lr) * plateau.multiplier;
      last_lr = lr_eff;
      result.lr_trace.emplace_back(global_step, lr_eff);
      optimizer.step(params, lr_eff);
      ++global_step;
    }

    EpochReport report;
    report.epoch = epoch;
    report.train_loss = loss_sum / static_cast<double>(train_idx.size());
    report.train_acc = run_split_accuracy(model, clean_train, train_labels, cfg.batch_size);
    report.val_acc = val_idx.empty()
                         ? report.train_acc
                         : run_split_accuracy(model, clean_val, val_labels, cfg.batch_size);
    report.lr = last_lr;
    if (cfg.record_seconds) {
      report.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    }
    result.reports.push_back(report);

    plateau_update(plateau, cfg.plateau_metric == PlateauMetric::ValAcc ? report.val_acc
                                                                        : report.train_loss);

    val_history.push_back(report.val_acc);
    if (result.best_checkpoint.empty() || report.val_acc > result.best_val_acc) {
      result.best_val_acc = report.val_acc;
      result.best_epoch = epoch;
      result.best_checkpoint = serialize_checkpoint(model);
    }
    if (early_stop_check(val_history, cfg.early_stop_patience) == EarlyStop::Stop) break;
  }

  result.final_checkpoint = serialize_checkpoint(model);
  return result;
}

template <typename T>
EvalResult evaluate_impl(const std::vector<std::uint8_t>& checkpoint,
                         const std::vector<LabeledSequence>& data) {
  Classifier<T> model = deserialize_checkpoint<T>(checkpoint);
  if (data.empty()) throw Error(ErrorCode::DataEmpty, "no samples to evaluate");
  const int size = model.cfg.image_size;
  const int num_classes = model.cfg.num_classes;

  std::vector<Tensor<T>> tensors(data.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(data.size()); ++i) {
    const SkeletonSequence normalized = normalize_sequence(data[i].seq, model.cfg.normalize);
    const SkeletonImage img = clean_encode(normalized, size);
    tensors[i] = Tensor<T>({3, size, size});
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          tensors[i][(static_cast<std::size_t>(c) * size + y) * size + x] =
              static_cast<T>(img.at(y, x, c));
  }

  EvalResult result;
  result.confusion.assign(num_classes, std::vector<long long>(num_classes, 0));
  result.predictions.resize(data.size());
  long long correct = 0;
  CounterRng unused(0);
  const int batch_size = 32;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    Tensor<T> batch({static_cast<int>(end - start), 3, size, size});
    for (std::size_t i = start; i < end; ++i) {
      std::copy(tensors[i].data.begin(), tensors[i].data.end(),
                batch.data.begin() + (i - start) * tensors[i].numel());
    }
    Tensor<T> embedding = model.forward_embedding(batch, false, unused);
    Tensor<T> logits = model.forward_logits(embedding, {}, false);
    for (std::size_t i = start; i < end; ++i) {
      const int pred = argmax_row(logits, static_cast<int>(i - start));
      result.predictions[i] = pred;
      const int truth = data[i].label;
      if (truth >= 0 && truth < num_classes) ++result.confusion[truth][pred];
      if (pred == truth) ++correct;
    }
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return result;
}

}  // namespace

TrainResult train(const std::vector<LabeledSequence>& data, const TrainConfig& config) {
  return config.model.precision == Precision::Float64 ? train_impl<double>(data, config)
                                                      : train_impl<float>(data, config);
}

EvalResult evaluate_checkpoint(const std::vector<std::uint8_t>& checkpoint,
                               const std::vector<LabeledSequence>& data) {
  const ModelConfig cfg = peek_checkpoint_config(checkpoint);
  return cfg.precision == Precision::Float64 ? evaluate_impl<double>(checkpoint, data)
                                             : evaluate_impl<float>(checkpoint, data);
}

EarlyStop early_stop_check(const std::vector<double>& val_history, int patience) {
  if (val_history.empty()) return EarlyStop::Continue;
  std::size_t best = 0;
  for (std::size_t i = 1; i < val_history.size(); ++i) {
    if (val_history[i] > val_history[best]) best = i;
  }
  const std::size_t current = val_history.size() - 1;
  return (current - best) > static_cast<std::size_t>(patience) ? EarlyStop::Stop
                                                               : EarlyStop::Continue;
}

std::string metrics_csv(const std::vector<EpochReport>& reports) {
  std::string out = "epoch,train_loss,train_acc,val_acc,lr,seconds\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.epoch, r.train_loss,
                  r.train_acc, r.val_acc, r.lr, r.seconds);
    out += buf;
  }
  return out;
}

std::string confusion_csv(const std::vector<std::vector<long long>>& confusion) {
  std::string out = "true_class";
  for (std::size_t k = 0; k < confusion.size(); ++k) {
    out += ",pred_" + std::to_string(k);
  }
  out += "\n";
  for (std::size_t t = 0; t < confusion.size(); ++t) {
    out += std::to_string(t);
    for (const long long n : confusion[t]) out += "," + std::to_string(n);
    out += "\n";
  }
  return out;
}

std::string lr_trace_csv(const std::vector<std::pair<long long, double>>& trace) {
  std::string out = "step,lr\n";
  char buf[64];
  for (const auto& [step, lr] : trace) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g\n", step, lr);
    out += buf;
  }
  return out;
}

}  // namespace skelmap
