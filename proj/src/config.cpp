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

#include "skelmap/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "skelmap/error.hpp"

namespace skelmap {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigInvalid, "bad numeric value for " + key + ": " + value);
  }
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigInvalid, "bad integer value for " + key + ": " + value);
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "epochs", "batch_size", "optimizer", "lr", "sgd_momentum", "weight_decay",
      "madgrad_momentum", "madgrad_eps", "cosine_lr_min", "plateau_factor",
      "plateau_patience", "plateau_metric", "early_stop_patience", "val_fraction",
      "seed", "augment", "policy_ops", "policy_n", "tier", "weak_magnitude",
      "strong_magnitude", "policy_seed", "noise_weak_only", "loss", "label_smoothing",
      "arcface_s", "arcface_m", "normalize", "image_size", "num_classes", "embed_dim",
      "dropout", "bn_momentum", "channels", "precision", "record_seconds",
  };
  return keys;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigInvalid,
                  "line " + std::to_string(line_no) + ": expected key=value");
    }
    map[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return map;
}

std::optional<NormalizeMode> normalize_mode_from_name(const std::string& name) {
  if (name == "frame") return NormalizeMode::FrameBased;
  if (name == "sequence") return NormalizeMode::SequenceBased;
  if (name == "none") return NormalizeMode::None;
  return std::nullopt;
}

std::optional<LossKind> loss_kind_from_name(const std::string& name) {
  if (name == "ce") return LossKind::CrossEntropy;
  if (name == "ce-smooth") return LossKind::CrossEntropySmooth;
  if (name == "arcface") return LossKind::ArcFace;
  return std::nullopt;
}

TrainConfig train_config_from_map(const ConfigMap& map) {
  for (const auto& [key, value] : map) {
    if (!known_keys().count(key)) {
      throw Error(ErrorCode::ConfigInvalid, "unknown config key: " + key);
    }
  }
  TrainConfig cfg;
  auto str = [&](const char* key, const std::string& fallback) {
    const auto it = map.find(key);
    return it == map.end() ? fallback : it->second;
  };
  auto num = [&](const char* key, double fallback) {
    const auto it = map.find(key);
    return it == map.end() ? fallback : to_double(key, it->second);
  };
  auto integer = [&](const char* key, long long fallback) {
    const auto it = map.find(key);
    return it == map.end() ? fallback : to_int(key, it->second);
  };

  cfg.epochs = static_cast<int>(integer("epochs", cfg.epochs));
  cfg.batch_size = static_cast<int>(integer("batch_size", cfg.batch_size));
  const std::string opt = str("optimizer", "madgrad");
  if (opt == "sgd") {
    cfg.optimizer = OptimizerKind::Sgd;
  } else if (opt == "madgrad") {
    cfg.optimizer = OptimizerKind::Madgrad;
  } else {
    throw Error(ErrorCode::ConfigInvalid, "optimizer must be sgd|madgrad");
  }
  cfg.lr = num("lr", cfg.lr);
  cfg.sgd_momentum = num("sgd_momentum", cfg.sgd_momentum);
  cfg.weight_decay = num("weight_decay", cfg.weight_decay);
  cfg.madgrad_momentum = num("madgrad_momentum", cfg.madgrad_momentum);
  cfg.madgrad_eps = num("madgrad_eps", cfg.madgrad_eps);
  cfg.cosine_lr_min = num("cosine_lr_min", cfg.cosine_lr_min);
  cfg.plateau_factor = num("plateau_factor", cfg.plateau_factor);
  cfg.plateau_patience = static_cast<int>(integer("plateau_patience", cfg.plateau_patience));
  const std::string metric = str("plateau_metric", "val_acc");
  if (metric == "val_acc") {
    cfg.plateau_metric = PlateauMetric::ValAcc;
  } else if (metric == "train_loss") {
    cfg.plateau_metric = PlateauMetric::TrainLoss;
  } else {
    throw Error(ErrorCode::ConfigInvalid, "plateau_metric must be val_acc|train_loss");
  }
  cfg.early_stop_patience = static_cast<int>(integer("early_stop_patience", cfg.early_stop_patience));
  cfg.val_fraction = num("val_fraction", cfg.val_fraction);
  cfg.master_seed = static_cast<std::uint64_t>(integer("seed", 1));

  const std::string augment = str("augment", "on");
  if (augment == "on") {
    cfg.augment_enabled = true;
  } else if (augment == "off") {
    cfg.augment_enabled = false;
  } else {
    throw Error(ErrorCode::ConfigInvalid, "augment must be on|off");
  }
  const std::string ops = str("policy_ops", "default");
  if (ops == "default") {
    cfg.policy.catalog = AugmentPolicy::default_catalog();
  } else if (ops == "all") {
    cfg.policy.catalog = AugmentPolicy::full_catalog();
  } else {
    cfg.policy.catalog.clear();
    std::istringstream list(ops);
    std::string item;
    while (std::getline(list, item, ',')) {
      const auto kind = augment_kind_from_name(trim(item));
      if (!kind) throw Error(ErrorCode::ConfigInvalid, "unknown augment op: " + item);
      cfg.policy.catalog.push_back(*kind);
    }
    if (cfg.policy.catalog.empty()) {
      throw Error(ErrorCode::ConfigInvalid, "policy_ops lists no ops");
    }
  }
  cfg.policy.num_ops = static_cast<int>(integer("policy_n", cfg.policy.num_ops));
  const std::string tier = str("tier", "weak");
  if (tier == "weak") {
    cfg.policy.tier = AugmentPolicy::Tier::Weak;
  } else if (tier == "strong") {
    cfg.policy.tier = AugmentPolicy::Tier::Strong;
  } else {
    throw Error(ErrorCode::ConfigInvalid, "tier must be weak|strong");
  }
  cfg.policy.weak_magnitude = num("weak_magnitude", cfg.policy.weak_magnitude);
  cfg.policy.strong_magnitude = num("strong_magnitude", cfg.policy.strong_magnitude);
  cfg.policy.noise_weak_only = integer("noise_weak_only", 1) != 0;
  cfg.policy.seed = static_cast<std::uint64_t>(integer("policy_seed", 0));

  const std::string loss = str("loss", "arcface");
  const auto loss_kind = loss_kind_from_name(loss);
  if (!loss_kind) throw Error(ErrorCode::ConfigInvalid, "loss must be ce|ce-smooth|arcface");
  cfg.model.loss = *loss_kind;
  cfg.model.label_smoothing = num("label_smoothing", cfg.model.label_smoothing);
  cfg.model.arcface_scale = num("arcface_s", cfg.model.arcface_scale);
  cfg.model.arcface_margin = num("arcface_m", cfg.model.arcface_margin);

  const std::string normalize = str("normalize", "sequence");
  const auto mode = normalize_mode_from_name(normalize);
  if (!mode) throw Error(ErrorCode::ConfigInvalid, "normalize must be frame|sequence|none");
  cfg.model.normalize = *mode;

  cfg.model.image_size = static_cast<int>(integer("image_size", cfg.model.image_size));
  cfg.model.num_classes = static_cast<int>(integer("num_classes", cfg.model.num_classes));
  cfg.model.embed_dim = static_cast<int>(integer("embed_dim", cfg.model.embed_dim));
  cfg.model.dropout = num("dropout", cfg.model.dropout);
  cfg.model.bn_momentum = num("bn_momentum", cfg.model.bn_momentum);

  const auto channels_it = map.find("channels");
  if (channels_it != map.end()) {
    std::istringstream list(channels_it->second);
    std::string item;
    int idx = 0;
    while (std::getline(list, item, ',') && idx < 3) {
      cfg.model.channels[idx++] = static_cast<int>(to_int("channels", trim(item)));
    }
    if (idx != 3) throw Error(ErrorCode::ConfigInvalid, "channels wants three values");
  }

  const std::string precision = str("precision", "f32");
  if (precision == "f32") {
    cfg.model.precision = Precision::Float32;
  } else if (precision == "f64") {
    cfg.model.precision = Precision::Float64;
  } else {
    throw Error(ErrorCode::ConfigInvalid, "precision must be f32|f64");
  }
  cfg.record_seconds = integer("record_seconds", 1) != 0;
  return cfg;
}

}  // namespace skelmap
