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

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <set>
#include <string>
#include <vector>

#include "skelmap/augment.hpp"
#include "skelmap/config.hpp"
#include "skelmap/error.hpp"
#include "skelmap/image.hpp"
#include "skelmap/io.hpp"
#include "skelmap/normalize.hpp"
#include "skelmap/skeleton.hpp"
#include "skelmap/toyset.hpp"
#include "skelmap/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace skelmap;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("SKELMAP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// All .skeleton files under dir, sorted by name for reproducible ordering.
std::vector<fs::path> skeleton_files(const std::string& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::IoError, dir + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".skeleton") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

LabeledSequence load_labeled(const fs::path& path) {
  LabeledSequence s;
  s.name = path.stem().string();
  s.seq = parse_skeleton_file(read_text_file(path.string()));
  s.seq.meta = parse_sample_name(s.name);
  s.label = s.seq.meta.action_id - 1;
  return s;
}

std::vector<LabeledSequence> load_dataset(const std::string& dir, const std::string& list_path) {
  std::set<std::string> wanted;
  if (!list_path.empty()) {
    std::istringstream in(read_text_file(list_path));
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty()) wanted.insert(line);
    }
    if (wanted.empty()) throw Error(ErrorCode::DataEmpty, "sample list is empty: " + list_path);
  }
  std::vector<LabeledSequence> data;
  for (const auto& path : skeleton_files(dir)) {
    if (!wanted.empty() && !wanted.count(path.stem().string())) continue;
    data.push_back(load_labeled(path));
  }
  if (data.empty()) throw Error(ErrorCode::DataEmpty, "no samples under " + dir);
  return data;
}

NormalizeMode parse_normalize_flag(const std::string& value) {
  return *normalize_mode_from_name(value);  // choices enforced by CLI11
}

std::vector<std::string> all_op_names() {
  std::vector<std::string> names;
  for (const AugmentKind kind : AugmentPolicy::full_catalog()) {
    names.emplace_back(augment_kind_name(kind));
  }
  return names;
}

// --- subcommand bodies -------------------------------------------------------

int cmd_parse(const std::vector<std::string>& files) {
  for (const auto& file : files) {
    const SkeletonSequence seq = parse_skeleton_file(read_text_file(file));
    json record;
    record["file"] = file;
    record["frames"] = seq.num_frames();
    record["bodies"] = seq.max_bodies();
    try {
      const SampleMeta meta = parse_sample_name(stem_of(file));
      record["name"] = format_sample_name(meta);
      record["setup"] = meta.setup_id;
      record["camera"] = meta.camera_id;
      record["subject"] = meta.subject_id;
      record["replication"] = meta.replication_id;
      record["action"] = meta.action_id;
    } catch (const Error&) {
      record["name"] = nullptr;
    }
    std::cout << record.dump() << "\n";
  }
  return 0;
}

int cmd_encode(const std::vector<std::string>& files, const std::string& out_dir,
               NormalizeMode mode, int image_size, bool global_range) {
  fs::create_directories(out_dir);

  std::vector<SkeletonSequence> normalized;
  normalized.reserve(files.size());
  for (const auto& file : files) {
    normalized.push_back(normalize_sequence(parse_skeleton_file(read_text_file(file)), mode));
  }

  ChannelRange shared;
  if (global_range) {
    bool first = true;
    for (const auto& seq : normalized) {
      const ChannelRange r = compute_channel_range(seq);
      if (first) {
        shared = r;
        first = false;
      } else {
        for (int c = 0; c < 3; ++c) {
          shared.c_min[c] = std::min(shared.c_min[c], r.c_min[c]);
          shared.c_max[c] = std::max(shared.c_max[c], r.c_max[c]);
        }
      }
    }
  }

  for (std::size_t i = 0; i < files.size(); ++i) {
    const SkeletonSequence& seq = normalized[i];
    SkeletonImage img = encode(seq, global_range ? shared : compute_channel_range(seq));
    if (image_size > 0) img = resize_bilinear(img, image_size, image_size);
    const std::string stem = stem_of(files[i]);
    atomic_write_file((fs::path(out_dir) / (stem + ".ppm")).string(), ppm_encode(img));
    const std::string meta = stem + " " + std::to_string(seq.num_frames()) + " " +
                             std::to_string(seq.max_bodies()) + "\n";
    atomic_write_file((fs::path(out_dir) / (stem + ".ppm.meta")).string(), meta);
  }
  return 0;
}

int cmd_augment(const std::string& in_file, const std::string& out_dir, const std::string& op_name,
                double magnitude, std::uint64_t seed, NormalizeMode mode) {
  const auto kind = augment_kind_from_name(op_name);
  if (!kind) throw Error(ErrorCode::WrongDomain, "unknown op: " + op_name);
  const AugmentOp op{*kind, magnitude};

  const SkeletonSequence seq =
      normalize_sequence(parse_skeleton_file(read_text_file(in_file)), mode);
  CounterRng rng = CounterRng::substream(seed, 0xa06);

  const SkeletonImage before = encode(seq, compute_channel_range(seq));
  SkeletonImage after;
  if (op_domain(*kind) != AugmentDomain::ImageSpace) {
    const SkeletonSequence changed = apply_skeleton_op(seq, op, rng);
    after = encode(changed, compute_channel_range(changed));
  } else {
    after = apply_image_op(before, op, rng);
  }

  fs::create_directories(out_dir);
  const std::string stem = stem_of(in_file);
  atomic_write_file((fs::path(out_dir) / (stem + "_before.ppm")).string(), ppm_encode(before));
  atomic_write_file((fs::path(out_dir) / (stem + "_after.ppm")).string(), ppm_encode(after));
  return 0;
}

std::vector<int> parse_id_list(const std::string& csv, const std::string& file) {
  std::vector<int> ids;
  std::string source = csv;
  if (!file.empty()) {
    source = read_text_file(file);
    for (auto& c : source) {
      if (c == '\n' || c == '\r' || c == ' ' || c == '\t') c = ',';
    }
  }
  std::istringstream in(source);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    ids.push_back(std::stoi(item));
  }
  if (ids.empty()) throw Error(ErrorCode::ConfigInvalid, "no train-side ids given");
  return ids;
}

int cmd_split(const std::string& dir, const std::string& protocol_name, const std::string& ids_csv,
              const std::string& ids_file, const std::string& out_train,
              const std::string& out_test) {
  Protocol protocol;
  if (protocol_name == "cs") {
    protocol = Protocol::CrossSubject;
  } else if (protocol_name == "cv") {
    protocol = Protocol::CrossView;
  } else if (protocol_name == "csetup") {
    protocol = Protocol::CrossSetup;
  } else {
    throw Error(ErrorCode::ConfigInvalid, "protocol must be cs|cv|csetup");
  }

  std::vector<std::string> names;
  std::vector<SampleMeta> metas;
  for (const auto& path : skeleton_files(dir)) {
    names.push_back(path.stem().string());
    metas.push_back(parse_sample_name(names.back()));
  }
  if (metas.empty()) throw Error(ErrorCode::DataEmpty, "no samples under " + dir);

  const Split split = split_dataset(metas, protocol, {parse_id_list(ids_csv, ids_file)});
  std::string train_text, test_text;
  for (const auto i : split.train) train_text += names[i] + "\n";
  for (const auto i : split.test) test_text += names[i] + "\n";
  atomic_write_file(out_train, train_text);
  atomic_write_file(out_test, test_text);
  std::cout << "train " << split.train.size() << " test " << split.test.size() << "\n";
  return 0;
}

int cmd_gen_toy(const std::string& out_dir, std::uint64_t seed, int per_class, int classes) {
  ToyConfig toy;
  toy.seed = seed;
  toy.samples_per_class = per_class;
  toy.num_classes = classes;
  fs::create_directories(out_dir);
  for (const auto& sample : generate_toy_dataset(toy)) {
    atomic_write_file((fs::path(out_dir) / (sample.name + ".skeleton")).string(),
                      serialize_skeleton_file(sample.seq));
  }
  return 0;
}

int cmd_train(const std::string& dir, const std::string& list_path, const ConfigMap& overrides,
              const std::string& config_path, const std::string& policy_path,
              const std::string& out_dir) {
  ConfigMap map;
  if (!config_path.empty()) map = parse_config_text(read_text_file(config_path));
  if (!policy_path.empty()) {
    for (const auto& [k, v] : parse_config_text(read_text_file(policy_path))) map[k] = v;
  }
  for (const auto& [k, v] : overrides) map[k] = v;

  const std::vector<LabeledSequence> data = load_dataset(dir, list_path);
  TrainConfig cfg = train_config_from_map(map);
  if (!map.count("num_classes")) {
    int max_label = 0;
    for (const auto& s : data) max_label = std::max(max_label, s.label);
    cfg.model.num_classes = max_label + 1;
  }

  const TrainResult result = train(data, cfg);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  atomic_write_file((out / "model_final.ckpt").string(), result.final_checkpoint);
  atomic_write_file((out / "model_best.ckpt").string(), result.best_checkpoint);
  atomic_write_file((out / "metrics.csv").string(), metrics_csv(result.reports));
  atomic_write_file((out / "lr_trace.csv").string(), lr_trace_csv(result.lr_trace));
  std::string val_names;
  for (const auto i : result.val_indices) val_names += data[i].name + "\n";
  atomic_write_file((out / "val_ids.txt").string(), val_names);

  const EpochReport& last = result.reports.back();
  std::cout << "epochs " << result.reports.size() << " train_acc " << last.train_acc
            << " val_acc " << last.val_acc << " best_val_acc " << result.best_val_acc
            << " (epoch " << result.best_epoch << ")\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dir,
             const std::string& list_path, const std::string& confusion_path) {
  const std::vector<LabeledSequence> data = load_dataset(dir, list_path);
  const EvalResult result = evaluate_checkpoint(read_binary_file(checkpoint_path), data);
  if (!confusion_path.empty()) {
    atomic_write_file(confusion_path, confusion_csv(result.confusion));
  }
  std::cout.precision(17);
  std::cout << "accuracy " << result.accuracy << " samples " << data.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"skeleton action maps: parse, encode, augment, split, train, evaluate"};
  app.require_subcommand(1);

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "summarize skeleton files as JSON lines");
  std::vector<std::string> parse_files;
  std::uint64_t unused_seed = 0;
  parse_cmd->add_option("files", parse_files, "skeleton files")->required();
  parse_cmd->add_option("--seed", unused_seed, "accepted for uniformity; parse is deterministic");

  // encode
  auto* encode_cmd = app.add_subcommand("encode", "write spatiotemporal maps as PPM");
  std::vector<std::string> encode_files;
  std::string encode_out = "encoded";
  std::string encode_normalize = "sequence";
  int encode_size = 0;
  bool encode_global = false;
  encode_cmd->add_option("files", encode_files, "skeleton files")->required();
  encode_cmd->add_option("--out", encode_out, "output directory");
  encode_cmd->add_option("--normalize", encode_normalize, "frame|sequence|none")
      ->check(CLI::IsMember({"frame", "sequence", "none"}));
  encode_cmd->add_option("--image-size", encode_size, "resize to NxN (0 = raw size)");
  encode_cmd->add_flag("--global-range", encode_global, "one range over all inputs");
  encode_cmd->add_option("--seed", unused_seed, "accepted for uniformity; encode is deterministic");

  // augment
  auto* augment_cmd = app.add_subcommand("augment", "preview one augmentation op");
  std::string augment_in, augment_out = "augmented", augment_op;
  double augment_magnitude = 0.3;
  std::uint64_t augment_seed = 0;
  std::string augment_normalize = "sequence";
  augment_cmd->add_option("--in", augment_in, "skeleton file")->required();
  augment_cmd->add_option("--out", augment_out, "output directory");
  augment_cmd->add_option("--op", augment_op, "op name (e.g. rotate, cutout)")
      ->required()
      ->check(CLI::IsMember(all_op_names()));
  augment_cmd->add_option("--magnitude", augment_magnitude, "magnitude in [0,1]");
  augment_cmd->add_option("--seed", augment_seed, "rng seed");
  augment_cmd->add_option("--normalize", augment_normalize, "frame|sequence|none")
      ->check(CLI::IsMember({"frame", "sequence", "none"}));

  // split
  auto* split_cmd = app.add_subcommand("split", "protocol-conformant train/test split");
  std::string split_dir, split_protocol = "cv", split_ids, split_ids_file;
  std::string split_out_train = "train_ids.txt", split_out_test = "test_ids.txt";
  split_cmd->add_option("--data", split_dir, "dataset directory")->required();
  split_cmd->add_option("--protocol", split_protocol, "cs|cv|csetup")
      ->check(CLI::IsMember({"cs", "cv", "csetup"}));
  split_cmd->add_option("--train-ids", split_ids, "comma-separated train-side key ids");
  split_cmd->add_option("--train-ids-file", split_ids_file, "text file of train-side key ids");
  split_cmd->add_option("--out-train", split_out_train, "train name list path");
  split_cmd->add_option("--out-test", split_out_test, "test name list path");
  split_cmd->add_option("--seed", unused_seed, "accepted for uniformity; split is deterministic");

  // gen-toy
  auto* toy_cmd = app.add_subcommand("gen-toy", "generate the synthetic motion dataset");
  std::string toy_out = "toyset";
  std::uint64_t toy_seed = 7;
  int toy_per_class = 60, toy_classes = 5;
  toy_cmd->add_option("--out", toy_out, "output directory");
  toy_cmd->add_option("--seed", toy_seed, "generator seed");
  toy_cmd->add_option("--samples-per-class", toy_per_class, "samples per class");
  toy_cmd->add_option("--classes", toy_classes, "number of classes");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the classifier");
  std::string train_dir, train_list, train_config, train_policy, train_out = "run";
  train_cmd->add_option("--data", train_dir, "dataset directory")->required();
  train_cmd->add_option("--list", train_list, "sample name list (from split)");
  train_cmd->add_option("--config", train_config, "key=value config file");
  train_cmd->add_option("--policy", train_policy, "augmentation policy config file");
  train_cmd->add_option("--out", train_out, "output directory");
  ConfigMap overrides;
  std::map<std::string, std::string> flag_to_key = {
      {"--epochs", "epochs"},         {"--batch-size", "batch_size"},
      {"--optimizer", "optimizer"},   {"--lr", "lr"},
      {"--loss", "loss"},             {"--normalize", "normalize"},
      {"--image-size", "image_size"}, {"--tier", "tier"},
      {"--seed", "seed"},             {"--plateau-metric", "plateau_metric"},
      {"--precision", "precision"},   {"--augment", "augment"},
      {"--arcface-s", "arcface_s"},   {"--arcface-m", "arcface_m"},
      {"--label-smoothing", "label_smoothing"},
  };
  for (const auto& [flag, key] : flag_to_key) {
    train_cmd->add_option_function<std::string>(
        flag, [&overrides, key = key](const std::string& v) { overrides[key] = v; },
        "overrides config key " + key);
  }
  bool no_timing = false;
  train_cmd->add_flag("--no-timing", no_timing, "write 0.000 in the seconds column");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt, eval_dir, eval_list, eval_confusion;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_dir, "dataset directory")->required();
  eval_cmd->add_option("--list", eval_list, "sample name list (from split)");
  eval_cmd->add_option("--out-confusion", eval_confusion, "confusion matrix CSV path");
  eval_cmd->add_option("--seed", unused_seed, "accepted for uniformity; eval is deterministic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*parse_cmd) return cmd_parse(parse_files);
    if (*encode_cmd) {
      return cmd_encode(encode_files, encode_out, parse_normalize_flag(encode_normalize),
                        encode_size, encode_global);
    }
    if (*augment_cmd) {
      return cmd_augment(augment_in, augment_out, augment_op, augment_magnitude, augment_seed,
                         parse_normalize_flag(augment_normalize));
    }
    if (*split_cmd) {
      return cmd_split(split_dir, split_protocol, split_ids, split_ids_file, split_out_train,
                       split_out_test);
    }
    if (*toy_cmd) return cmd_gen_toy(toy_out, toy_seed, toy_per_class, toy_classes);
    if (*train_cmd) {
      if (no_timing) overrides["record_seconds"] = "0";
      return cmd_train(train_dir, train_list, overrides, train_config, train_policy, train_out);
    }
    if (*eval_cmd) return cmd_eval(eval_ckpt, eval_dir, eval_list, eval_confusion);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
