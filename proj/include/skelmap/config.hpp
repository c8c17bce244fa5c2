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

#include <map>
#include <optional>
#include <string>

#include "skelmap/trainer.hpp"

namespace skelmap {

using ConfigMap = std::map<std::string, std::string>;

// Flat "key = value" lines; '#' starts a comment; blank lines ignored.
ConfigMap parse_config_text(const std::string& text);

// Builds a TrainConfig from the map (unknown keys rejected; missing keys take
// defaults). Flags are merged into the map before calling this, so the CLI
// override order is "file first, flags win".
TrainConfig train_config_from_map(const ConfigMap& map);

std::optional<NormalizeMode> normalize_mode_from_name(const std::string& name);
std::optional<LossKind> loss_kind_from_name(const std::string& name);

}  // namespace skelmap
