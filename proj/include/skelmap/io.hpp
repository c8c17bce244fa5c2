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
#include <vector>

namespace skelmap {

std::vector<std::uint8_t> read_binary_file(const std::string& path);
std::string read_text_file(const std::string& path);

// Writes to a temp file in the target directory and renames into place, so
// interrupted runs never leave a truncated file under the final name.
void atomic_write_file(const std::string& path, const void* data, std::size_t size);
void atomic_write_file(const std::string& path, const std::string& text);
void atomic_write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace skelmap
