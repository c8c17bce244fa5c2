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

#include "skelmap/error.hpp"

namespace skelmap {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::JointCountMismatch: return "JointCountMismatch";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::PatternMismatch: return "PatternMismatch";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::WrongDomain: return "WrongDomain";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ZeroEmbedding: return "ZeroEmbedding";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::DataEmpty: return "DataEmpty";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace skelmap
