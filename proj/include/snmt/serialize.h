/* Copyright 2026 The snmt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "snmt/model.h"

SNMT_NAMESPACE_BEGIN

inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelFileError { kIo, kBadMagic, kUnsupportedVersion, kTruncated, kCorrupt };

const char* model_file_error_name(ModelFileError code);

class ModelFormatError : public std::runtime_error {
 public:
  ModelFormatError(ModelFileError code, const std::string& what)
      : std::runtime_error(std::string(model_file_error_name(code)) + ": " + what), code_(code) {}
  ModelFileError code() const { return code_; }

 private:
  ModelFileError code_;
};

/// Binary model image:
///   "SNMT" | u32 version | u32 n + metadata text | u32 count + tensors |
///   u32 count + bitsets
/// Integers and float32 values are little-endian. Metadata holds the
/// configuration and both vocabularies as key=value lines.
std::string serialize_model(const NmtModel& model);
NmtModel deserialize_model(std::string_view bytes);

void save_model(const NmtModel& model, const std::string& path);
NmtModel load_model(const std::string& path);

/// Configuration lines as stored in the metadata block.
std::string format_model_config(const ModelConfig& config);

SNMT_NAMESPACE_END
