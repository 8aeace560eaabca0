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

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "snmt/decoding.h"
#include "snmt/model.h"
#include "snmt/training.h"

SNMT_NAMESPACE_BEGIN

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

/// Every recognized key with its default.
const std::vector<ConfigKey>& config_keys();

/// Flat key=value settings. Lines starting with '#' and blank lines are
/// ignored; unknown keys are errors.
class RunConfig {
 public:
  RunConfig();

  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  ModelConfig model_config() const;
  TrainConfig train_config() const;
  DecodeOptions decode_options() const;
  /// 1 when the case feature is enabled, else 0.
  int feature_count() const { return get_bool("case_feature") ? 1 : 0; }

  /// All keys with their current values, in key order.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

SNMT_NAMESPACE_END
