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

// The library is compiled twice: once with 32-bit reals for training and
// inference, once with 64-bit reals for gradient checks. Every declaration
// lives in an inline namespace named after the build so both variants can
// be linked into one binary.
#ifdef SNMT_REAL_DOUBLE
#define SNMT_ABI_NAMESPACE f64
#else
#define SNMT_ABI_NAMESPACE f32
#endif

#define SNMT_NAMESPACE_BEGIN \
  namespace snmt {           \
  inline namespace SNMT_ABI_NAMESPACE {
#define SNMT_NAMESPACE_END \
  }                        \
  }
