/* Copyright 2026 The Apsens Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <stdexcept>
#include <string>

namespace apsens {

// A document that is not structurally valid COCO JSON.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a data contract (bad ids, negative
// extents, out-of-range scores, mixed image/category buckets, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure (missing file, unwritable path).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A broken internal invariant; maps to exit code 3 in the CLI.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace apsens
