// Copyright 2026 The qelm developers.

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace qelm {

/// Invalid or inconsistent run configuration (bad walk layout, bad sweep
/// sizes, malformed config file). Raised before any output is produced.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A sampled measurement record carries no usable information (e.g. zero
/// total counts under conditional features). Callers may retry or drop.
class DegenerateSampleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace qelm
