// Copyright 2026 The rexamine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace rexamine {

// A UTC instant with one-second resolution, serialized as
// "YYYY-MM-DDTHH:MM:SSZ".
class UtcInstant {
 public:
  UtcInstant() = default;
  explicit UtcInstant(std::chrono::sys_seconds t) : t_(t) {}

  static UtcInstant now();

  // SOURCE_DATE_EPOCH when set (reproducible builds convention), else now().
  static UtcInstant reproducible_now();

  // Throws Error(kParseError) on anything but the canonical format.
  static UtcInstant parse(std::string_view iso);

  std::string iso() const;
  std::chrono::sys_seconds time() const { return t_; }

  auto operator<=>(const UtcInstant&) const = default;

 private:
  std::chrono::sys_seconds t_{};
};

}  // namespace rexamine
