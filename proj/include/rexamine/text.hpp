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

#include <string>
#include <string_view>

namespace rexamine::text {

// NFC-normalize UTF-8 input and fold CRLF / lone CR to LF. Throws
// Error(kParseError) on invalid UTF-8.
std::string normalize(std::string_view utf8);

bool is_valid_utf8(std::string_view s);

// Unicode-aware lowercase of UTF-8 text.
std::string to_lower(std::string_view utf8);

std::string_view trim(std::string_view s);

inline bool is_blank(std::string_view s) { return trim(s).empty(); }

// ASCII whitespace (space, tab, CR, LF, VT, FF).
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace rexamine::text
