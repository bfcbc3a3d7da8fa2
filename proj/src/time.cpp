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

#include "rexamine/time.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "rexamine/error.hpp"

namespace rexamine {

UtcInstant UtcInstant::now() {
  return UtcInstant(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

UtcInstant UtcInstant::reproducible_now() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    char* end = nullptr;
    long long secs = std::strtoll(epoch, &end, 10);
    if (end != nullptr && *end == '\0') return UtcInstant(std::chrono::sys_seconds(std::chrono::seconds(secs)));
  }
  return now();
}

UtcInstant UtcInstant::parse(std::string_view iso) {
  std::tm tm{};
  char z = 0;
  const std::string s(iso);
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                  &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &z, &consumed) != 7 ||
      z != 'Z' || static_cast<std::size_t>(consumed) != s.size()) {
    throw Error(ErrorCode::kParseError, "bad UTC timestamp: " + s);
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return UtcInstant(std::chrono::sys_seconds(std::chrono::seconds(timegm(&tm))));
}

std::string UtcInstant::iso() const {
  std::time_t tt = static_cast<std::time_t>(t_.time_since_epoch().count());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace rexamine
