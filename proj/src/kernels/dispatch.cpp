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

#include <cstdlib>
#include <string>

#include "rexamine/error.hpp"
#include "rexamine/kernels/kernels.hpp"

namespace rexamine::kernels {
namespace {

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if REXAMINE_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::kNeon:
      return REXAMINE_HAVE_NEON != 0;
  }
  return false;
}

Backend pick_backend() {
  if (const char* forced = std::getenv("REXAMINE_SIMD"); forced != nullptr && *forced != '\0') {
    const std::string want(forced);
    for (Backend b : {Backend::kScalar, Backend::kAvx2, Backend::kNeon}) {
      if (want == backend_name(b) && cpu_supports(b)) return b;
    }
  }
  if (cpu_supports(Backend::kAvx2)) return Backend::kAvx2;
  if (cpu_supports(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

const KernelTable& active_table() {
  static const KernelTable& t = table_for(active_backend());
  return t;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) { return cpu_supports(b); }

const KernelTable& table_for(Backend b) {
  if (!cpu_supports(b)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel backend not available: " + std::string(backend_name(b)));
  }
  switch (b) {
#if REXAMINE_HAVE_AVX2
    case Backend::kAvx2: return detail::kAvx2Table;
#endif
#if REXAMINE_HAVE_NEON
    case Backend::kNeon: return detail::kNeonTable;
#endif
    default: return detail::kScalarTable;
  }
}

Backend active_backend() {
  static const Backend b = pick_backend();
  return b;
}

double sum(std::span<const double> x) { return active_table().sum(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "dot: operand lengths differ");
  return active_table().dot(x.data(), y.data(), x.size());
}

double centered_dot(std::span<const double> x, double mx, std::span<const double> y, double my) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "centered_dot: operand lengths differ");
  }
  return active_table().centered_dot(x.data(), mx, y.data(), my, x.size());
}

}  // namespace rexamine::kernels
