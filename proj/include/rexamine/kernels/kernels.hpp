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

// Reduction kernels behind the numeric paths (cosine similarity, sample
// moments, Pearson correlation). Each kernel has a scalar reference
// implementation and optional AVX2 / NEON variants; the fastest variant the
// CPU supports is selected once at first use. Set REXAMINE_SIMD=scalar (or
// avx2, neon) to force a backend.
//
// The variants differ only in summation order, so results agree with the
// scalar reference to a few ulps per element, not bit-for-bit.

#include <cstddef>
#include <span>
#include <string_view>

namespace rexamine::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i (x_i - mx) * (y_i - my)
  double (*centered_dot)(const double* x, double mx, const double* y, double my, std::size_t n);
};

std::string_view backend_name(Backend b);

// Compiled in and supported by the running CPU.
bool backend_available(Backend b);

// Table for a specific backend. Throws Error(kInvalidArgument) when the
// backend is not available.
const KernelTable& table_for(Backend b);

Backend active_backend();

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double centered_dot(std::span<const double> x, double mx, std::span<const double> y, double my);

namespace detail {
extern const KernelTable kScalarTable;
#if REXAMINE_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif
#if REXAMINE_HAVE_NEON
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace rexamine::kernels
