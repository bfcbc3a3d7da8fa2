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

// Scalar reference kernels. Plain left-to-right accumulation; every SIMD
// variant is tested against these.

#include "rexamine/kernels/kernels.hpp"

namespace rexamine::kernels::detail {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double centered_dot_scalar(const double* x, double mx, const double* y, double my, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += (x[i] - mx) * (y[i] - my);
  return acc;
}

}  // namespace

const KernelTable kScalarTable{&sum_scalar, &dot_scalar, &centered_dot_scalar};

}  // namespace rexamine::kernels::detail
