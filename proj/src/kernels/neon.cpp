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

// NEON kernels for aarch64, where Advanced SIMD with float64 lanes is
// architecturally guaranteed.

#include <arm_neon.h>

#include "rexamine/kernels/kernels.hpp"

namespace rexamine::kernels::detail {
namespace {

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(x + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(x + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double centered_dot_neon(const double* x, double mx, const double* y, double my, std::size_t n) {
  const float64x2_t vmx = vdupq_n_f64(mx);
  const float64x2_t vmy = vdupq_n_f64(my);
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float64x2_t dx0 = vsubq_f64(vld1q_f64(x + i), vmx);
    float64x2_t dy0 = vsubq_f64(vld1q_f64(y + i), vmy);
    float64x2_t dx1 = vsubq_f64(vld1q_f64(x + i + 2), vmx);
    float64x2_t dy1 = vsubq_f64(vld1q_f64(y + i + 2), vmy);
    acc0 = vfmaq_f64(acc0, dx0, dy0);
    acc1 = vfmaq_f64(acc1, dx1, dy1);
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += (x[i] - mx) * (y[i] - my);
  return acc;
}

}  // namespace

const KernelTable kNeonTable{&sum_neon, &dot_neon, &centered_dot_neon};

}  // namespace rexamine::kernels::detail
