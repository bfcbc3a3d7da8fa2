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

// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached after the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include "rexamine/kernels/kernels.hpp"

namespace rexamine::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  if (i + 4 <= n) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double centered_dot_avx2(const double* x, double mx, const double* y, double my, std::size_t n) {
  const __m256d vmx = _mm256_set1_pd(mx);
  const __m256d vmy = _mm256_set1_pd(my);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d dx0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmx);
    __m256d dy0 = _mm256_sub_pd(_mm256_loadu_pd(y + i), vmy);
    __m256d dx1 = _mm256_sub_pd(_mm256_loadu_pd(x + i + 4), vmx);
    __m256d dy1 = _mm256_sub_pd(_mm256_loadu_pd(y + i + 4), vmy);
    acc0 = _mm256_fmadd_pd(dx0, dy0, acc0);
    acc1 = _mm256_fmadd_pd(dx1, dy1, acc1);
  }
  if (i + 4 <= n) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vmy);
    acc0 = _mm256_fmadd_pd(dx, dy, acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += (x[i] - mx) * (y[i] - my);
  return acc;
}

}  // namespace

const KernelTable kAvx2Table{&sum_avx2, &dot_avx2, &centered_dot_avx2};

}  // namespace rexamine::kernels::detail
