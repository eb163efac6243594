// Copyright 2026 The Panofuse Authors.
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

#include "panofuse/random.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace panofuse {

namespace {

constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

uint64_t Mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t SplitMix64::Next() {
  state_ += kGamma;
  return Mix(state_);
}

double SplitMix64::Uniform() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

uint64_t SplitMix64::Below(uint64_t n) {
  return static_cast<uint64_t>(
      (static_cast<unsigned __int128>(Next()) * n) >> 64);
}

int SplitMix64::UniformInt(int lo, int hi_inclusive) {
  if (hi_inclusive < lo) throw std::invalid_argument("UniformInt: empty range");
  return lo + static_cast<int>(
                  Below(static_cast<uint64_t>(hi_inclusive - lo) + 1));
}

double SplitMix64::Gaussian() {
  // 1 - U keeps the log argument in (0, 1].
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  return Mix(seed ^ Mix(stream + kGamma));
}

std::vector<int> SampleWithoutReplacement(int n, int k, uint64_t seed) {
  if (k < 0 || k > n) {
    throw std::invalid_argument("SampleWithoutReplacement: need 0 <= k <= n");
  }
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  SplitMix64 rng(seed);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.Below(static_cast<uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> picked(pool.begin(), pool.begin() + k);
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace panofuse
