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

#ifndef PANOFUSE_RANDOM_H_
#define PANOFUSE_RANDOM_H_

#include <cstdint>
#include <vector>

namespace panofuse {

// SplitMix64 counter-based generator. The n-th output (n = 1, 2, ...) is
// Mix(seed + n * 0x9E3779B97F4A7C15), so streams are identical on every
// platform and any element can be recomputed from (seed, n).
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t Next();
  // 53-bit uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Multiply-shift reduction of one 64-bit draw onto [0, n); n >= 1.
  uint64_t Below(uint64_t n);
  int UniformInt(int lo, int hi_inclusive);
  // Box-Muller; consumes two draws per call.
  double Gaussian();

 private:
  uint64_t state_;
};

// Derives an independent seed for a named sub-stream.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

// k distinct indices from [0, n), sampled without replacement by a partial
// Fisher-Yates shuffle driven by SplitMix64(seed); returned in ascending order.
std::vector<int> SampleWithoutReplacement(int n, int k, uint64_t seed);

}  // namespace panofuse

#endif  // PANOFUSE_RANDOM_H_
