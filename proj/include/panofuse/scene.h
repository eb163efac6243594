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

// Synthetic scenes with exact ground truth, input synthesis, a brute-force PQ
// oracle and a post-network runtime benchmark.
//
// All randomness comes from SplitMix64 (see random.h). Sub-streams are derived
// with DeriveSeed(seed, stream) so that changing, e.g., the noise level does
// not perturb the scene layout.

#ifndef PANOFUSE_SCENE_H_
#define PANOFUSE_SCENE_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "panofuse/losses.h"
#include "panofuse/metrics.h"
#include "panofuse/panoptic_map.h"
#include "panofuse/pruning.h"
#include "panofuse/tensor.h"

namespace panofuse {

enum class ShapeKind { kRectangle, kEllipse };

struct SceneInstance {
  ShapeKind shape = ShapeKind::kRectangle;
  int category = 0;  // global thing index
  PixelRect box;     // full (unoccluded) shape extent
};

// Instances are listed back to front: later ones occlude earlier ones.
struct SceneSpec {
  int height = 0;
  int width = 0;
  CategorySet categories;
  LabelGrid stuff_layout;  // stuff category index per pixel
  std::vector<SceneInstance> instances;
  uint64_t seed = 0;
};

struct Scene {
  SceneSpec spec;
  // Stuff k has id StuffSegmentId(k); instance i has InstanceSegmentId(n_stuff,
  // i), matching the decoder's convention.
  PanopticMap panoptic;
  LabelGrid semantic;
};

struct SceneOptions {
  int height = 64;
  int width = 64;
  int n_stuff = 3;
  int n_thing = 3;
  int instances = 4;
  // Box sides are drawn from {4, 7, 14, 28}, the sides for which
  // nearest-neighbour 28x28 sampling followed by bilinear resizing is exact.
  // Otherwise sides are uniform in [min_side, max_side].
  bool exact_boxes = true;
  int min_side = 8;
  int max_side = 64;
  int min_visible_area = 16;
  int max_attempts = 200;
};

// Categories named stuff_<k> / thing_<k> with ids equal to their index.
CategorySet SyntheticCategories(int n_stuff, int n_thing);

// Throws std::invalid_argument when the instances cannot be placed.
Scene GenerateScene(uint64_t seed, const SceneOptions& options);

// Rasterizes a spec into its ground-truth maps.
Scene RenderScene(const SceneSpec& spec);

// Pixels of `instance` (full shape, ignoring occlusion).
bool ShapeCovers(const SceneInstance& instance, int y, int x);

struct SynthOptions {
  double logit_scale = 4.0;
  double noise_sigma = 0.0;
  double box_jitter = 0.0;  // fraction of box side, applied per edge
  double mask_logit = 6.0;
  uint64_t seed = 0;
};

struct SyntheticInputs {
  LogitTensor semantic;
  // One proposal per GT instance, in scene order.
  std::vector<InstanceProposal> proposals;
  std::vector<GroundTruthInstance> ground_truth;
};

// Semantic logits are logit_scale * onehot(GT category) + N(0, sigma^2).
// Proposals use the GT boxes jittered by up to box_jitter of their side and
// 28x28 masks sampled (box-relative nearest neighbour) from the visible GT
// region at +-mask_logit. Scores are uniform in [0.7, 1.0].
SyntheticInputs SynthesizeInputs(const Scene& scene,
                                 const SynthOptions& options);

// Brute-force PQ: every (prediction, GT) pair is scored by a full pixel scan.
// Semantics match MatchAndScore/Aggregate.
EvalReport OraclePq(
    std::span<const std::pair<PanopticMap, PanopticMap>> pred_gt,
    const CategorySet& categories);
EvalReport OraclePq(const PanopticMap& pred, const PanopticMap& gt,
                    const CategorySet& categories);

nlohmann::json SceneSpecToJson(const SceneSpec& spec);
SceneSpec SceneSpecFromJson(const nlohmann::json& json);

enum class BenchPipeline { kFusion, kCombine };

struct BenchOptions {
  int height = 1024;
  int width = 2048;
  int n_stuff = 50;
  int n_thing = 8;
  int instances = 30;
  int repeats = 10;
  uint64_t seed = 7;
};

struct BenchResult {
  std::string pipeline;
  int repeats = 0;
  std::vector<double> samples_ms;
  double mean_ms = 0.0;
  double min_ms = 0.0;
};

struct BenchFixture {
  CategorySet categories;
  SyntheticInputs inputs;
};

// Scene and inputs used by Bench, built once per options.
BenchFixture MakeBenchFixture(const BenchOptions& options);

// Wall-clock time of logits + proposals -> final PanopticMap.
BenchResult Bench(BenchPipeline pipeline, const BenchFixture& fixture,
                  int repeats);

nlohmann::json BenchToJson(const BenchResult& result);

}  // namespace panofuse

#endif  // PANOFUSE_SCENE_H_
