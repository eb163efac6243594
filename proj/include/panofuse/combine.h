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

#ifndef PANOFUSE_COMBINE_H_
#define PANOFUSE_COMBINE_H_

#include <cstdint>
#include <span>

#include "panofuse/fusion.h"
#include "panofuse/panoptic_map.h"
#include "panofuse/pruning.h"
#include "panofuse/tensor.h"

namespace panofuse {

// Heuristic merge of independent semantic and instance predictions, used as
// the baseline for fusion.
//
// Survivors are pasted in order (descending score) using their clipped masks.
// An instance is dropped when more than `overlap_threshold` of its mask is
// already occupied by earlier instances of any category; otherwise its free
// pixels are pasted. Remaining pixels take `semantic_pred` where it names a
// stuff category and are void otherwise. Stuff segments smaller than
// `min_stuff_area` become void.
PanopticMap Combine(const LabelGrid& semantic_pred, const PrunedSet& pruned,
                    const CategorySet& categories,
                    double overlap_threshold = 0.5,
                    int64_t min_stuff_area = kCocoMinStuffArea);

struct CombineOptions {
  PruningOptions pruning;
  double overlap_threshold = 0.5;
  int64_t min_stuff_area = kCocoMinStuffArea;
};

// Pruning -> semantic argmax -> Combine.
PanopticMap RunCombinePipeline(const LogitTensor& semantic,
                               std::span<const InstanceProposal> proposals,
                               const CategorySet& categories,
                               const CombineOptions& options = {});

}  // namespace panofuse

#endif  // PANOFUSE_COMBINE_H_
