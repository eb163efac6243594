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

#ifndef PANOFUSE_LOSSES_H_
#define PANOFUSE_LOSSES_H_

#include <cstdint>
#include <span>
#include <string>

#include "panofuse/fusion.h"
#include "panofuse/panoptic_map.h"
#include "panofuse/pruning.h"
#include "panofuse/tensor.h"

namespace panofuse {

inline constexpr int32_t kIgnoreTarget = -1;

// Per-pixel target channel into the panoptic logits: a stuff channel, an
// instance slot n_stuff + i, the unknown slot n_stuff + K, or kIgnoreTarget.
struct PanopticTarget {
  LabelGrid channels;
  // Ground-truth instance order indices retargeted to the unknown slot.
  std::vector<int> unknown_instances;
};

// A ground-truth instance: its segment in the GT map and the box/class/mask
// used to build its panoptic channel.
struct GroundTruthInstance {
  uint32_t segment_id = 0;
  InstanceProposal proposal;
};

// Instances are assigned channels in the order given. round(unknown_rate * K)
// of them (half away from zero), chosen by SampleWithoutReplacement(K, n,
// seed), are retargeted to the unknown slot. Void and crowd pixels are
// ignored. Throws std::invalid_argument if a thing segment in `gt_map` is
// absent from `gt_instances`.
PanopticTarget BuildPanopticTarget(
    const PanopticMap& gt_map,
    std::span<const GroundTruthInstance> gt_instances,
    const CategorySet& categories, double unknown_rate = 0.3,
    uint64_t seed = 0);

struct LossResult {
  double loss = 0.0;
  LogitTensor gradient;
  int64_t counted_pixels = 0;
  std::string diagnostic;
};

// Mean over non-ignored pixels of -log softmax(z)[target]. The gradient is
// (softmax - onehot) / count at counted pixels and 0 elsewhere. With no
// counted pixels the loss is 0 with a zero gradient and a diagnostic.
LossResult PanopticCrossEntropy(const LogitTensor& z,
                                const PanopticTarget& target);
inline LossResult PanopticCrossEntropy(const PanopticLogits& z,
                                       const PanopticTarget& target) {
  return PanopticCrossEntropy(z.base, target);
}

// RoI loss: crops `semantic` to the rasterized box, resizes each channel to
// 28x28 (bilinear), and takes the mean pixel-wise cross entropy against
// `label_patch` (negative labels ignored). The gradient is with respect to
// the cropped logits (C x box_h x box_w).
LossResult RoiCrossEntropy(const LogitTensor& semantic, const BBox& box,
                           const LabelGrid& label_patch);

// Crop of `semantic` to the rasterized box.
LogitTensor CropLogits(const LogitTensor& semantic, const PixelRect& rect);

// 28x28 label patch sampled from a semantic label map by box-relative
// nearest neighbour (cell centers).
LabelGrid SampleLabelPatch(const LabelGrid& labels, const BBox& box);

}  // namespace panofuse

#endif  // PANOFUSE_LOSSES_H_
