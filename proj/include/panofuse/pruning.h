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

#ifndef PANOFUSE_PRUNING_H_
#define PANOFUSE_PRUNING_H_

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "panofuse/tensor.h"

namespace panofuse {

// One detection: box, thing-category index (global, >= n_stuff), score and
// 28x28 mask logits.
struct InstanceProposal {
  BBox box;
  int category = 0;
  double score = 0.0;
  MaskPatch mask;
};

// Throws std::invalid_argument unless the box is valid, the category is a
// thing category and the score is a finite value in [0, 1].
void ValidateProposal(const InstanceProposal& proposal,
                      const CategorySet& categories);

// Binary mask stored over a pixel rectangle of the image; pixels outside
// `rect` are zero.
struct LocalMask {
  PixelRect rect;
  MaskGrid bits;  // rect.height() x rect.width()

  bool Contains(int y, int x) const {
    return rect.Contains(y, x) && bits(y - rect.y0, x - rect.x0) != 0;
  }
  int64_t Area() const;
  MaskGrid ToImage(int height, int width) const;
};

struct PrunedSet {
  int height = 0;
  int width = 0;
  // Instance ids 0..N_inst-1, in pasting (descending score) order.
  std::vector<InstanceProposal> survivors;
  // Non-intersecting region each survivor contributed to its category canvas.
  std::vector<LocalMask> clipped_masks;
  std::vector<std::string> diagnostics;
};

struct PruningOptions {
  double nms_iou = 0.5;
  double min_score = 0.6;
  double overlap_threshold = 0.3;
  double binarize_threshold = 0.5;
};

// IoU of the continuous box areas; 0 when the union is empty.
double BoxIou(const BBox& a, const BBox& b);

// Greedy suppression in descending score order, ignoring categories. A box is
// suppressed when its IoU with a kept box exceeds `iou_threshold`. Equal
// scores keep input order.
std::vector<InstanceProposal> ClassAgnosticNms(
    std::span<const InstanceProposal> proposals, double iou_threshold = 0.5);

// Keeps score > min_score (strict), sorted by descending score (stable).
std::vector<InstanceProposal> ScoreFilter(
    std::span<const InstanceProposal> proposals, double min_score = 0.6);

// 28x28 mask logits resized onto the rasterized box; box-local grid.
RealGrid ResizeMaskToBox(const MaskPatch& mask, const PixelRect& rect);

// Region where sigmoid(mask logit) > binarize_threshold.
LocalMask BinarizeProposal(const InstanceProposal& proposal, int height,
                           int width, double binarize_threshold = 0.5);

// Per-category canvas pasting of proposals given in descending score order.
// A proposal whose binarized region overlaps its category canvas by more than
// `overlap_threshold` of its own area is discarded; otherwise its
// non-intersecting part is recorded and added to the canvas. Proposals with
// an empty box or empty binarized region are discarded with a diagnostic.
PrunedSet CanvasPaste(std::span<const InstanceProposal> proposals, int height,
                      int width, double overlap_threshold = 0.3,
                      double binarize_threshold = 0.5);

// NMS, score filter and canvas pasting in sequence.
PrunedSet PruneMasks(std::span<const InstanceProposal> proposals, int height,
                     int width, const PruningOptions& options = {});

// Keeps every proposal in the given order (training-time construction from
// ground-truth boxes). Clipped masks are computed as in CanvasPaste but
// nothing is discarded.
PrunedSet KeepAllProposals(std::span<const InstanceProposal> proposals,
                           int height, int width,
                           double binarize_threshold = 0.5);

// Proposal JSON: [{"box":[x0,y0,x1,y1], "category_id":int, "score":float,
// "mask":[784 floats]}]. category_id is the external category id.
std::vector<InstanceProposal> ProposalsFromJson(const nlohmann::json& json,
                                                const CategorySet& categories);
nlohmann::json ProposalsToJson(std::span<const InstanceProposal> proposals,
                               const CategorySet& categories);

}  // namespace panofuse

#endif  // PANOFUSE_PRUNING_H_
