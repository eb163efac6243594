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

// Parameter-free panoptic fusion.
//
// Given semantic logits X (stuff channels first, then thing channels) and the
// pruned instance proposals, the panoptic logits Z are assembled as
//
//   Z[k]            = X[k]                        k < n_stuff
//   Z[n_stuff + i]  = Xmask_i + Ymask_i           i < n_inst
//   Z[last]         = max_c X_thing[c] - max_i Xmask_i   (optional)
//
// where Xmask_i is the thing channel of proposal i restricted to its box
// (zero elsewhere) and Ymask_i is its mask logits resized onto the box (zero
// elsewhere). Decoding takes the per-pixel argmax over Z; the unknown channel
// decodes to void.

#ifndef PANOFUSE_FUSION_H_
#define PANOFUSE_FUSION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "panofuse/panoptic_map.h"
#include "panofuse/pruning.h"
#include "panofuse/tensor.h"

namespace panofuse {

struct PanopticLogits {
  LogitTensor base;
  int n_stuff = 0;
  int n_inst = 0;
  bool unknown_enabled = false;
  // Proposals defining the instance channel order.
  std::vector<InstanceProposal> survivors;

  int unknown_channel() const { return n_stuff + n_inst; }
};

// Xmask_i: the semantic thing channel for `proposal.category` inside the
// rasterized box, zero elsewhere. `semantic` holds all n_stuff + n_thing
// channels.
RealGrid InstanceSemanticMap(const LogitTensor& semantic,
                             const CategorySet& categories,
                             const InstanceProposal& proposal);

// Ymask_i: mask logits resized onto the rasterized box, zero elsewhere. A box
// with no pixels yields an all-zero map and appends a diagnostic.
RealGrid InstanceMaskMap(const InstanceProposal& proposal, int height,
                         int width,
                         std::vector<std::string>* diagnostics = nullptr);

PanopticLogits BuildPanopticLogits(const LogitTensor& semantic,
                                   const CategorySet& categories,
                                   const PrunedSet& pruned,
                                   bool enable_unknown);

// Per-pixel argmax over Z (lowest channel wins ties). Stuff channel k maps to
// segment StuffSegmentId(k), instance channel i to InstanceSegmentId(n_stuff,
// i) with the survivor's category, and the unknown channel to void. Only
// segments with pixels appear in the table.
PanopticMap Decode(const PanopticLogits& logits);

// Decode(BuildPanopticLogits(...)) without materializing Z. Produces the same
// map bit for bit; memory is O(H*W) instead of O((n_stuff + n_inst) * H*W).
// If `semantic_pred` is non-null it receives ChannelArgmax(semantic), computed
// in the same pass.
PanopticMap FuseAndDecode(const LogitTensor& semantic,
                          const CategorySet& categories,
                          const PrunedSet& pruned, bool enable_unknown,
                          LabelGrid* semantic_pred = nullptr);

PanopticMap AssignInstanceClasses(const PanopticMap& map,
                                  std::span<const InstanceProposal> survivors,
                                  const LabelGrid& semantic_pred,
                                  const CategorySet& categories);

// Same rule with the semantic prediction evaluated as the argmax of
// `semantic` only where instances were decoded.
PanopticMap AssignInstanceClasses(const PanopticMap& map,
                                  std::span<const InstanceProposal> survivors,
                                  const LogitTensor& semantic,
                                  const CategorySet& categories);

// Stuff segments with area < min_area become void; things are untouched.
PanopticMap SuppressSmallStuff(const PanopticMap& map,
                               const CategorySet& categories,
                               int64_t min_area);

// Stuff-area thresholds used for evaluation on the three reference datasets.
inline constexpr int64_t kCocoMinStuffArea = 4096;
inline constexpr int64_t kCityscapesMinStuffArea = 2048;
inline constexpr int64_t kInternalMinStuffArea = 2048;

struct FusionOptions {
  PruningOptions pruning;
  bool enable_unknown = true;
  int64_t min_stuff_area = kCocoMinStuffArea;
};

// Pruning -> fusion -> instance class assignment -> small-stuff suppression.
PanopticMap RunFusionPipeline(const LogitTensor& semantic,
                              std::span<const InstanceProposal> proposals,
                              const CategorySet& categories,
                              const FusionOptions& options = {});

}  // namespace panofuse

#endif  // PANOFUSE_FUSION_H_
