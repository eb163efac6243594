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

#include "panofuse/combine.h"

#include <stdexcept>

namespace panofuse {

PanopticMap Combine(const LabelGrid& semantic_pred, const PrunedSet& pruned,
                    const CategorySet& categories, double overlap_threshold,
                    int64_t min_stuff_area) {
  if (semantic_pred.height() != pruned.height ||
      semantic_pred.width() != pruned.width) {
    throw std::invalid_argument("Combine: semantic and instance dims differ");
  }
  const int n_stuff = categories.n_stuff();
  PanopticMap map(semantic_pred.height(), semantic_pred.width());

  for (std::size_t i = 0; i < pruned.survivors.size(); ++i) {
    const LocalMask& mask = pruned.clipped_masks[i];
    const PixelRect& r = mask.rect;
    int64_t area = 0;
    int64_t occupied = 0;
    for (int y = r.y0; y < r.y1; ++y) {
      const uint8_t* bits = mask.bits.row(y - r.y0);
      const uint32_t* ids = map.ids.row(y) + r.x0;
      for (int x = 0; x < r.width(); ++x) {
        area += bits[x];
        occupied += bits[x] & (ids[x] != kVoidSegment);
      }
    }
    if (area == 0 || static_cast<double>(occupied) /
                             static_cast<double>(area) >
                         overlap_threshold) {
      continue;
    }
    const uint32_t id = InstanceSegmentId(n_stuff, static_cast<int>(i));
    for (int y = r.y0; y < r.y1; ++y) {
      const uint8_t* bits = mask.bits.row(y - r.y0);
      uint32_t* ids = map.ids.row(y) + r.x0;
      for (int x = 0; x < r.width(); ++x) {
        if (bits[x] && ids[x] == kVoidSegment) ids[x] = id;
      }
    }
    SegmentInfo info;
    info.category = pruned.survivors[i].category;
    map.segments.emplace(id, info);
  }

  std::vector<uint8_t> stuff_seen(n_stuff, 0);
  for (std::size_t q = 0; q < map.ids.size(); ++q) {
    if (map.ids[q] != kVoidSegment) continue;
    const int32_t label = semantic_pred[q];
    if (label >= 0 && label < n_stuff) {
      map.ids[q] = StuffSegmentId(label);
      stuff_seen[label] = 1;
    }
  }
  for (int k = 0; k < n_stuff; ++k) {
    if (!stuff_seen[k]) continue;
    SegmentInfo info;
    info.category = k;
    map.segments.emplace(StuffSegmentId(k), info);
  }
  RecomputeSegmentStats(map);
  return SuppressSmallStuff(map, categories, min_stuff_area);
}

PanopticMap RunCombinePipeline(const LogitTensor& semantic,
                               std::span<const InstanceProposal> proposals,
                               const CategorySet& categories,
                               const CombineOptions& options) {
  if (semantic.channels() != categories.size()) {
    throw std::invalid_argument("semantic logits channel count mismatch");
  }
  for (const InstanceProposal& p : proposals) ValidateProposal(p, categories);
  const PrunedSet pruned = PruneMasks(proposals, semantic.height(),
                                      semantic.width(), options.pruning);
  const LabelGrid semantic_pred = ChannelArgmax(semantic);
  return Combine(semantic_pred, pruned, categories, options.overlap_threshold,
                 options.min_stuff_area);
}

}  // namespace panofuse
