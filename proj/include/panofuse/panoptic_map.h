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

#ifndef PANOFUSE_PANOPTIC_MAP_H_
#define PANOFUSE_PANOPTIC_MAP_H_

#include <cstdint>
#include <map>

#include "panofuse/tensor.h"

namespace panofuse {

using SegmentIdGrid = Grid<uint32_t>;

inline constexpr uint32_t kVoidSegment = 0;

// Segment ids produced by the decoders in this library: stuff category k is
// id k + 1 and surviving instance i is id n_stuff + 1 + i.
inline uint32_t StuffSegmentId(int stuff_index) {
  return static_cast<uint32_t>(stuff_index) + 1;
}
inline uint32_t InstanceSegmentId(int n_stuff, int instance_index) {
  return static_cast<uint32_t>(n_stuff + 1 + instance_index);
}

// COCO-style [x, y, width, height] in whole pixels.
struct SegmentBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  bool operator==(const SegmentBox&) const = default;
};

struct SegmentInfo {
  int category = 0;  // index into the CategorySet
  int64_t area = 0;
  SegmentBox bbox;
  bool iscrowd = false;
  bool operator==(const SegmentInfo&) const = default;
};

struct PanopticMap {
  PanopticMap() = default;
  PanopticMap(int height, int width) : ids(height, width, kVoidSegment) {}

  int height() const { return ids.height(); }
  int width() const { return ids.width(); }

  SegmentIdGrid ids;
  std::map<uint32_t, SegmentInfo> segments;

  bool operator==(const PanopticMap&) const = default;
};

// Recounts area and bbox of every table entry from the pixels and drops
// entries with no pixels. Throws if a nonzero pixel id has no table entry.
void RecomputeSegmentStats(PanopticMap& map);

// Throws std::invalid_argument when the table and pixels disagree or a
// category index is outside `num_categories`.
void ValidatePanopticMap(const PanopticMap& map, int num_categories);

// Per-pixel category index; void pixels become kVoidLabel.
LabelGrid SemanticLabels(const PanopticMap& map);

}  // namespace panofuse

#endif  // PANOFUSE_PANOPTIC_MAP_H_
