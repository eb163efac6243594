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

#include "panofuse/panoptic_map.h"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace panofuse {

namespace {

struct Extent {
  int64_t area = 0;
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;

  void Add(int y, int x) {
    if (area == 0) {
      x0 = x1 = x;
      y0 = y1 = y;
    } else {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    ++area;
  }
  SegmentBox Box() const { return {x0, y0, x1 - x0 + 1, y1 - y0 + 1}; }
};

std::unordered_map<uint32_t, Extent> MeasureSegments(const SegmentIdGrid& ids) {
  std::unordered_map<uint32_t, Extent> extents;
  for (int y = 0; y < ids.height(); ++y) {
    const uint32_t* row = ids.row(y);
    for (int x = 0; x < ids.width(); ++x) {
      if (row[x] != kVoidSegment) extents[row[x]].Add(y, x);
    }
  }
  return extents;
}

}  // namespace

void RecomputeSegmentStats(PanopticMap& map) {
  const auto extents = MeasureSegments(map.ids);
  for (const auto& [id, extent] : extents) {
    if (!map.segments.contains(id)) {
      throw std::invalid_argument("segment id " + std::to_string(id) +
                                  " has no table entry");
    }
  }
  for (auto it = map.segments.begin(); it != map.segments.end();) {
    auto found = extents.find(it->first);
    if (found == extents.end()) {
      it = map.segments.erase(it);
      continue;
    }
    it->second.area = found->second.area;
    it->second.bbox = found->second.Box();
    ++it;
  }
}

void ValidatePanopticMap(const PanopticMap& map, int num_categories) {
  const auto extents = MeasureSegments(map.ids);
  for (const auto& [id, extent] : extents) {
    auto it = map.segments.find(id);
    if (it == map.segments.end()) {
      throw std::invalid_argument("segment id " + std::to_string(id) +
                                  " has no table entry");
    }
    if (it->second.area != extent.area) {
      throw std::invalid_argument("segment " + std::to_string(id) +
                                  " area does not match pixel count");
    }
  }
  for (const auto& [id, info] : map.segments) {
    if (id == kVoidSegment) {
      throw std::invalid_argument("segment table contains the void id");
    }
    if (info.category < 0 || info.category >= num_categories) {
      throw std::invalid_argument("segment " + std::to_string(id) +
                                  " has an out-of-range category");
    }
    if (!extents.contains(id) && info.area != 0) {
      throw std::invalid_argument("segment " + std::to_string(id) +
                                  " area does not match pixel count");
    }
  }
}

LabelGrid SemanticLabels(const PanopticMap& map) {
  LabelGrid labels(map.height(), map.width(), kVoidLabel);
  uint32_t cached_id = kVoidSegment;
  int32_t cached_label = kVoidLabel;
  for (std::size_t i = 0; i < map.ids.size(); ++i) {
    const uint32_t id = map.ids[i];
    if (id == kVoidSegment) continue;
    if (id != cached_id) {
      auto it = map.segments.find(id);
      if (it == map.segments.end()) {
        throw std::invalid_argument("segment id " + std::to_string(id) +
                                    " has no table entry");
      }
      cached_id = id;
      cached_label = it->second.category;
    }
    labels[i] = cached_label;
  }
  return labels;
}

}  // namespace panofuse
