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

#include <stdexcept>

#include "gtest/gtest.h"

namespace panofuse {
namespace {

SegmentInfo Info(int category) {
  SegmentInfo info;
  info.category = category;
  return info;
}

TEST(SegmentIdTest, Convention) {
  EXPECT_EQ(StuffSegmentId(0), 1u);
  EXPECT_EQ(StuffSegmentId(4), 5u);
  EXPECT_EQ(InstanceSegmentId(3, 0), 4u);
  EXPECT_EQ(InstanceSegmentId(3, 2), 6u);
}

TEST(RecomputeSegmentStatsTest, AreaAndBoxFromPixels) {
  PanopticMap map(4, 5);
  map.ids(1, 1) = 7;
  map.ids(3, 2) = 7;
  map.ids(0, 4) = 9;
  map.segments[7] = Info(1);
  map.segments[9] = Info(0);
  map.segments[11] = Info(2);  // no pixels
  RecomputeSegmentStats(map);
  ASSERT_EQ(map.segments.size(), 2u);
  EXPECT_EQ(map.segments[7].area, 2);
  EXPECT_EQ(map.segments[7].bbox, (SegmentBox{1, 1, 2, 3}));
  EXPECT_EQ(map.segments[9].area, 1);
  EXPECT_EQ(map.segments[9].bbox, (SegmentBox{4, 0, 1, 1}));
}

TEST(RecomputeSegmentStatsTest, RejectsUnlistedPixelIds) {
  PanopticMap map(2, 2);
  map.ids(0, 0) = 3;
  EXPECT_THROW(RecomputeSegmentStats(map), std::invalid_argument);
}

TEST(ValidatePanopticMapTest, ChecksTableAgainstPixels) {
  PanopticMap map(2, 2);
  map.ids(0, 0) = 1;
  map.segments[1] = Info(0);
  RecomputeSegmentStats(map);
  EXPECT_NO_THROW(ValidatePanopticMap(map, 1));
  EXPECT_THROW(ValidatePanopticMap(map, 0), std::invalid_argument);
  PanopticMap stale = map;
  stale.segments[1].area = 2;
  EXPECT_THROW(ValidatePanopticMap(stale, 1), std::invalid_argument);
  PanopticMap unlisted = map;
  unlisted.ids(1, 1) = 5;
  EXPECT_THROW(ValidatePanopticMap(unlisted, 1), std::invalid_argument);
}

TEST(SemanticLabelsTest, VoidBecomesIgnore) {
  PanopticMap map(1, 3);
  map.ids(0, 1) = 2;
  map.ids(0, 2) = 8;
  map.segments[2] = Info(4);
  map.segments[8] = Info(1);
  const LabelGrid labels = SemanticLabels(map);
  EXPECT_EQ(labels(0, 0), kVoidLabel);
  EXPECT_EQ(labels(0, 1), 4);
  EXPECT_EQ(labels(0, 2), 1);
}

}  // namespace
}  // namespace panofuse
