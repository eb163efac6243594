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


#include "panofuse/metrics.h"

#include <stdexcept>

#include "gtest/gtest.h"
#include "panofuse/scene.h"
#include "test_util.h"

namespace panofuse {
namespace {

using testing::Info;

// Builds a map from a row-major id string; `segments` gives id -> info.
PanopticMap MapOf(int h, int w, std::vector<uint32_t> ids,
                  std::map<uint32_t, SegmentInfo> segments) {
  PanopticMap map;
  map.ids = SegmentIdGrid(h, w, std::move(ids));
  map.segments = std::move(segments);
  RecomputeSegmentStats(map);
  return map;
}

const CategorySet& Cats() {
  static const CategorySet cats = SyntheticCategories(1, 2);
  return cats;
}

TEST(MatchAndScoreTest, IouOfExactlyHalfIsNotAMatch) {
  const PanopticMap gt = MapOf(1, 4, {5, 5, 5, 5}, {{5, Info(1)}});
  const PanopticMap pred = MapOf(1, 4, {7, 7, 1, 1}, {{7, Info(1)}, {1, Info(0)}});
  const MatchStats s = MatchAndScore(pred, gt, Cats());
  EXPECT_EQ(s.per_category[1].tp, 0);
  EXPECT_EQ(s.per_category[1].fp, 1);
  EXPECT_EQ(s.per_category[1].fn, 1);
  EXPECT_EQ(s.per_category[0].fp, 1);
}

TEST(MatchAndScoreTest, GroundTruthVoidLeavesTheUnion) {
  const PanopticMap gt = MapOf(1, 4, {5, 5, 0, 0}, {{5, Info(1)}});
  const PanopticMap pred = MapOf(1, 4, {7, 7, 7, 7}, {{7, Info(1)}});
  const MatchStats s = MatchAndScore(pred, gt, Cats());
  EXPECT_EQ(s.per_category[1].tp, 1);
  EXPECT_EQ(s.per_category[1].iou_sum, 1.0);
}

TEST(MatchAndScoreTest, UnmatchedOnVoidIsNotFalsePositive) {
  const PanopticMap gt = MapOf(1, 6, {1, 1, 1, 0, 0, 0}, {{1, Info(0)}});
  // Segment 7 lies 2/3 on void, segment 8 exactly half on void.
  const PanopticMap pred =
      MapOf(1, 6, {1, 8, 8, 7, 7, 7}, {{1, Info(0)}, {7, Info(1)}, {8, Info(2)}});
  const PanopticMap pred2 =
      MapOf(1, 6, {1, 1, 8, 8, 7, 7}, {{1, Info(0)}, {7, Info(1)}, {8, Info(2)}});
  const MatchStats s = MatchAndScore(pred, gt, Cats());
  EXPECT_EQ(s.per_category[1].fp, 0);
  EXPECT_EQ(s.per_category[2].fp, 1);
  const MatchStats s2 = MatchAndScore(pred2, gt, Cats());
  EXPECT_EQ(s2.per_category[2].fp, 1);  // 1/2 on void is not > 0.5
  EXPECT_EQ(s2.per_category[1].fp, 0);
}

TEST(MatchAndScoreTest, CrowdRegions) {
  // GT: crowd of thing 1 on the right, a thing-1 instance on the left.
  const PanopticMap gt =
      MapOf(1, 6, {4, 4, 4, 9, 9, 9}, {{4, Info(1)}, {9, Info(1, true)}});
  // Prediction matches the instance and puts an extra thing-1 and thing-2
  // segment on the crowd.
  const PanopticMap pred = MapOf(1, 6, {4, 4, 4, 5, 5, 6},
                                 {{4, Info(1)}, {5, Info(1)}, {6, Info(2)}});
  const MatchStats s = MatchAndScore(pred, gt, Cats());
  EXPECT_EQ(s.per_category[1].tp, 1);
  EXPECT_EQ(s.per_category[1].fp, 0);  // lies on same-category crowd
  EXPECT_EQ(s.per_category[1].fn, 0);  // crowd never counts as FN
  EXPECT_EQ(s.per_category[2].fp, 1);  // crowd of another category
  // A crowd segment is never matched, even by a perfect prediction.
  const PanopticMap exact = MapOf(1, 6, {4, 4, 4, 5, 5, 5}, {{4, Info(1)}, {5, Info(1)}});
  const MatchStats e = MatchAndScore(exact, gt, Cats());
  EXPECT_EQ(e.per_category[1].tp, 1);
  EXPECT_EQ(e.per_category[1].fp, 0);
}

TEST(MatchAndScoreTest, Errors) {
  const PanopticMap a = MapOf(1, 2, {1, 1}, {{1, Info(0)}});
  const PanopticMap b = MapOf(1, 3, {1, 1, 1}, {{1, Info(0)}});
  EXPECT_THROW(MatchAndScore(a, b, Cats()), std::invalid_argument);
  const PanopticMap bad = MapOf(1, 2, {1, 1}, {{1, Info(7)}});
  EXPECT_THROW(MatchAndScore(bad, a, Cats()), std::invalid_argument);
}

TEST(ScoreCategoryTest, Factorization) {
  double pq, sq, rq;
  ScoreCategory({1.6, 2, 1, 3}, pq, sq, rq);
  EXPECT_DOUBLE_EQ(sq, 0.8);
  EXPECT_DOUBLE_EQ(rq, 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(pq, 1.6 / 4.0);
  ScoreCategory({}, pq, sq, rq);
  EXPECT_EQ(pq, 0.0);
  EXPECT_EQ(sq, 0.0);
  EXPECT_EQ(rq, 0.0);
}

TEST(AggregateTest, AveragesOnlyCountedCategories) {
  const PanopticMap gt = MapOf(1, 4, {1, 1, 5, 5}, {{1, Info(0)}, {5, Info(1)}});
  const PanopticMap pred = MapOf(1, 4, {1, 1, 1, 5}, {{1, Info(0)}, {5, Info(1)}});
  const std::vector<MatchStats> stats = {MatchAndScore(pred, gt, Cats())};
  const EvalReport r = Aggregate(stats, Cats());
  // Stuff: IoU 2/3 -> TP. Thing: IoU 1/2 -> FP + FN. Thing 2 absent.
  EXPECT_EQ(r.n, 2);
  EXPECT_EQ(r.n_st, 1);
  EXPECT_EQ(r.n_th, 1);
  EXPECT_DOUBLE_EQ(r.pq_st, 2.0 / 3.0);
  EXPECT_EQ(r.pq_th, 0.0);
  EXPECT_DOUBLE_EQ(r.pq, 1.0 / 3.0);
  EXPECT_FALSE(r.per_class[2].counted);
  EXPECT_EQ(r.images, 1);
}

TEST(MiouTest, HandComputed) {
  // Categories 0,1,2. GT void pixels are not counted.
  const LabelGrid gt(1, 6, {0, 0, 1, 1, kVoidLabel, 2});
  const LabelGrid pred(1, 6, {0, 1, 1, kVoidLabel, 0, 0});
  const MiouResult m = Miou(pred, gt, Cats());
  EXPECT_DOUBLE_EQ(m.iou[0], 1.0 / 3.0);  // tp 1, gt 2, pred 2 (excl. void gt)
  EXPECT_DOUBLE_EQ(m.iou[1], 1.0 / 3.0);  // tp 1, gt 2, pred 2
  EXPECT_DOUBLE_EQ(m.iou[2], 0.0);
  EXPECT_DOUBLE_EQ(m.mean, 2.0 / 9.0);
  const MiouResult empty = Miou(LabelGrid(1, 1, 0), LabelGrid(1, 1, kVoidLabel), Cats());
  EXPECT_EQ(empty.mean, 0.0);
  EXPECT_FALSE(empty.present[0]);
}

// Random GT on a coarse cell grid and a prediction derived by perturbing
// cells, so that matches, misses and void/crowd overlaps all occur.
std::pair<PanopticMap, PanopticMap> RandomPair(SplitMix64& rng, const CategorySet& cats) {
  const int cell = rng.UniformInt(1, 4);
  const int ch = rng.UniformInt(2, 6), cw = rng.UniformInt(2, 6);
  const int n_seg = rng.UniformInt(1, 6);
  std::map<uint32_t, SegmentInfo> gt_info, pred_info;
  for (int s = 1; s <= n_seg; ++s) {
    const int cat = rng.UniformInt(0, cats.size() - 1);
    gt_info[s] = Info(cat, cats.IsThing(cat) && rng.Uniform() < 0.2);
    pred_info[s] = Info(rng.Uniform() < 0.8 ? cat : rng.UniformInt(0, cats.size() - 1));
  }
  std::vector<uint32_t> gt_cells(ch * cw), pred_cells(ch * cw);
  for (int i = 0; i < ch * cw; ++i) {
    gt_cells[i] = rng.Uniform() < 0.15 ? 0 : rng.UniformInt(1, n_seg);
    pred_cells[i] = rng.Uniform() < 0.3 ? rng.UniformInt(0, n_seg) : gt_cells[i];
  }
  std::vector<uint32_t> gt_ids, pred_ids;
  for (int y = 0; y < ch * cell; ++y) {
    for (int x = 0; x < cw * cell; ++x) {
      gt_ids.push_back(gt_cells[(y / cell) * cw + x / cell]);
      pred_ids.push_back(pred_cells[(y / cell) * cw + x / cell]);
    }
  }
  return {MapOf(ch * cell, cw * cell, gt_ids, gt_info),
          MapOf(ch * cell, cw * cell, pred_ids, pred_info)};
}

TEST(MatchAndScoreTest, AgreesWithBruteForceOracle) {
  SplitMix64 rng(81);
  const CategorySet cats = SyntheticCategories(2, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<PanopticMap, PanopticMap>> pairs;
    std::vector<MatchStats> stats;
    const int images = rng.UniformInt(1, 5);
    for (int i = 0; i < images; ++i) {
      auto [gt, pred] = RandomPair(rng, cats);
      stats.push_back(MatchAndScore(pred, gt, cats));
      pairs.emplace_back(pred, gt);
    }
    const EvalReport got = Aggregate(stats, cats);
    const EvalReport want = OraclePq(pairs, cats);
    ASSERT_NEAR(got.pq, want.pq, 1e-12);
    ASSERT_NEAR(got.sq, want.sq, 1e-12);
    ASSERT_NEAR(got.rq, want.rq, 1e-12);
    ASSERT_NEAR(got.pq_th, want.pq_th, 1e-12);
    ASSERT_NEAR(got.pq_st, want.pq_st, 1e-12);
    ASSERT_NEAR(got.miou, want.miou, 1e-12);
    for (int c = 0; c < cats.size(); ++c) {
      ASSERT_EQ(got.per_class[c].stats.tp, want.per_class[c].stats.tp);
      ASSERT_EQ(got.per_class[c].stats.fp, want.per_class[c].stats.fp);
      ASSERT_EQ(got.per_class[c].stats.fn, want.per_class[c].stats.fn);
    }
  }
}

TEST(MatchAndScoreTest, IdenticalMapsScoreOne) {
  SplitMix64 rng(83);
  const CategorySet cats = SyntheticCategories(2, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const PanopticMap gt = RandomPair(rng, cats).first;
    const MatchStats s = MatchAndScore(gt, gt, cats);
    const EvalReport r = Aggregate(std::span(&s, 1), cats);
    for (const ClassReport& c : r.per_class) {
      EXPECT_EQ(c.stats.fp, 0);
      EXPECT_EQ(c.stats.fn, 0);
      if (c.counted) {
        EXPECT_EQ(c.pq, 1.0);
      }
    }
  }
}

TEST(MatchStatsTest, MergeIsAdditive) {
  SplitMix64 rng(85);
  const CategorySet cats = SyntheticCategories(2, 3);
  auto [g1, p1] = RandomPair(rng, cats);
  auto [g2, p2] = RandomPair(rng, cats);
  MatchStats a = MatchAndScore(p1, g1, cats);
  const MatchStats b = MatchAndScore(p2, g2, cats);
  const std::vector<MatchStats> both = {a, b};
  a.Merge(b);
  EXPECT_EQ(a.images, 2);
  const EvalReport merged = Aggregate(std::span(&a, 1), cats);
  const EvalReport separate = Aggregate(both, cats);
  EXPECT_EQ(merged.pq, separate.pq);
  EXPECT_EQ(merged.miou, separate.miou);
}

TEST(ReportToJsonTest, Keys) {
  const PanopticMap gt = MapOf(1, 2, {1, 1}, {{1, Info(0)}});
  const MatchStats s = MatchAndScore(gt, gt, Cats());
  const nlohmann::json j = ReportToJson(Aggregate(std::span(&s, 1), Cats()));
  for (const char* key : {"pq", "sq", "rq", "pq_th", "sq_th", "rq_th", "pq_st",
                          "sq_st", "rq_st", "miou", "n", "n_th", "n_st",
                          "images", "per_class"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  ASSERT_EQ(j["per_class"].size(), 3u);
  EXPECT_EQ(j["per_class"][0]["name"], "stuff_0");
  EXPECT_EQ(j["per_class"][0]["pq"], 1.0);
  EXPECT_EQ(j["pq"], 1.0);
}

}  // namespace
}  // namespace panofuse
