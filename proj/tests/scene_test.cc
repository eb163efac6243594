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


#include "panofuse/scene.h"

#include <set>
#include <stdexcept>

#include "gtest/gtest.h"
#include "panofuse/fusion.h"

namespace panofuse {
namespace {

TEST(GenerateSceneTest, DeterministicPerSeed) {
  const Scene a = GenerateScene(12, {});
  const Scene b = GenerateScene(12, {});
  EXPECT_EQ(a.panoptic, b.panoptic);
  EXPECT_EQ(SceneSpecToJson(a.spec), SceneSpecToJson(b.spec));
  EXPECT_NE(GenerateScene(13, {}).panoptic, a.panoptic);
}

TEST(GenerateSceneTest, GroundTruthIsConsistent) {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    SceneOptions options;
    options.instances = 5;
    const Scene s = GenerateScene(seed, options);
    const int n_stuff = s.spec.categories.n_stuff();
    ASSERT_NO_THROW(ValidatePanopticMap(s.panoptic, s.spec.categories.size()));
    EXPECT_EQ(s.semantic, SemanticLabels(s.panoptic));
    ASSERT_EQ(s.spec.instances.size(), 5u);
    for (std::size_t i = 0; i < s.spec.instances.size(); ++i) {
      const SceneInstance& inst = s.spec.instances[i];
      EXPECT_TRUE((std::set<int>{4, 7, 14, 28}).contains(inst.box.width()));
      EXPECT_TRUE((std::set<int>{4, 7, 14, 28}).contains(inst.box.height()));
      const uint32_t id = InstanceSegmentId(n_stuff, static_cast<int>(i));
      ASSERT_TRUE(s.panoptic.segments.contains(id));
      EXPECT_GE(s.panoptic.segments.at(id).area, options.min_visible_area);
      EXPECT_EQ(s.panoptic.segments.at(id).category, inst.category);
    }
    // Painter's order oracle: the last instance covering a pixel owns it.
    for (int y = 0; y < s.spec.height; ++y) {
      for (int x = 0; x < s.spec.width; ++x) {
        uint32_t want = StuffSegmentId(s.spec.stuff_layout(y, x));
        for (std::size_t i = 0; i < s.spec.instances.size(); ++i) {
          if (ShapeCovers(s.spec.instances[i], y, x)) {
            want = InstanceSegmentId(n_stuff, static_cast<int>(i));
          }
        }
        ASSERT_EQ(s.panoptic.ids(y, x), want);
      }
    }
  }
}

TEST(GenerateSceneTest, ImpossiblePlacementThrows) {
  SceneOptions options;
  options.height = 8;
  options.width = 8;
  options.instances = 3;
  options.min_visible_area = 60;
  EXPECT_THROW(GenerateScene(0, options), std::invalid_argument);
  SceneOptions no_things;
  no_things.n_thing = 0;
  EXPECT_THROW(GenerateScene(0, no_things), std::invalid_argument);
}

TEST(ShapeCoversTest, EllipseUsesPixelCenters) {
  const SceneInstance e{ShapeKind::kEllipse, 3, PixelRect{0, 0, 4, 4}};
  EXPECT_TRUE(ShapeCovers(e, 1, 1));
  EXPECT_TRUE(ShapeCovers(e, 2, 0));
  EXPECT_FALSE(ShapeCovers(e, 0, 0));
  EXPECT_FALSE(ShapeCovers(e, 4, 2));
  const SceneInstance r{ShapeKind::kRectangle, 3, PixelRect{0, 0, 4, 4}};
  EXPECT_TRUE(ShapeCovers(r, 0, 0));
  EXPECT_FALSE(ShapeCovers(r, 0, 4));
}

TEST(SceneSpecJsonTest, RoundTripRenders) {
  const Scene s = GenerateScene(4, {});
  const SceneSpec back = SceneSpecFromJson(SceneSpecToJson(s.spec));
  EXPECT_EQ(RenderScene(back).panoptic, s.panoptic);
  EXPECT_THROW(SceneSpecFromJson(nlohmann::json::object()), std::invalid_argument);
}

TEST(SynthesizeInputsTest, CleanInputsDecodeToGroundTruth) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Scene s = GenerateScene(seed, {});
    const SyntheticInputs in = SynthesizeInputs(s, {});
    EXPECT_EQ(ChannelArgmax(in.semantic), s.semantic);
    std::vector<InstanceProposal> gt;
    for (const auto& g : in.ground_truth) gt.push_back(g.proposal);
    const PrunedSet kept = KeepAllProposals(gt, s.spec.height, s.spec.width);
    EXPECT_EQ(FuseAndDecode(in.semantic, s.spec.categories, kept, true), s.panoptic)
        << "seed " << seed;
    for (const auto& p : in.proposals) {
      EXPECT_GE(p.score, 0.7);
      EXPECT_LT(p.score, 1.0);
    }
  }
}

TEST(SynthesizeInputsTest, NoiseAndJitterAreSeeded) {
  const Scene s = GenerateScene(2, {});
  SynthOptions options;
  options.noise_sigma = 1.0;
  options.box_jitter = 0.1;
  options.seed = 9;
  const SyntheticInputs a = SynthesizeInputs(s, options);
  const SyntheticInputs b = SynthesizeInputs(s, options);
  EXPECT_EQ(a.semantic, b.semantic);
  EXPECT_EQ(a.proposals[0].box, b.proposals[0].box);
  options.seed = 10;
  EXPECT_NE(SynthesizeInputs(s, options).semantic, a.semantic);
  for (const auto& p : a.proposals) {
    EXPECT_GE(p.box.x0, 0.0);
    EXPECT_LE(p.box.x1, s.spec.width);
    EXPECT_GE(p.box.x1 - p.box.x0, 1.0);
  }
}

TEST(OraclePqTest, IdenticalIsPerfect) {
  const Scene s = GenerateScene(3, {});
  const EvalReport r = OraclePq(s.panoptic, s.panoptic, s.spec.categories);
  EXPECT_EQ(r.pq, 1.0);
  EXPECT_EQ(r.miou, 1.0);
}

TEST(BenchTest, SmallFixtureRuns) {
  BenchOptions options;
  options.height = 64;
  options.width = 96;
  options.n_stuff = 4;
  options.n_thing = 2;
  options.instances = 3;
  const BenchFixture fixture = MakeBenchFixture(options);
  EXPECT_EQ(fixture.inputs.proposals.size(), 3u);
  const BenchResult r = Bench(BenchPipeline::kCombine, fixture, 2);
  EXPECT_EQ(r.pipeline, "combine");
  EXPECT_EQ(r.samples_ms.size(), 2u);
  EXPECT_LE(r.min_ms, r.mean_ms);
  const nlohmann::json j = BenchToJson(Bench(BenchPipeline::kFusion, fixture, 1));
  EXPECT_EQ(j["pipeline"], "fusion");
  EXPECT_EQ(j["samples_ms"].size(), 1u);
  EXPECT_THROW(Bench(BenchPipeline::kFusion, fixture, 0), std::invalid_argument);
}

}  // namespace
}  // namespace panofuse
