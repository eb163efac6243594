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

#include "panofuse/tensor.h"

#include <cmath>
#include <limits>

#include "gtest/gtest.h"
#include "panofuse/random.h"

namespace panofuse {
namespace {

LogitTensor RandomTensor(int c, int h, int w, uint64_t seed, double scale) {
  SplitMix64 rng(seed);
  LogitTensor t(c, h, w);
  for (double& v : t.data()) v = scale * rng.Gaussian();
  return t;
}

// Textbook bilinear sampling with half-pixel centers, written per output
// pixel with explicit weights.
double BilinearOracle(const RealGrid& g, int out_h, int out_w, int y, int x) {
  auto coord = [](int d, int in, int out) {
    double s = (d + 0.5) * in / out - 0.5;
    if (s < 0) s = 0;
    if (s > in - 1) s = in - 1;
    return s;
  };
  const double sy = coord(y, g.height(), out_h);
  const double sx = coord(x, g.width(), out_w);
  const int y0 = static_cast<int>(sy);
  const int x0 = static_cast<int>(sx);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const double fy = sy - y0;
  const double fx = sx - x0;
  return (1 - fy) * (1 - fx) * g(y0, x0) + (1 - fy) * fx * g(y0, x1) +
         fy * (1 - fx) * g(y1, x0) + fy * fx * g(y1, x1);
}

TEST(GridTest, IndexingIsRowMajor) {
  LabelGrid g(2, 3, 0);
  g(1, 2) = 7;
  EXPECT_EQ(g[5], 7);
  EXPECT_EQ(g.row(1)[2], 7);
  EXPECT_THROW(LabelGrid(2, 2, std::vector<int32_t>(3)), std::invalid_argument);
}

TEST(LogitTensorTest, RejectsBadShapesAndNonFiniteValues) {
  EXPECT_THROW(LogitTensor(0, 2, 2), std::invalid_argument);
  EXPECT_THROW(LogitTensor(1, 2, 2, std::vector<double>(3)),
               std::invalid_argument);
  std::vector<double> data(4, 0.0);
  data[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(LogitTensor(1, 2, 2, data), std::invalid_argument);
  data[2] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(LogitTensor(1, 2, 2, data), std::invalid_argument);
}

TEST(LogitTensorTest, ChannelMajorLayout) {
  std::vector<double> data(2 * 2 * 3);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = i;
  const LogitTensor t(2, 2, 3, data);
  EXPECT_EQ(t.at(1, 0, 0), 6.0);
  EXPECT_EQ(t.at(0, 1, 2), 5.0);
  EXPECT_EQ(t.ChannelGrid(1)(1, 1), 10.0);
}

TEST(BBoxTest, RasterizeUsesPixelCenters) {
  EXPECT_EQ((BBox{0.4, 0.6, 2.5, 3.5}.Rasterize(10, 10)),
            (PixelRect{0, 1, 2, 3}));
  EXPECT_EQ((BBox{0, 0, 28, 28}.Rasterize(64, 64)), (PixelRect{0, 0, 28, 28}));
  EXPECT_TRUE((BBox{3.6, 2, 4.4, 5}.Rasterize(10, 10).empty()));
  EXPECT_EQ((BBox{-5, -5, 100, 3}.Rasterize(8, 9)), (PixelRect{0, 0, 9, 3}));
}

TEST(BBoxTest, RasterizeMatchesPerPixelCenterTest) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int h = rng.UniformInt(1, 12);
    const int w = rng.UniformInt(1, 12);
    BBox b;
    b.x0 = rng.Uniform(-3, 14);
    b.y0 = rng.Uniform(-3, 14);
    b.x1 = b.x0 + rng.Uniform(0, 8);
    b.y1 = b.y0 + rng.Uniform(0, 8);
    const PixelRect r = b.Rasterize(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool inside = b.x0 <= x + 0.5 && x + 0.5 < b.x1 &&
                            b.y0 <= y + 0.5 && y + 0.5 < b.y1;
        ASSERT_EQ(r.Contains(y, x), inside) << trial << " " << y << "," << x;
      }
    }
  }
}

TEST(BilinearResizeTest, MatchesOracle) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int in_h = rng.UniformInt(1, 30);
    const int in_w = rng.UniformInt(1, 30);
    const int out_h = rng.UniformInt(1, 40);
    const int out_w = rng.UniformInt(1, 40);
    RealGrid g(in_h, in_w);
    for (double& v : g.values()) v = rng.Uniform(-5, 5);
    const RealGrid out = BilinearResize(g, out_h, out_w);
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) {
        ASSERT_NEAR(out(y, x), BilinearOracle(g, out_h, out_w, y, x), 1e-12);
      }
    }
  }
}

TEST(BilinearResizeTest, ConstantsAndIdentityAreExact) {
  const RealGrid constant(28, 28, 6.0);
  for (int side : {1, 4, 7, 13, 14, 28, 57}) {
    const RealGrid out = BilinearResize(constant, side, side + 3);
    for (double v : out.values()) ASSERT_EQ(v, 6.0);
  }
  RealGrid g(3, 4);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.1 * i;
  EXPECT_EQ(BilinearResize(g, 3, 4), g);
}

TEST(PatchCellToPixelTest, BoxRelativeNearest) {
  for (int c = 0; c < 28; ++c) EXPECT_EQ(PatchCellToPixel(0, 28, c), c);
  EXPECT_EQ(PatchCellToPixel(10, 17, 0), 10);
  EXPECT_EQ(PatchCellToPixel(10, 17, 3), 10);
  EXPECT_EQ(PatchCellToPixel(10, 17, 4), 11);
  EXPECT_EQ(PatchCellToPixel(10, 17, 27), 16);
}

TEST(ChannelSoftmaxTest, MatchesLongDoubleOracle) {
  const LogitTensor t = RandomTensor(5, 3, 4, 9, 10.0);
  const LogitTensor p = ChannelSoftmax(t);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 4; ++x) {
      long double z = 0;
      for (int c = 0; c < 5; ++c) z += std::exp(static_cast<long double>(t.at(c, y, x)));
      double total = 0;
      for (int c = 0; c < 5; ++c) {
        const long double expected = std::exp(static_cast<long double>(t.at(c, y, x))) / z;
        EXPECT_NEAR(p.at(c, y, x), static_cast<double>(expected), 1e-15);
        total += p.at(c, y, x);
      }
      EXPECT_NEAR(total, 1.0, 1e-15);
    }
  }
}

TEST(ChannelSoftmaxTest, LargeLogitsDoNotOverflow) {
  LogitTensor t(2, 1, 1);
  t.at(0, 0, 0) = 1000.0;
  t.at(1, 0, 0) = 1000.0;
  const LogitTensor p = ChannelSoftmax(t);
  EXPECT_EQ(p.at(0, 0, 0), 0.5);
  EXPECT_EQ(p.at(1, 0, 0), 0.5);
}

TEST(ChannelArgmaxTest, MatchesScanAndBreaksTiesLow) {
  LogitTensor t = RandomTensor(6, 7, 9, 3, 1.0);
  // Quantize so ties occur.
  for (double& v : t.data()) v = std::round(v);
  const LabelGrid got = ChannelArgmax(t);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) {
      int best = 0;
      for (int c = 1; c < 6; ++c) {
        if (t.at(c, y, x) > t.at(best, y, x)) best = c;
      }
      ASSERT_EQ(got(y, x), best);
    }
  }
  const LogitTensor flat(4, 2, 2, 1.5);
  const LabelGrid flat_argmax = ChannelArgmax(flat);
  for (int32_t v : flat_argmax.values()) EXPECT_EQ(v, 0);
}

TEST(AverageLogitMapsTest, ElementwiseMean) {
  const std::vector<LogitTensor> maps = {RandomTensor(3, 4, 5, 1, 1.0),
                                         RandomTensor(3, 4, 5, 2, 1.0),
                                         RandomTensor(3, 4, 5, 3, 1.0)};
  const LogitTensor avg = AverageLogitMaps(maps);
  for (std::size_t i = 0; i < avg.data().size(); ++i) {
    const double expected =
        (maps[0].data()[i] + maps[1].data()[i] + maps[2].data()[i]) / 3.0;
    EXPECT_NEAR(avg.data()[i], expected, 1e-15);
  }
  EXPECT_EQ(AverageLogitMaps(std::span(&maps[0], 1)), maps[0]);
}

TEST(AverageLogitMapsTest, RejectsEmptyAndMismatched) {
  EXPECT_THROW(AverageLogitMaps({}), std::invalid_argument);
  const std::vector<LogitTensor> bad = {LogitTensor(3, 4, 5), LogitTensor(3, 4, 6)};
  EXPECT_THROW(AverageLogitMaps(bad), std::invalid_argument);
}

TEST(CategorySetTest, PartitionAndLookup) {
  const CategorySet cats({{7, "road", false}, {3, "sky", false}, {11, "car", true}});
  EXPECT_EQ(cats.n_stuff(), 2);
  EXPECT_EQ(cats.n_thing(), 1);
  EXPECT_TRUE(cats.IsStuff(1));
  EXPECT_TRUE(cats.IsThing(2));
  EXPECT_FALSE(cats.IsThing(3));
  EXPECT_EQ(cats.IndexOfId(11), 2);
  EXPECT_FALSE(cats.IndexOfId(4).has_value());
}

TEST(CategorySetTest, RejectsStuffAfterThingAndDuplicateIds) {
  EXPECT_THROW(CategorySet({{1, "car", true}, {2, "road", false}}),
               std::invalid_argument);
  EXPECT_THROW(CategorySet({{1, "road", false}, {1, "car", true}}),
               std::invalid_argument);
}

TEST(MaskPatchTest, RequiresTwentyEightSquared) {
  EXPECT_THROW(MaskPatch(std::vector<double>(783)), std::invalid_argument);
  EXPECT_NO_THROW(MaskPatch(std::vector<double>(784, 1.0)));
}

}  // namespace
}  // namespace panofuse
