// Copyright 2026 The partgraph Authors. All Rights Reserved.
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

#include "partgraph/morphology.h"

#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "partgraph/errors.h"
#include "test_util.h"

namespace partgraph {
namespace {

using testing::central_difference;
using testing::in_dilation_brute;
using testing::relative_error;

BinaryMask random_mask(Xorshift64Star& rng, int w, int h, double density) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, rng.uniform() < density);
  }
  return m;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    if (a[p] && !b[p]) return false;
  }
  return true;
}

Plane random_plane(Xorshift64Star& rng, int w, int h) {
  Plane p{w, h, std::vector<double>(static_cast<std::size_t>(w) * h)};
  for (double& v : p.values) v = rng.uniform();
  return p;
}

TEST(DilateTest, EmptyMaskStaysEmpty) {
  for (auto shape : {ElementShape::kSquare, ElementShape::kDiamond}) {
    EXPECT_EQ(dilate(BinaryMask(6, 4), {shape, 3}).count(), 0u);
  }
}

TEST(DilateTest, RadiusZeroIsIdentity) {
  Xorshift64Star rng(31);
  const BinaryMask m = random_mask(rng, 7, 5, 0.3);
  EXPECT_EQ(dilate(m, {ElementShape::kSquare, 0}), m);
  EXPECT_EQ(dilate(m, {ElementShape::kDiamond, 0}), m);
}

TEST(DilateTest, CenterPixelSquareRadiusTwoFillsFiveByFive) {
  BinaryMask m(5, 5);
  m.set(2, 2);
  const BinaryMask d = dilate(m, {ElementShape::kSquare, 2});
  EXPECT_EQ(d.count(), 25u);
  const BinaryMask diamond = dilate(m, {ElementShape::kDiamond, 2});
  EXPECT_EQ(diamond.count(), 13u);
  EXPECT_FALSE(diamond.at(0, 0));
  EXPECT_TRUE(diamond.at(2, 0));
}

TEST(DilateTest, NegativeRadiusIsDomainError) {
  EXPECT_THROW(dilate(BinaryMask(2, 2), {ElementShape::kSquare, -1}),
               DomainError);
}

TEST(DilateTest, MatchesBruteForceNeighborhoodScan) {
  Xorshift64Star rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = rng.uniform_int(1, 12), h = rng.uniform_int(1, 12);
    const BinaryMask m = random_mask(rng, w, h, 0.15);
    const auto shape =
        trial % 2 ? ElementShape::kSquare : ElementShape::kDiamond;
    const int r = rng.uniform_int(0, 4);
    const BinaryMask d = dilate(m, {shape, r});
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        ASSERT_EQ(d.at(x, y), in_dilation_brute(m, x, y, shape, r));
      }
    }
  }
}

TEST(DilatePropertyTest, ExtensiveAndMonotone) {
  Xorshift64Star rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask a = random_mask(rng, 10, 9, 0.1);
    BinaryMask b = a;
    for (int k = 0; k < 5; ++k) {
      b.set(rng.uniform_int(0, 9), rng.uniform_int(0, 8));
    }
    const StructuringElement e{
        trial % 2 ? ElementShape::kSquare : ElementShape::kDiamond,
        rng.uniform_int(0, 3)};
    EXPECT_TRUE(subset(a, dilate(a, e)));
    EXPECT_TRUE(subset(dilate(a, e), dilate(b, e)));
  }
}

TEST(DilatePropertyTest, SquareRadiiCompose) {
  Xorshift64Star rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    const BinaryMask m = random_mask(rng, 13, 11, 0.05);
    const int r1 = rng.uniform_int(0, 3), r2 = rng.uniform_int(0, 3);
    EXPECT_EQ(dilate(dilate(m, {ElementShape::kSquare, r1}),
                     {ElementShape::kSquare, r2}),
              dilate(m, {ElementShape::kSquare, r1 + r2}));
  }
}

TEST(SoftDilateTest, HardMaxOnBinaryFieldEqualsDilate) {
  Xorshift64Star rng(35);
  const BinaryMask m = random_mask(rng, 9, 7, 0.2);
  Plane f{9, 7, {}};
  for (std::size_t p = 0; p < m.pixel_count(); ++p) f.values.push_back(m[p]);
  for (auto shape : {ElementShape::kSquare, ElementShape::kDiamond}) {
    const StructuringElement e{shape, 2};
    const Plane d = soft_dilate(f, e, {});
    const BinaryMask expected = dilate(m, e);
    for (std::size_t p = 0; p < m.pixel_count(); ++p) {
      ASSERT_EQ(d.values[p], expected[p] ? 1.0 : 0.0);
    }
  }
}

TEST(SoftDilateTest, ConstantFieldIsFixedPoint) {
  const Plane f{6, 5, std::vector<double>(30, 0.37)};
  EXPECT_EQ(soft_dilate(f, {ElementShape::kSquare, 2}, {}).values, f.values);
  EXPECT_EQ(soft_dilate(f, {ElementShape::kDiamond, 1}, {}).values, f.values);
}

TEST(SoftDilateTest, HardMaxMatchesSlidingWindowOracle) {
  Xorshift64Star rng(36);
  const Plane f = random_plane(rng, 6, 6);
  const Plane d = soft_dilate(f, {ElementShape::kSquare, 1}, {});
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) {
      double m = 0.0;
      for (int yy = std::max(0, y - 1); yy <= std::min(5, y + 1); ++yy) {
        for (int xx = std::max(0, x - 1); xx <= std::min(5, x + 1); ++xx) {
          m = std::max(m, f.values[yy * 6 + xx]);
        }
      }
      EXPECT_EQ(d.values[y * 6 + x], m);
    }
  }
}

TEST(SoftDilateTest, HardMaxBoundedByInputAndOne) {
  Xorshift64Star rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const Plane f = random_plane(rng, 8, 5);
    const Plane d = soft_dilate(f, {ElementShape::kDiamond, 2}, {});
    for (std::size_t p = 0; p < f.values.size(); ++p) {
      EXPECT_GE(d.values[p], f.values[p]);
      EXPECT_LE(d.values[p], 1.0);
    }
  }
}

TEST(SoftDilateTest, SmoothMaxBoundsAndValidation) {
  Xorshift64Star rng(38);
  const Plane f = random_plane(rng, 7, 7);
  const SoftDilation smooth{DilationMode::kSmoothMax, 20.0};
  const Plane hard = soft_dilate(f, {ElementShape::kSquare, 1}, {});
  const Plane soft = soft_dilate(f, {ElementShape::kSquare, 1}, smooth);
  for (std::size_t p = 0; p < f.values.size(); ++p) {
    // max <= lse <= max + log(9) / beta, then clamped to 1.
    EXPECT_GE(soft.values[p], std::min(hard.values[p], 1.0) - 1e-15);
    EXPECT_LE(soft.values[p], std::min(hard.values[p] + std::log(9.0) / 20.0, 1.0) + 1e-15);
  }
  EXPECT_THROW(soft_dilate(f, {ElementShape::kSquare, 1},
                           {DilationMode::kSmoothMax, 0.0}),
               DomainError);
  EXPECT_THROW(soft_dilate(f, {ElementShape::kSquare, 1},
                           {DilationMode::kSmoothMax, -3.0}),
               DomainError);
}

TEST(SoftDilateBackwardTest, SmoothMaxMatchesFiniteDifferences) {
  Xorshift64Star rng(39);
  const SoftDilation smooth{DilationMode::kSmoothMax, 20.0};
  const StructuringElement e{ElementShape::kSquare, 2};
  for (int trial = 0; trial < 5; ++trial) {
    Plane f = random_plane(rng, 6, 5);
    for (double& v : f.values) v *= 0.6;  // stay below the clamp
    Plane u = random_plane(rng, 6, 5);
    const Plane g = soft_dilate_backward(f, e, smooth, u);
    const auto objective = [&](const std::vector<double>& x) {
      const Plane d = soft_dilate(Plane{6, 5, x}, e, smooth);
      double s = 0.0;
      for (std::size_t p = 0; p < x.size(); ++p) s += u.values[p] * d.values[p];
      return s;
    };
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const double n = central_difference(objective, f.values, i, 1e-4);
      EXPECT_LT(relative_error(g.values[i], n), 1e-4) << "coordinate " << i;
    }
  }
}

TEST(SoftDilateBackwardTest, HardMaxRoutesToFirstWindowMaximum) {
  // Windows {0,1}, {0,1,2}, {1,2}. The first two tie between pixels 0 and 1
  // and pick pixel 0; the last window only sees pixel 1 as a maximum.
  const Plane f{3, 1, {0.5, 0.5, 0.1}};
  const Plane g = soft_dilate_backward(f, {ElementShape::kSquare, 1}, {},
                                       Plane{3, 1, {1.0, 1.0, 1.0}});
  EXPECT_EQ(g.values, (std::vector<double>{2.0, 1.0, 0.0}));
}

}  // namespace
}  // namespace partgraph
