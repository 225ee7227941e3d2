#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "geosvg/errors.hpp"
#include "geosvg/format.hpp"
#include "geosvg/svg_scene.hpp"
#include "path_oracle.hpp"

using namespace geosvg;
using namespace pathgen;

TEST(PathEndpoints, SpecExamples) {
  EXPECT_EQ(path_endpoints("M 10 20 L 110 20", {}), (Endpoints{{10, 20}, {110, 20}}));
  EXPECT_EQ(path_endpoints("M 0 0 C 10 10 20 10 30 0", {}), (Endpoints{{0, 0}, {30, 0}}));
  EXPECT_EQ(path_endpoints("M 10 20 L 110 20", AffineTransform::translate(5, 5)), (Endpoints{{15, 25}, {115, 25}}));
}

TEST(PathEndpoints, RejectsUnsupportedCommands) {
  EXPECT_THROW(path_endpoints("M 0 0 A 5 5 0 0 1 10 10", {}), PathError);
  EXPECT_THROW(path_endpoints("M 0 0 S 1 1 2 2", {}), PathError);
  EXPECT_THROW(path_endpoints("M 0 0 T 2 2", {}), PathError);
  EXPECT_THROW(path_endpoints("L 1 1", {}), PathError);
  EXPECT_THROW(path_endpoints("M 0 0", {}), PathError);
  EXPECT_THROW(path_endpoints("M 0 0 L 1", {}), PathError);
}

TEST(PathEndpoints, ClosedSubpathEndsAtItsStart) {
  EXPECT_EQ(path_endpoints("M 0 0 L 10 0 L 10 10 Z", {}), (Endpoints{{0, 0}, {0, 0}}));
}

// Dense numeric oracle: endpoints from de Casteljau evaluation at t = 0 of the first drawn
// segment and t = 1 of the last, boxes from 4001 samples per segment.
TEST(PathEndpoints, AgreesWithCurveEvaluationOracle) {
  std::mt19937_64 tgen(1234);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    PathGen pg(i);
    const RandomPath p = pg.make();
    ASSERT_FALSE(p.segments.empty());
    const AffineTransform t = random_transform(tgen);
    const Endpoints got = path_endpoints(p.d, t);
    const Point start = t.apply(de_casteljau(p.segments.front(), 0.0));
    const Point end = t.apply(de_casteljau(p.segments.back(), 1.0));
    ASSERT_NEAR(got.start.x, start.x, 1e-6) << p.d;
    ASSERT_NEAR(got.start.y, start.y, 1e-6) << p.d;
    ASSERT_NEAR(got.end.x, end.x, 1e-6) << p.d;
    ASSERT_NEAR(got.end.y, end.y, 1e-6) << p.d;

    if (i % 10 != 0) continue;
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& seg : p.segments) {
      for (int k = 0; k <= 4000; ++k) {
        const Point q = t.apply(de_casteljau(seg, k / 4000.0));
        x0 = std::min(x0, q.x);
        y0 = std::min(y0, q.y);
        x1 = std::max(x1, q.x);
        y1 = std::max(y1, q.y);
      }
    }
    const Rect box = path_bbox(p.d, t);
    EXPECT_LE(box.left(), x0 + 1e-6) << p.d;
    EXPECT_LE(box.top(), y0 + 1e-6) << p.d;
    EXPECT_GE(box.right(), x1 - 1e-6) << p.d;
    EXPECT_GE(box.bottom(), y1 - 1e-6) << p.d;
    EXPECT_NEAR(box.left(), x0, 0.05) << p.d;
    EXPECT_NEAR(box.right(), x1, 0.05) << p.d;
    EXPECT_NEAR(box.top(), y0, 0.05) << p.d;
    EXPECT_NEAR(box.bottom(), y1, 0.05) << p.d;
  }
}
