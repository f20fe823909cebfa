#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wsg/geometry.hpp"
#include "wsg/rng.hpp"

using wsg::Rng;
using namespace wsg::geom;

// ---------------------------------------------------------------------------
// Independent oracles (written against the contract, not the code).
// ---------------------------------------------------------------------------

// Cell-counting IoU for integer-cornered boxes: walk unit cells and
// count membership. For integer corners this is exact, so it checks
// the arithmetic implementation through a completely different route.
static double raster_iou(const Box& a, const Box& b, int lo, int hi) {
  long long ca = 0, cb = 0, cab = 0;
  for (int x = lo; x < hi; ++x)
    for (int y = lo; y < hi; ++y) {
      bool in_a = x >= a.x1 && x + 1 <= a.x2 && y >= a.y1 && y + 1 <= a.y2;
      bool in_b = x >= b.x1 && x + 1 <= b.x2 && y >= b.y1 && y + 1 <= b.y2;
      ca += in_a;
      cb += in_b;
      cab += in_a && in_b;
    }
  long long uni = ca + cb - cab;
  if (uni == 0) return 0.0;
  return double(cab) / double(uni);
}

static Box random_int_box(Rng& rng, int span) {
  int x1 = int(rng.uniform_index(size_t(span)));
  int x2 = int(rng.uniform_index(size_t(span)));
  int y1 = int(rng.uniform_index(size_t(span)));
  int y2 = int(rng.uniform_index(size_t(span)));
  if (x2 < x1) std::swap(x1, x2);
  if (y2 < y1) std::swap(y1, y2);
  return {double(x1), double(y1), double(x2), double(y2)};
}

TEST_CASE("iou matches the cell-counting oracle on 1000 integer box pairs") {
  Rng rng(2024);
  int exact = 0;
  for (int it = 0; it < 1000; ++it) {
    Box a = random_int_box(rng, 32);
    Box b = random_int_box(rng, 32);
    double got = iou(a, b);
    double want = raster_iou(a, b, 0, 32);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    exact += got == want;
  }
  // The counting route goes through integer arithmetic; the two should
  // agree to the last bit almost always, not merely within tolerance.
  CHECK(exact > 900);
}

TEST_CASE("iou is invariant under scaling and translation (vs the same oracle)") {
  Rng rng(77);
  for (int it = 0; it < 200; ++it) {
    Box a = random_int_box(rng, 32);
    Box b = random_int_box(rng, 32);
    double want = raster_iou(a, b, 0, 32);
    double s = 0.25; // power of two: exact in binary floating point
    double dx = rng.uniform(-5.0, 5.0), dy = rng.uniform(-5.0, 5.0);
    Box a2{a.x1 * s + dx, a.y1 * s + dy, a.x2 * s + dx, a.y2 * s + dy};
    Box b2{b.x1 * s + dx, b.y1 * s + dy, b.x2 * s + dx, b.y2 * s + dy};
    CHECK(iou(a2, b2) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("iou worked examples") {
  Box a{0, 0, 10, 10};
  CHECK(iou(a, {5, 5, 15, 15}) == doctest::Approx(25.0 / 175.0).epsilon(1e-12));
  CHECK(iou(a, {1, 1, 11, 11}) == doctest::Approx(81.0 / 119.0).epsilon(1e-12));
  CHECK(iou(a, {8, 8, 18, 18}) == doctest::Approx(4.0 / 196.0).epsilon(1e-12));
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {20, 20, 30, 30}) == 0.0);      // disjoint
  CHECK(iou(a, {10, 0, 20, 10}) == 0.0);        // touching edges only
  CHECK(iou(a, {3, 3, 3, 9}) == 0.0);           // degenerate other
  CHECK(iou({2, 2, 2, 2}, {2, 2, 2, 2}) == 0.0); // both degenerate
}

TEST_CASE("encode/apply round-trip on 1000 random pairs") {
  Rng rng(555);
  Box bounds{0, 0, 1e9, 1e9}; // effectively no clipping
  for (int it = 0; it < 1000; ++it) {
    auto draw = [&] {
      double x1 = rng.uniform(0.0, 100.0), y1 = rng.uniform(0.0, 100.0);
      double w = rng.uniform(0.5, 28.0), h = rng.uniform(0.5, 28.0);
      return Box{x1, y1, x1 + w, y1 + h};
    };
    Box src = draw(), dst = draw();
    Box back = apply_offset(src, encode_offset(src, dst), bounds);
    double scale = std::max({1.0, std::abs(dst.x1), std::abs(dst.y1), std::abs(dst.x2),
                             std::abs(dst.y2)});
    CHECK(std::abs(back.x1 - dst.x1) / scale < 1e-6);
    CHECK(std::abs(back.y1 - dst.y1) / scale < 1e-6);
    CHECK(std::abs(back.x2 - dst.x2) / scale < 1e-6);
    CHECK(std::abs(back.y2 - dst.y2) / scale < 1e-6);
  }
}

TEST_CASE("offset worked examples") {
  Offset d = encode_offset({0, 0, 10, 10}, {5, 0, 15, 10});
  CHECK(d.tx == 0.5);
  CHECK(d.ty == 0.0);
  CHECK(d.tw == 0.0);
  CHECK(d.th == 0.0);

  // Identity: zero offset maps the box onto itself.
  Box self = apply_offset({2, 3, 8, 9}, {0, 0, 0, 0}, {0, 0, 20, 20});
  CHECK(self == Box{2, 3, 8, 9});

  // The shifted box (5,0,15,10) pokes past x=12 and comes back clipped.
  Box clipped = apply_offset({0, 0, 10, 10}, {0.5, 0, 0, 0}, {0, 0, 12, 12});
  CHECK(clipped == Box{5, 0, 12, 10});

  CHECK_THROWS_AS((void)encode_offset({0, 0, 0, 10}, {1, 1, 2, 2}), std::invalid_argument);
  CHECK_THROWS_AS((void)encode_offset({0, 0, 5, 5}, {1, 1, 1, 7}), std::invalid_argument);
}

TEST_CASE("clip_box and box invariants") {
  Box bounds{0, 0, 12, 12};
  CHECK(clip_box({-3, 5, 20, 30}, bounds) == Box{0, 5, 12, 12});
  // A box fully outside collapses to a zero-area sliver on the border.
  Box gone = clip_box({20, 20, 30, 30}, bounds);
  CHECK(gone.valid());
  CHECK(gone.area() == 0.0);

  Rng rng(8);
  for (int it = 0; it < 1000; ++it) {
    Box b{rng.uniform(-50.0, 150.0), rng.uniform(-50.0, 150.0), 0, 0};
    b.x2 = b.x1 + rng.uniform(0.0, 80.0);
    b.y2 = b.y1 + rng.uniform(0.0, 80.0);
    Box c = clip_box(b, bounds);
    CHECK(c.valid());
    CHECK(c.x1 >= bounds.x1);
    CHECK(c.y1 >= bounds.y1);
    CHECK(c.x2 <= bounds.x2);
    CHECK(c.y2 <= bounds.y2);
    CHECK(iou(b, b) == (b.positive_size() ? 1.0 : 0.0));
  }
}

TEST_CASE("center_in is boundary inclusive") {
  Box gt{0, 0, 10, 10};
  CHECK(center_in({4, 4, 6, 6}, gt));     // center (5,5) inside
  CHECK(center_in({8, 8, 12, 12}, gt));   // center (10,10) on the corner
  CHECK(center_in({-10, 0, 10, 10}, gt)); // center (0,5) on the edge
  CHECK(!center_in({9, 9, 14, 14}, gt));  // center (11.5,11.5) outside
}
