#include <doctest.h>

#include <vector>

#include "occdet/geometry.hpp"
#include "occdet/rng.hpp"
#include "oracles.hpp"

using namespace occdet;

TEST_CASE("area of simple boxes")
{
    CHECK(area(Box{0, 0, 10, 10}) == 100.0);
    CHECK(area(Box{3, 3, 3, 9}) == 0.0);
    CHECK(area(Box{0, 0, 1, 1}) == 1.0);
    CHECK(area(Box{0, 0, 10, 10}) == oracle::raster_area(Box{0, 0, 10, 10}));
}

TEST_CASE("intersection and iou")
{
    const Box a{0, 0, 10, 10};
    CHECK(intersect_area(a, Box{5, 0, 15, 10}) == 50.0);
    CHECK(intersect_area(a, Box{20, 20, 30, 30}) == 0.0);
    CHECK(intersect_area(a, a) == 100.0);
    CHECK(intersect_area(a, Box{10, 0, 20, 10}) == 0.0);

    CHECK(iou(a, Box{5, 0, 15, 10}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, Box{20, 20, 30, 30}) == 0.0);
    CHECK(iou(Box{1, 1, 1, 1}, Box{1, 1, 1, 1}) == 0.0);
}

TEST_CASE("iou is symmetric and bounded")
{
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const Box a{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(50, 100), rng.uniform(50, 100)};
        const Box b{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(50, 100), rng.uniform(50, 100)};
        const double v = iou(a, b);
        CHECK(v == iou(b, a));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("vis_ratio examples")
{
    const auto gt = GroundTruth::from_boxes(Box{0, 0, 20, 20}, Box{5, 5, 15, 15});
    CHECK(vis_ratio(Box{0, 0, 10, 10}, gt) == 0.25);
    CHECK(vis_ratio(Box{0, 0, 20, 20}, gt) == 1.0);
    CHECK(vis_ratio(Box{30, 30, 40, 40}, gt) == 0.0);

    const auto hidden = GroundTruth::from_boxes(Box{0, 0, 20, 20}, Box{0, 0, 0, 0});
    CHECK(vis_ratio(Box{0, 0, 10, 10}, hidden) == 0.0);
}

TEST_CASE("geometry matches rasterization on integer boxes")
{
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        const Box a = oracle::random_int_box(rng, 30, 20);
        const Box b = oracle::random_int_box(rng, 30, 20);
        REQUIRE(area(a) == double(oracle::raster_area(a)));
        REQUIRE(intersect_area(a, b) == double(oracle::raster_intersection(a, b)));
        REQUIRE(iou(a, b) == oracle::raster_iou(a, b));
        const auto gt = GroundTruth::from_boxes(Box{0, 0, 60, 60}, b);
        REQUIRE(vis_ratio(a, gt) == oracle::raster_vis_ratio(a, b));
    }
}

TEST_CASE("occlusion")
{
    const Box full{0, 0, 10, 20};
    CHECK(GroundTruth::from_boxes(full, full).occlusion() == 0.0);
    CHECK(GroundTruth::from_boxes(full, Box{0, 0, 10, 10}).occlusion() == 0.5);
    CHECK(GroundTruth{full, Box{0, 0, 10, 10}, 0.0}.occlusion() == 1.0);
    CHECK(GroundTruth::from_boxes(Box{0, 0, 0, 5}, Box{}).occlusion() == 1.0);
}

TEST_CASE("uncovered region: L shape keeps full bounds but smaller area")
{
    const Box box{0, 0, 10, 10};
    const std::vector<Box> covers{Box{5, 5, 20, 20}};
    const auto r = uncovered_region(box, covers);
    CHECK(r.area == 75.0);
    CHECK(r.bounds == box);
    CHECK(covered_area(box, covers) == 25.0);
}

TEST_CASE("uncovered region: fully covered")
{
    const Box box{2, 3, 8, 9};
    const std::vector<Box> covers{Box{0, 0, 5, 20}, Box{4, 0, 10, 20}};
    const auto r = uncovered_region(box, covers);
    CHECK(r.area == 0.0);
    CHECK(r.bounds.degenerate());
    CHECK(covered_area(box, covers) == 36.0);
}

TEST_CASE("uncovered region: overlapping covers are not double counted")
{
    const Box box{0, 0, 10, 10};
    const std::vector<Box> covers{Box{0, 0, 6, 10}, Box{3, 0, 8, 10}};
    const auto r = uncovered_region(box, covers);
    CHECK(r.area == 20.0);
    CHECK(r.bounds == Box{8, 0, 10, 10});
}

TEST_CASE("uncovered region matches rasterization")
{
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const Box box = oracle::random_int_box(rng, 20, 15);
        std::vector<Box> covers;
        const auto n = rng.integer(0, 5);
        for (std::int64_t k = 0; k < n; ++k) {
            covers.push_back(oracle::random_int_box(rng, 25, 12));
        }
        const auto got = uncovered_region(box, covers);
        const auto want = oracle::raster_uncovered(box, covers);
        REQUIRE(got.area == double(want.area));
        if (want.area > 0) {
            REQUIRE(got.bounds == want.bounds);
        }
    }
}
