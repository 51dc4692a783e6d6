#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "occdet/evalmr.hpp"
#include "occdet/rng.hpp"
#include "oracles.hpp"

using namespace occdet;

namespace {

GroundTruth person(double x, double height, double occlusion)
{
    const Box full{x, 0, x + 0.41 * height, height};
    const Box visible{full.x1, full.y1, full.x2, full.y1 + (1.0 - occlusion) * height};
    return GroundTruth{full, visible, area(full) * (1.0 - occlusion)};
}

std::vector<ImageMatch> match_all(const std::vector<oracle::Image>& images, const SubsetSpec& spec)
{
    std::vector<ImageMatch> out;
    for (const auto& img : images) {
        out.push_back(match_detections(img.dets, img.gts, spec));
    }
    return out;
}

}  // namespace

TEST_CASE("subset membership")
{
    const auto r = SubsetSpec::reasonable();
    const auto p = SubsetSpec::partial();
    const auto b = SubsetSpec::bare();
    const auto h = SubsetSpec::heavy();
    const auto clear = person(0, 60, 0.0);
    CHECK(r.contains(clear));
    CHECK(b.contains(clear));
    CHECK_FALSE(p.contains(clear));
    CHECK_FALSE(h.contains(clear));

    const auto partial = person(0, 60, 0.2);
    CHECK(p.contains(partial));
    CHECK_FALSE(b.contains(partial));
    CHECK(r.contains(partial));

    CHECK_FALSE(r.contains(person(0, 40, 0.0)));
    CHECK_FALSE(r.contains(person(0, 50, 0.0)));
    CHECK(h.contains(person(0, 60, 0.9)));
    CHECK(h.contains(person(0, 60, 1.0)));

    // 0.25 and 0.5 are exact in binary, so the bounds are tested exactly.
    const SubsetSpec quarter{"q", 50.0, 0.25, 0.5};
    CHECK_FALSE(quarter.contains(person(0, 64, 0.25)));
    CHECK(quarter.contains(person(0, 64, 0.5)));

    CHECK(SubsetSpec::by_name("heavy").name == "heavy");
    CHECK_THROWS_AS(SubsetSpec::by_name("medium"), std::invalid_argument);
}

TEST_CASE("subset partition laws")
{
    Rng rng(41);
    for (int i = 0; i < 50; ++i) {
        const auto images = oracle::mini_dataset(rng, 5);
        for (const auto& img : images) {
            for (const auto& g : img.gts) {
                const bool r = SubsetSpec::reasonable().contains(g);
                const bool p = SubsetSpec::partial().contains(g);
                const bool b = SubsetSpec::bare().contains(g);
                const bool h = SubsetSpec::heavy().contains(g);
                REQUIRE(r == (p || b));
                REQUIRE_FALSE((p && b));
                REQUIRE_FALSE((h && r));
            }
            const auto part = subset_filter(img.gts, SubsetSpec::reasonable());
            REQUIRE(part.evaluated.size() + part.ignored.size() == img.gts.size());
        }
    }
}

TEST_CASE("matching examples")
{
    const std::vector<GroundTruth> gts{person(0, 100, 0.0)};
    const std::vector<Detection> exact{{gts[0].full, 0.9}};
    auto m = match_detections(exact, gts, SubsetSpec::reasonable());
    CHECK(m.outcomes[0] == MatchOutcome::TruePositive);

    const Box shifted{gts[0].full.x1 + 2, 0, gts[0].full.x2 + 2, 100};
    const std::vector<Detection> two{{shifted, 0.5}, {gts[0].full, 0.7}};
    m = match_detections(two, gts, SubsetSpec::reasonable());
    CHECK(m.outcomes[1] == MatchOutcome::TruePositive);
    CHECK(m.outcomes[0] == MatchOutcome::FalsePositive);
    CHECK(m.scores[0] == 0.5);

    const std::vector<GroundTruth> small{person(0, 30, 0.0)};
    const std::vector<Detection> on_small{{small[0].full, 0.9}};
    m = match_detections(on_small, small, SubsetSpec::reasonable());
    CHECK(m.outcomes[0] == MatchOutcome::Ignored);
    CHECK(m.num_evaluated_gt() == 0);
}

TEST_CASE("a detection prefers an unmatched in-subset GT over an ignored one")
{
    const std::vector<GroundTruth> gts{person(0, 30, 0.0), person(0, 100, 0.0)};
    const Box b = gts[1].full;
    const std::vector<Detection> dets{{b, 0.9}};
    const auto m = match_detections(dets, gts, SubsetSpec::reasonable());
    CHECK(m.outcomes[0] == MatchOutcome::TruePositive);
    CHECK(m.gt_matched[1]);
}

TEST_CASE("perfect and empty detectors")
{
    std::vector<oracle::Image> images(3);
    images[0].gts = {person(0, 100, 0.0), person(100, 80, 0.1)};
    images[1].gts = {person(0, 60, 0.3)};
    std::vector<ImageMatch> perfect;
    std::vector<ImageMatch> empty;
    for (auto& img : images) {
        std::vector<Detection> dets;
        for (const auto& g : img.gts) {
            dets.push_back({g.full, 1.0});
        }
        perfect.push_back(match_detections(dets, img.gts, SubsetSpec::reasonable()));
        empty.push_back(match_detections({}, img.gts, SubsetSpec::reasonable()));
    }
    CHECK(mr2(perfect).mr2 == 0.0);
    CHECK(mr2(empty).mr2 == 1.0);
    CHECK(mr2(empty).curve.size() == 1);
}

TEST_CASE("fppi reference points")
{
    const auto refs = fppi_reference_points();
    CHECK(refs.front() == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(refs.back() == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t i = 1; i < refs.size(); ++i) {
        CHECK(refs[i] / refs[i - 1] == doctest::Approx(std::pow(10.0, 0.25)).epsilon(1e-14));
    }
}

TEST_CASE("mr2 equals the threshold-enumeration oracle")
{
    Rng rng(43);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto images = oracle::mini_dataset(rng, 10);
        for (const auto& spec : {SubsetSpec::reasonable(), SubsetSpec::heavy()}) {
            if (oracle::count_in_subset(images, spec.min_height, spec.occ_low, spec.occ_high) == 0) {
                continue;
            }
            const double got = mr2(match_all(images, spec)).mr2;
            const double want = oracle::mr2(images, spec.min_height, spec.occ_low, spec.occ_high);
            REQUIRE(std::abs(got - want) < 1e-9);
            ++checked;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("mr2 rejects empty input")
{
    CHECK_THROWS_AS(mr2(std::vector<ImageMatch>{}), std::invalid_argument);
    const std::vector<GroundTruth> small{person(0, 30, 0.0)};
    const std::vector<ImageMatch> none{match_detections({}, small, SubsetSpec::reasonable())};
    CHECK_THROWS_AS(mr2(none), std::invalid_argument);
}
