#include <doctest.h>

#include <sstream>

#include "occdet/io.hpp"
#include "occdet/synth.hpp"

using namespace occdet;

TEST_CASE("scene JSONL round trip")
{
    SceneConfig cfg;
    cfg.seed = 1;
    const auto scenes = generate(cfg, 5);
    std::stringstream ss;
    write_scenes(ss, scenes);
    const auto back = read_scenes(ss);
    CHECK(back == scenes);
}

TEST_CASE("detections JSONL round trip")
{
    const std::vector<DetectionSet> sets{{"a", {{Box{0.1, 0.2, 10.5, 20.25}, 0.125}, {Box{1, 1, 2, 2}, 1.0 / 3.0}}},
                                         {"b", {}}};
    std::stringstream ss;
    write_detections(ss, sets);
    CHECK(read_detections(ss) == sets);
}

TEST_CASE("scene line format")
{
    const Scene s{"img", {GroundTruth::from_boxes(Box{0, 0, 10, 20}, Box{0, 0, 10, 10})}, {Box{1, 2, 3, 4}}};
    CHECK(scene_to_json(s) ==
          R"({"image_id":"img","gts":[{"full":[0.0,0.0,10.0,20.0],"visible":[0.0,0.0,10.0,10.0],"vis_area":100.0}],"rois":[[1.0,2.0,3.0,4.0]]})");
    const auto parsed = scene_from_json(R"({"image_id":"x","gts":[{"full":[0,0,10,20],"visible":[0,0,10,10]}],"rois":[]})");
    CHECK(parsed.gts[0].vis_area == 100.0);
}

TEST_CASE("malformed input is reported")
{
    const char* bad[] = {
        "not json",
        R"({"gts":[],"rois":[]})",
        R"({"image_id":3,"gts":[],"rois":[]})",
        R"({"image_id":"a","gts":[{"full":[0,0,10],"visible":[0,0,1,1]}],"rois":[]})",
        R"({"image_id":"a","gts":[{"full":[0,0,10,10],"visible":[0,0,20,20]}],"rois":[]})",
        R"({"image_id":"a","gts":[],"rois":[[5,5,1,1]]})",
        R"({"image_id":"a","gts":[{"full":[0,0,10,10],"visible":[0,0,5,5],"vis_area":30}],"rois":[]})",
    };
    for (const char* line : bad) {
        CAPTURE(line);
        CHECK_THROWS_AS(scene_from_json(line), DataError);
    }
    CHECK_THROWS_AS(detections_from_json(R"({"image_id":"a","dets":[{"box":[0,0,1,1]}]})"), DataError);

    std::stringstream ss;
    ss << R"({"image_id":"a","gts":[],"rois":[]})" << "\n\n" << "oops\n";
    try {
        read_scenes(ss);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(read_scenes_file("/nonexistent/file.jsonl"), DataError);
}
