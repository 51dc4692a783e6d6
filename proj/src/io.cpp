#include "occdet/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace occdet {

// Ordered so output keys follow the documented layout.
using json = nlohmann::ordered_json;

namespace {

json box_json(const Box& b)
{
    return json::array({b.x1, b.y1, b.x2, b.y2});
}

Box box_from(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 4) {
        throw DataError(std::string(what) + ": expected [x1,y1,x2,y2]");
    }
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw DataError(std::string(what) + ": box coordinates must be numbers");
        }
    }
    const Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!b.valid()) {
        throw DataError(std::string(what) + ": box must satisfy x1 <= x2 and y1 <= y2");
    }
    return b;
}

json parse_line(const std::string& line)
{
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid JSON: ") + e.what());
    }
}

const json& field(const json& obj, const char* key)
{
    if (!obj.is_object() || !obj.contains(key)) {
        throw DataError(std::string("missing field '") + key + "'");
    }
    return obj.at(key);
}

std::string image_id_from(const json& obj)
{
    const json& id = field(obj, "image_id");
    if (!id.is_string()) {
        throw DataError("image_id must be a string");
    }
    return id.get<std::string>();
}

template <typename T, typename Parse>
std::vector<T> read_lines(std::istream& is, Parse parse)
{
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(parse(line));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return in;
}

}  // namespace

std::string scene_to_json(const Scene& scene)
{
    json gts = json::array();
    for (const auto& gt : scene.gts) {
        gts.push_back({{"full", box_json(gt.full)}, {"visible", box_json(gt.visible)}, {"vis_area", gt.vis_area}});
    }
    json rois = json::array();
    for (const auto& r : scene.rois) {
        rois.push_back(box_json(r));
    }
    json obj = json::object();
    obj["image_id"] = scene.image_id;
    obj["gts"] = std::move(gts);
    obj["rois"] = std::move(rois);
    return obj.dump();
}

Scene scene_from_json(const std::string& line)
{
    const json obj = parse_line(line);
    Scene scene;
    scene.image_id = image_id_from(obj);
    const json& gts = field(obj, "gts");
    if (!gts.is_array()) {
        throw DataError("gts must be an array");
    }
    for (const auto& g : gts) {
        GroundTruth gt;
        gt.full = box_from(field(g, "full"), "gt.full");
        gt.visible = box_from(field(g, "visible"), "gt.visible");
        if (g.contains("vis_area")) {
            if (!g.at("vis_area").is_number()) {
                throw DataError("vis_area must be a number");
            }
            gt.vis_area = g.at("vis_area").get<double>();
        } else {
            gt.vis_area = area(gt.visible);
        }
        if (!gt.valid()) {
            throw DataError("ground truth must have visible inside full and 0 <= vis_area <= visible area");
        }
        scene.gts.push_back(gt);
    }
    if (obj.contains("rois")) {
        const json& rois = obj.at("rois");
        if (!rois.is_array()) {
            throw DataError("rois must be an array");
        }
        for (const auto& r : rois) {
            scene.rois.push_back(box_from(r, "roi"));
        }
    }
    return scene;
}

std::string detections_to_json(const DetectionSet& set)
{
    json dets = json::array();
    for (const auto& d : set.dets) {
        dets.push_back({{"box", box_json(d.box)}, {"score", d.score}});
    }
    json obj = json::object();
    obj["image_id"] = set.image_id;
    obj["dets"] = std::move(dets);
    return obj.dump();
}

DetectionSet detections_from_json(const std::string& line)
{
    const json obj = parse_line(line);
    DetectionSet set;
    set.image_id = image_id_from(obj);
    const json& dets = field(obj, "dets");
    if (!dets.is_array()) {
        throw DataError("dets must be an array");
    }
    for (const auto& d : dets) {
        const json& score = field(d, "score");
        if (!score.is_number()) {
            throw DataError("score must be a number");
        }
        set.dets.push_back({box_from(field(d, "box"), "det.box"), score.get<double>()});
    }
    return set;
}

void write_scenes(std::ostream& os, const std::vector<Scene>& scenes)
{
    for (const auto& s : scenes) {
        os << scene_to_json(s) << '\n';
    }
}

std::vector<Scene> read_scenes(std::istream& is)
{
    return read_lines<Scene>(is, scene_from_json);
}

void write_detections(std::ostream& os, const std::vector<DetectionSet>& sets)
{
    for (const auto& s : sets) {
        os << detections_to_json(s) << '\n';
    }
}

std::vector<DetectionSet> read_detections(std::istream& is)
{
    return read_lines<DetectionSet>(is, detections_from_json);
}

std::vector<Scene> read_scenes_file(const std::string& path)
{
    auto in = open_input(path);
    return read_scenes(in);
}

std::vector<DetectionSet> read_detections_file(const std::string& path)
{
    auto in = open_input(path);
    return read_detections(in);
}

}  // namespace occdet
