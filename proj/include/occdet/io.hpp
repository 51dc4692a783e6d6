#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "occdet/synth.hpp"

namespace occdet {

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// JSONL, one object per line:
//   scene:      {"image_id": str, "gts": [{"full": [x1,y1,x2,y2], "visible": [...], "vis_area": f}],
//                "rois": [[x1,y1,x2,y2], ...]}
//   detections: {"image_id": str, "dets": [{"box": [x1,y1,x2,y2], "score": f}]}
// A missing "vis_area" defaults to the visible box area. Blank lines are skipped.

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& line);
std::string detections_to_json(const DetectionSet& set);
DetectionSet detections_from_json(const std::string& line);

void write_scenes(std::ostream& os, const std::vector<Scene>& scenes);
std::vector<Scene> read_scenes(std::istream& is);
void write_detections(std::ostream& os, const std::vector<DetectionSet>& sets);
std::vector<DetectionSet> read_detections(std::istream& is);

std::vector<Scene> read_scenes_file(const std::string& path);
std::vector<DetectionSet> read_detections_file(const std::string& path);

}  // namespace occdet
