#pragma once

#include <span>
#include <vector>

#include "occdet/geometry.hpp"

namespace occdet {

struct Detection {
    Box box;
    double score = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// Greedy NMS. Visits detections by descending score (stable on ties) and
/// drops any whose IoU with an already kept box is strictly greater than
/// `iou_thresh`. Output is in kept order.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_thresh);

}  // namespace occdet
