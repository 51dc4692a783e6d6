#pragma once

#include <span>

namespace occdet {

/// Axis-aligned rectangle in corner form, pixel coordinates.
/// Degenerate (zero-width or zero-height) boxes are valid.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double center_x() const { return 0.5 * (x1 + x2); }
    double center_y() const { return 0.5 * (y1 + y2); }

    bool valid() const;
    bool degenerate() const { return !(width() > 0.0 && height() > 0.0); }
    bool contains(const Box& other) const;

    friend bool operator==(const Box&, const Box&) = default;
};

double area(const Box& b);
double intersect_area(const Box& a, const Box& b);
double iou(const Box& a, const Box& b);

/// Full-body annotation plus its visible part.
///
/// `vis_area` is the exact visible area. It can be smaller than
/// `area(visible)` when the visible region is not a rectangle (the visible
/// box is then its tight bounding box). Occlusion is derived from
/// `vis_area`, while the visible-ratio term works on the `visible` box.
struct GroundTruth {
    Box full;
    Box visible;
    double vis_area = 0.0;

    /// Builds a GT whose visible region is exactly the `visible` rectangle.
    static GroundTruth from_boxes(const Box& full, const Box& visible);

    double height() const { return full.height(); }
    /// 1 - vis_area / area(full), clamped to [0,1]; 1 for a degenerate full box.
    double occlusion() const;
    bool valid() const;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// |roi ∩ visible| / |visible|; 0 when the visible box has zero area.
double vis_ratio(const Box& roi, const GroundTruth& gt);

/// Exact area of `box` covered by the union of `covers`, via coordinate
/// compression over the rectangle set.
double covered_area(const Box& box, std::span<const Box> covers);

/// Exact uncovered area of `box` and the tight bounding box of the
/// uncovered region. The returned box is degenerate at (x1,y1) when
/// nothing is left visible.
struct Residual {
    double area = 0.0;
    Box bounds;
};
Residual uncovered_region(const Box& box, std::span<const Box> covers);

}  // namespace occdet
