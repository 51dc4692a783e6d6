#include "occdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace occdet {

bool Box::valid() const
{
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           x1 <= x2 && y1 <= y2;
}

bool Box::contains(const Box& other) const
{
    return x1 <= other.x1 && y1 <= other.y1 && other.x2 <= x2 && other.y2 <= y2;
}

double area(const Box& b)
{
    return std::max(0.0, b.width()) * std::max(0.0, b.height());
}

double intersect_area(const Box& a, const Box& b)
{
    const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (w <= 0.0 || h <= 0.0) {
        return 0.0;
    }
    return w * h;
}

double iou(const Box& a, const Box& b)
{
    const double inter = intersect_area(a, b);
    const double uni = area(a) + area(b) - inter;
    if (uni <= 0.0) {
        return 0.0;
    }
    return std::clamp(inter / uni, 0.0, 1.0);
}

GroundTruth GroundTruth::from_boxes(const Box& full, const Box& visible)
{
    return GroundTruth{full, visible, area(visible)};
}

double GroundTruth::occlusion() const
{
    const double a = area(full);
    if (a <= 0.0) {
        return 1.0;
    }
    return std::clamp(1.0 - vis_area / a, 0.0, 1.0);
}

bool GroundTruth::valid() const
{
    return full.valid() && visible.valid() && full.contains(visible) && std::isfinite(vis_area) &&
           vis_area >= 0.0 && vis_area <= area(visible) * (1.0 + 1e-12) + 1e-12;
}

double vis_ratio(const Box& roi, const GroundTruth& gt)
{
    const double v = area(gt.visible);
    if (v <= 0.0) {
        return 0.0;
    }
    return std::clamp(intersect_area(roi, gt.visible) / v, 0.0, 1.0);
}

namespace {

// Cells of the compressed grid spanned by `box` and every cover clipped to it.
struct Grid {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<char> covered;  // row-major, (ys.size()-1) x (xs.size()-1)

    std::size_t cols() const { return xs.size() - 1; }
    std::size_t rows() const { return ys.size() - 1; }
};

Grid build_grid(const Box& box, std::span<const Box> covers)
{
    Grid g;
    g.xs = {box.x1, box.x2};
    g.ys = {box.y1, box.y2};
    std::vector<Box> clipped;
    for (const Box& c : covers) {
        Box k{std::max(c.x1, box.x1), std::max(c.y1, box.y1), std::min(c.x2, box.x2), std::min(c.y2, box.y2)};
        if (k.x2 > k.x1 && k.y2 > k.y1) {
            clipped.push_back(k);
            g.xs.push_back(k.x1);
            g.xs.push_back(k.x2);
            g.ys.push_back(k.y1);
            g.ys.push_back(k.y2);
        }
    }
    std::sort(g.xs.begin(), g.xs.end());
    g.xs.erase(std::unique(g.xs.begin(), g.xs.end()), g.xs.end());
    std::sort(g.ys.begin(), g.ys.end());
    g.ys.erase(std::unique(g.ys.begin(), g.ys.end()), g.ys.end());
    if (g.xs.size() < 2 || g.ys.size() < 2) {
        g.covered.clear();
        return g;
    }

    g.covered.assign(g.rows() * g.cols(), 0);
    for (const Box& k : clipped) {
        const auto c0 = std::lower_bound(g.xs.begin(), g.xs.end(), k.x1) - g.xs.begin();
        const auto c1 = std::lower_bound(g.xs.begin(), g.xs.end(), k.x2) - g.xs.begin();
        const auto r0 = std::lower_bound(g.ys.begin(), g.ys.end(), k.y1) - g.ys.begin();
        const auto r1 = std::lower_bound(g.ys.begin(), g.ys.end(), k.y2) - g.ys.begin();
        for (auto r = r0; r < r1; ++r) {
            for (auto c = c0; c < c1; ++c) {
                g.covered[static_cast<std::size_t>(r) * g.cols() + static_cast<std::size_t>(c)] = 1;
            }
        }
    }
    return g;
}

}  // namespace

double covered_area(const Box& box, std::span<const Box> covers)
{
    return area(box) - uncovered_region(box, covers).area;
}

Residual uncovered_region(const Box& box, std::span<const Box> covers)
{
    Residual out;
    out.bounds = Box{box.x1, box.y1, box.x1, box.y1};
    if (area(box) <= 0.0) {
        return out;
    }
    const Grid g = build_grid(box, covers);
    if (g.covered.empty()) {
        return out;
    }

    double bx1 = std::numeric_limits<double>::infinity();
    double by1 = bx1;
    double bx2 = -bx1;
    double by2 = -bx1;
    for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) {
            if (g.covered[r * g.cols() + c]) {
                continue;
            }
            out.area += (g.xs[c + 1] - g.xs[c]) * (g.ys[r + 1] - g.ys[r]);
            bx1 = std::min(bx1, g.xs[c]);
            by1 = std::min(by1, g.ys[r]);
            bx2 = std::max(bx2, g.xs[c + 1]);
            by2 = std::max(by2, g.ys[r + 1]);
        }
    }
    if (out.area > 0.0) {
        out.bounds = Box{bx1, by1, bx2, by2};
    }
    return out;
}

}  // namespace occdet
