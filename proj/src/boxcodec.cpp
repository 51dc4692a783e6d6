#include "occdet/boxcodec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace occdet {

bool BoxDeltas::finite() const
{
    return std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); });
}

BoxDeltas encode(const Box& roi, const Box& gt)
{
    if (roi.degenerate() || gt.degenerate()) {
        throw std::invalid_argument("encode: roi and gt need positive width and height");
    }
    const double pw = roi.width();
    const double ph = roi.height();
    return BoxDeltas{{(gt.center_x() - roi.center_x()) / pw, (gt.center_y() - roi.center_y()) / ph,
                      std::log(gt.width() / pw), std::log(gt.height() / ph)}};
}

Box decode(const Box& roi, const BoxDeltas& d)
{
    if (roi.degenerate()) {
        throw std::invalid_argument("decode: roi needs positive width and height");
    }
    if (!d.finite()) {
        throw std::invalid_argument("decode: non-finite deltas");
    }
    const double pw = roi.width();
    const double ph = roi.height();
    const double cx = roi.center_x() + d[0] * pw;
    const double cy = roi.center_y() + d[1] * ph;
    const double w = pw * std::exp(d[2]);
    const double h = ph * std::exp(d[3]);
    return Box{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

SignTargets sign_targets(const BoxDeltas& t_star)
{
    SignTargets out;
    for (std::size_t k = 0; k < 4; ++k) {
        out.s[k] = t_star[k] <= 0.0 ? Sign::Neg : Sign::Pos;
    }
    return out;
}

Box clip_to_image(const Box& b, double width, double height)
{
    Box c{std::clamp(b.x1, 0.0, width), std::clamp(b.y1, 0.0, height), std::clamp(b.x2, 0.0, width),
          std::clamp(b.y2, 0.0, height)};
    c.x2 = std::max(c.x2, c.x1);
    c.y2 = std::max(c.y2, c.y1);
    return c;
}

}  // namespace occdet
