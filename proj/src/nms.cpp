#include "occdet/nms.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace occdet {

std::vector<Detection> nms(std::span<const Detection> dets, double iou_thresh)
{
    if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) {
        throw std::invalid_argument("nms threshold must be in (0,1)");
    }
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    std::vector<Detection> kept;
    std::vector<char> suppressed(dets.size(), 0);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (suppressed[i]) {
            continue;
        }
        kept.push_back(dets[i]);
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (!suppressed[j] && iou(dets[i].box, dets[j].box) > iou_thresh) {
                suppressed[j] = 1;
            }
        }
    }
    return kept;
}

}  // namespace occdet
