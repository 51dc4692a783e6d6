#include "occdet/evalmr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace occdet {

SubsetSpec SubsetSpec::reasonable()
{
    return {"reasonable", 50.0, 0.0, 0.35};
}

SubsetSpec SubsetSpec::partial()
{
    return {"partial", 50.0, 0.10, 0.35};
}

SubsetSpec SubsetSpec::bare()
{
    return {"bare", 50.0, 0.0, 0.10};
}

SubsetSpec SubsetSpec::heavy()
{
    return {"heavy", 50.0, 0.35, 1.0};
}

SubsetSpec SubsetSpec::by_name(std::string_view name)
{
    if (name == "reasonable") {
        return reasonable();
    }
    if (name == "partial") {
        return partial();
    }
    if (name == "bare") {
        return bare();
    }
    if (name == "heavy") {
        return heavy();
    }
    throw std::invalid_argument("unknown subset '" + std::string(name) + "'");
}

void SubsetSpec::validate() const
{
    if (!(min_height >= 0.0 && 0.0 <= occ_low && occ_low <= occ_high && occ_high <= 1.0)) {
        throw std::invalid_argument("invalid subset bounds for '" + name + "'");
    }
}

bool SubsetSpec::contains(const GroundTruth& gt) const
{
    const double occ = gt.occlusion();
    const bool above_low = occ_low == 0.0 ? occ >= 0.0 : occ > occ_low;
    return gt.height() > min_height && above_low && occ <= occ_high;
}

SubsetPartition subset_filter(std::span<const GroundTruth> gts, const SubsetSpec& spec)
{
    spec.validate();
    SubsetPartition p;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        (spec.contains(gts[i]) ? p.evaluated : p.ignored).push_back(i);
    }
    return p;
}

std::size_t ImageMatch::num_evaluated_gt() const
{
    return static_cast<std::size_t>(std::count(gt_evaluated.begin(), gt_evaluated.end(), true));
}

ImageMatch match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                            const SubsetSpec& subset, double match_iou)
{
    subset.validate();
    ImageMatch m;
    m.scores.resize(dets.size());
    m.outcomes.assign(dets.size(), MatchOutcome::FalsePositive);
    m.gt_evaluated.resize(gts.size());
    m.gt_matched.assign(gts.size(), false);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        m.gt_evaluated[g] = subset.contains(gts[g]);
    }

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    for (const std::size_t d : order) {
        m.scores[d] = dets[d].score;
        double best = -1.0;
        std::size_t best_gt = gts.size();
        bool hits_ignored = false;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double o = iou(dets[d].box, gts[g].full);
            if (o < match_iou) {
                continue;
            }
            if (!m.gt_evaluated[g]) {
                hits_ignored = true;
            } else if (!m.gt_matched[g] && o > best) {
                best = o;
                best_gt = g;
            }
        }
        if (best_gt < gts.size()) {
            m.gt_matched[best_gt] = true;
            m.outcomes[d] = MatchOutcome::TruePositive;
        } else if (hits_ignored) {
            m.outcomes[d] = MatchOutcome::Ignored;
        }
    }
    return m;
}

std::array<double, 9> fppi_reference_points()
{
    std::array<double, 9> refs{};
    for (std::size_t i = 0; i < refs.size(); ++i) {
        refs[i] = std::pow(10.0, -2.0 + 0.25 * static_cast<double>(i));
    }
    return refs;
}

EvalResult mr2(std::span<const ImageMatch> images)
{
    if (images.empty()) {
        throw std::invalid_argument("mr2: no images");
    }
    EvalResult res;
    res.counts.num_images = images.size();

    struct Scored {
        double score;
        bool tp;
    };
    std::vector<Scored> pool;
    for (const auto& img : images) {
        res.counts.num_gt += img.num_evaluated_gt();
        res.counts.num_det += img.scores.size();
        for (std::size_t d = 0; d < img.scores.size(); ++d) {
            if (img.outcomes[d] == MatchOutcome::Ignored) {
                continue;
            }
            pool.push_back({img.scores[d], img.outcomes[d] == MatchOutcome::TruePositive});
        }
    }
    if (res.counts.num_gt == 0) {
        throw std::invalid_argument("mr2: subset contains no ground truth");
    }
    std::stable_sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });

    const double n_img = static_cast<double>(images.size());
    const double n_gt = static_cast<double>(res.counts.num_gt);
    res.curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < pool.size();) {
        const double s = pool[i].score;
        for (; i < pool.size() && pool[i].score == s; ++i) {
            (pool[i].tp ? tp : fp) += 1;
        }
        res.curve.push_back({s, static_cast<double>(fp) / n_img, 1.0 - static_cast<double>(tp) / n_gt});
    }
    res.counts.num_tp = tp;
    res.counts.num_fp = fp;

    const auto refs = fppi_reference_points();
    double log_sum = 0.0;
    bool all_floored = true;
    for (std::size_t r = 0; r < refs.size(); ++r) {
        double miss = 1.0;
        for (const auto& pt : res.curve) {
            if (pt.fppi <= refs[r]) {
                miss = std::min(miss, pt.miss_rate);
            }
        }
        res.reference_miss[r] = miss;
        all_floored = all_floored && miss <= kMissFloor;
        log_sum += std::log(std::max(miss, kMissFloor));
    }
    res.mr2 = all_floored ? 0.0 : std::exp(log_sum / static_cast<double>(refs.size()));
    return res;
}

}  // namespace occdet
