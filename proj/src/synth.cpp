#include "occdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "occdet/rng.hpp"

namespace occdet {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b)
{
    // splitmix64 finalizer over the combined key
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string scene_id(int index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%05d", index);
    return buf;
}

bool overlaps_any(const Box& b, const std::vector<Box>& placed)
{
    return std::any_of(placed.begin(), placed.end(), [&](const Box& p) { return intersect_area(b, p) > 0.0; });
}

Box snapped(double x1, double y1, double w, double h)
{
    const double sx = std::round(x1);
    const double sy = std::round(y1);
    return Box{sx, sy, sx + std::max(1.0, std::round(w)), sy + std::max(1.0, std::round(h))};
}

std::vector<Box> place_pedestrians(const SceneConfig& cfg, Rng& rng)
{
    const auto n = rng.integer(cfg.min_peds, cfg.max_peds);
    const double log_lo = std::log(cfg.min_height);
    const double log_hi = std::log(std::min(cfg.max_height, cfg.image_height));
    std::vector<Box> placed;
    for (std::int64_t i = 0; i < n; ++i) {
        const double h = std::exp(rng.uniform(log_lo, std::max(log_lo, log_hi)));
        const double w = std::min(h * cfg.aspect_ratio, cfg.image_width);
        const double max_x = cfg.image_width - w;
        const double max_y = cfg.image_height - h;

        if (!placed.empty() && cfg.overlap_intensity > 0.0 && rng.bernoulli(cfg.overlap_intensity)) {
            const Box& anchor = placed[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(placed.size()) - 1))];
            const double cx = anchor.center_x() + rng.uniform(-0.8, 0.8) * 0.5 * (anchor.width() + w);
            const double bottom = anchor.y2 + rng.normal(0.0, 0.1 * h);
            placed.push_back(snapped(std::clamp(cx - 0.5 * w, 0.0, max_x), std::clamp(bottom - h, 0.0, max_y), w, h));
            continue;
        }
        // Uniform placement; without overlap intensity, retry until clear.
        for (int attempt = 0; attempt < 50; ++attempt) {
            const Box b = snapped(rng.uniform(0.0, max_x), rng.uniform(0.0, max_y), w, h);
            if (cfg.overlap_intensity > 0.0 || !overlaps_any(b, placed)) {
                placed.push_back(b);
                break;
            }
        }
    }
    for (Box& b : placed) {
        b = Box{b.x1, b.y1, std::min(b.x2, cfg.image_width), std::min(b.y2, cfg.image_height)};
    }
    return placed;
}

Box jitter_box(const Box& b, double jitter, Rng& rng)
{
    const double cx = b.center_x() + rng.normal(0.0, jitter * b.width());
    const double cy = b.center_y() + rng.normal(0.0, jitter * b.height());
    const double w = b.width() * std::exp(rng.normal(0.0, jitter));
    const double h = b.height() * std::exp(rng.normal(0.0, jitter));
    return Box{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

Box clip(const Box& b, double width, double height)
{
    Box c{std::clamp(b.x1, 0.0, width), std::clamp(b.y1, 0.0, height), std::clamp(b.x2, 0.0, width),
          std::clamp(b.y2, 0.0, height)};
    c.x2 = std::max(c.x2, c.x1);
    c.y2 = std::max(c.y2, c.y1);
    return c;
}

}  // namespace

void SceneConfig::validate() const
{
    if (min_peds < 0 || max_peds < min_peds) {
        throw std::invalid_argument("scene config: need 0 <= min_peds <= max_peds");
    }
    if (!(image_width > 0.0 && image_height > 0.0)) {
        throw std::invalid_argument("scene config: image size must be positive");
    }
    if (!(min_height >= 2.0 && max_height >= min_height)) {
        throw std::invalid_argument("scene config: need 2 <= min_height <= max_height");
    }
    if (!(min_height <= image_height)) {
        throw std::invalid_argument("scene config: min_height exceeds image height");
    }
    if (!(aspect_ratio > 0.0)) {
        throw std::invalid_argument("scene config: aspect ratio must be positive");
    }
    if (!(overlap_intensity >= 0.0 && overlap_intensity <= 1.0)) {
        throw std::invalid_argument("scene config: overlap_intensity must be in [0,1]");
    }
    if (rois_per_gt < 0 || negative_rois < 0) {
        throw std::invalid_argument("scene config: RoI counts must be >= 0");
    }
    if (!(roi_jitter >= 0.0 && std::isfinite(roi_jitter))) {
        throw std::invalid_argument("scene config: roi_jitter must be >= 0");
    }
    if (!(jitter_spread >= 0.0 && std::isfinite(jitter_spread))) {
        throw std::invalid_argument("scene config: jitter_spread must be >= 0");
    }
}

std::vector<Scene> generate(const SceneConfig& cfg, int n_scenes)
{
    cfg.validate();
    if (n_scenes < 0) {
        throw std::invalid_argument("generate: scene count must be >= 0");
    }
    std::vector<Scene> scenes;
    scenes.reserve(static_cast<std::size_t>(n_scenes));
    for (int s = 0; s < n_scenes; ++s) {
        Rng rng(mix(cfg.seed, static_cast<std::uint64_t>(s)));
        Scene scene;
        scene.image_id = scene_id(s);

        const std::vector<Box> fulls = place_pedestrians(cfg, rng);
        for (std::size_t i = 0; i < fulls.size(); ++i) {
            const std::span<const Box> nearer(fulls.data() + i + 1, fulls.size() - i - 1);
            const Residual vis = uncovered_region(fulls[i], nearer);
            scene.gts.push_back(GroundTruth{fulls[i], vis.bounds, vis.area});
        }

        for (const Box& full : fulls) {
            for (int r = 0; r < cfg.rois_per_gt; ++r) {
                const double scale = cfg.roi_jitter * std::exp(rng.normal(0.0, cfg.jitter_spread));
                const Box roi = clip(jitter_box(full, scale, rng), cfg.image_width, cfg.image_height);
                if (roi.width() >= 1.0 && roi.height() >= 1.0) {
                    scene.rois.push_back(roi);
                }
            }
        }
        for (int r = 0; r < cfg.negative_rois; ++r) {
            const double h = std::exp(rng.uniform(std::log(cfg.min_height), std::log(cfg.max_height)));
            const double w = h * cfg.aspect_ratio * std::exp(rng.normal(0.0, 0.2));
            const double x1 = rng.uniform(0.0, std::max(0.0, cfg.image_width - w));
            const double y1 = rng.uniform(0.0, std::max(0.0, cfg.image_height - h));
            const Box roi = clip(Box{x1, y1, x1 + w, y1 + h}, cfg.image_width, cfg.image_height);
            if (roi.width() >= 1.0 && roi.height() >= 1.0) {
                scene.rois.push_back(roi);
            }
        }
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

MissCurve::MissCurve(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots))
{
    if (knots_.empty()) {
        throw std::invalid_argument("miss curve needs at least one knot");
    }
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!(knots_[i].second >= 0.0 && knots_[i].second <= 1.0)) {
            throw std::invalid_argument("miss probabilities must be in [0,1]");
        }
        if (i > 0 && !(knots_[i].first > knots_[i - 1].first)) {
            throw std::invalid_argument("miss curve knots must be strictly increasing");
        }
    }
}

MissCurve MissCurve::constant(double p)
{
    return MissCurve({{0.0, p}});
}

double MissCurve::operator()(double occlusion) const
{
    if (occlusion <= knots_.front().first) {
        return knots_.front().second;
    }
    if (occlusion >= knots_.back().first) {
        return knots_.back().second;
    }
    const auto hi = std::upper_bound(knots_.begin(), knots_.end(), occlusion,
                                     [](double v, const auto& k) { return v < k.first; });
    const auto lo = hi - 1;
    const double t = (occlusion - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

DetectionSet simulate_detections(const Scene& scene, const DetectionSimConfig& cfg)
{
    if (!(cfg.noise >= 0.0 && cfg.fp_per_image >= 0.0)) {
        throw std::invalid_argument("simulate_detections: noise and fp rate must be >= 0");
    }
    Rng rng(mix(cfg.seed, fnv1a(scene.image_id)));
    DetectionSet out;
    out.image_id = scene.image_id;

    Box extent{0.0, 0.0, 1.0, 1.0};
    double typical_h = 1.0;
    for (const auto& gt : scene.gts) {
        extent.x2 = std::max(extent.x2, gt.full.x2);
        extent.y2 = std::max(extent.y2, gt.full.y2);
        typical_h = std::max(typical_h, gt.height());
    }
    for (const auto& r : scene.rois) {
        extent.x2 = std::max(extent.x2, r.x2);
        extent.y2 = std::max(extent.y2, r.y2);
    }

    for (const auto& gt : scene.gts) {
        const bool missed = rng.bernoulli(cfg.miss(gt.occlusion()));
        const Box det = jitter_box(gt.full, cfg.noise, rng);
        const double u = rng.uniform();
        if (missed || det.degenerate()) {
            continue;
        }
        const double overlap = iou(det, gt.full);
        const double score = std::clamp(0.3 + 0.7 * overlap - cfg.noise * u, 0.0, 1.0);
        out.dets.push_back({det, score});
    }

    const double expected = cfg.fp_per_image;
    auto n_fp = static_cast<int>(std::floor(expected));
    if (rng.bernoulli(expected - std::floor(expected))) {
        ++n_fp;
    }
    for (int i = 0; i < n_fp; ++i) {
        const double h = rng.uniform(0.3, 1.0) * std::min(typical_h, extent.y2);
        const double w = 0.41 * h;
        const double x1 = rng.uniform(0.0, std::max(0.0, extent.x2 - w));
        const double y1 = rng.uniform(0.0, std::max(0.0, extent.y2 - h));
        out.dets.push_back({Box{x1, y1, x1 + w, y1 + h}, 0.8 * rng.uniform()});
    }
    return out;
}

}  // namespace occdet
