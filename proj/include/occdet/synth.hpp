#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "occdet/geometry.hpp"
#include "occdet/nms.hpp"

namespace occdet {

/// Crowded-scene generator settings. Pedestrian heights are drawn
/// log-uniformly from [min_height, max_height]; full boxes are snapped to
/// integer pixels.
struct SceneConfig {
    std::uint64_t seed = 0;
    int min_peds = 4;
    int max_peds = 12;
    double image_width = 640.0;
    double image_height = 480.0;
    double min_height = 40.0;
    double max_height = 200.0;
    double aspect_ratio = 0.41;
    /// Probability that a pedestrian is placed next to an earlier one. At 0
    /// placements never overlap.
    double overlap_intensity = 0.5;
    int rois_per_gt = 8;
    int negative_rois = 16;
    /// Std of RoI center jitter as a fraction of box size; also the std of
    /// the log size jitter.
    double roi_jitter = 0.15;
    /// Log-std of a per-RoI factor on roi_jitter, so proposal quality varies
    /// from tight to loose. 0 gives a single jitter scale.
    double jitter_spread = 0.75;

    void validate() const;
};

struct Scene {
    std::string image_id;
    std::vector<GroundTruth> gts;
    std::vector<Box> rois;

    friend bool operator==(const Scene&, const Scene&) = default;
};

/// Later pedestrians are nearer and occlude earlier ones. Each GT's visible
/// box bounds what is left of its full box after removing every nearer full
/// box, and vis_area is the exact remaining area.
std::vector<Scene> generate(const SceneConfig& cfg, int n_scenes);

/// Piecewise-linear map from occlusion to miss probability, clamped at the
/// end knots.
class MissCurve {
public:
    MissCurve() = default;
    explicit MissCurve(std::vector<std::pair<double, double>> knots);
    static MissCurve constant(double p);

    double operator()(double occlusion) const;

private:
    std::vector<std::pair<double, double>> knots_{{0.0, 0.0}, {1.0, 0.0}};
};

struct DetectionSimConfig {
    std::uint64_t seed = 0;
    /// Std of box jitter as a fraction of GT size; also spreads scores.
    double noise = 0.1;
    MissCurve miss;
    double fp_per_image = 1.0;
};

struct DetectionSet {
    std::string image_id;
    std::vector<Detection> dets;

    friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

/// One jittered detection per GT unless missed (probability from the
/// occlusion curve), plus false positives. Scores grow with IoU to the GT.
/// Draws are keyed on (seed, image_id) so a scene's result does not depend on
/// which other scenes are simulated.
DetectionSet simulate_detections(const Scene& scene, const DetectionSimConfig& cfg);

}  // namespace occdet
