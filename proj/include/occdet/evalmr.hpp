#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occdet/geometry.hpp"
#include "occdet/nms.hpp"

namespace occdet {

/// Evaluation subset: height > min_height and occlusion in (occ_low, occ_high].
/// A lower bound of exactly 0 is closed, so unoccluded GTs belong to it.
struct SubsetSpec {
    std::string name;
    double min_height = 50.0;
    double occ_low = 0.0;
    double occ_high = 0.35;

    static SubsetSpec reasonable();
    static SubsetSpec partial();
    static SubsetSpec bare();
    static SubsetSpec heavy();
    /// reasonable | partial | bare | heavy. Throws std::invalid_argument.
    static SubsetSpec by_name(std::string_view name);

    void validate() const;
    bool contains(const GroundTruth& gt) const;
};

struct SubsetPartition {
    std::vector<std::size_t> evaluated;
    std::vector<std::size_t> ignored;
};

SubsetPartition subset_filter(std::span<const GroundTruth> gts, const SubsetSpec& spec);

enum class MatchOutcome { TruePositive, FalsePositive, Ignored };

/// Matching result for one image. `scores` and `outcomes` are indexed like
/// the input detections.
struct ImageMatch {
    std::vector<double> scores;
    std::vector<MatchOutcome> outcomes;
    std::vector<bool> gt_evaluated;
    std::vector<bool> gt_matched;

    std::size_t num_evaluated_gt() const;
};

constexpr double kDefaultMatchIou = 0.5;

/// Greedy matching by descending score (stable on ties). Each detection takes
/// the unmatched in-subset GT of highest IoU >= match_iou (lowest index on
/// ties). Failing that, a detection overlapping an out-of-subset GT at
/// >= match_iou is ignored; anything else is a false positive.
ImageMatch match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                            const SubsetSpec& subset, double match_iou = kDefaultMatchIou);

struct FppiPoint {
    double score_threshold = 0.0;
    double fppi = 0.0;
    double miss_rate = 1.0;
};

struct EvalCounts {
    std::size_t num_images = 0;
    std::size_t num_gt = 0;
    std::size_t num_det = 0;
    std::size_t num_tp = 0;
    std::size_t num_fp = 0;
};

/// FPPI reference points 10^-2 ... 10^0, nine of them, log-spaced.
std::array<double, 9> fppi_reference_points();

/// Miss rates are floored here before taking logs.
constexpr double kMissFloor = 1e-10;

struct EvalResult {
    double mr2 = 1.0;
    std::vector<FppiPoint> curve;
    std::array<double, 9> reference_miss{};
    EvalCounts counts;
};

/// Log-average miss rate over the dataset. The curve starts at the empty
/// detector (fppi 0, miss 1) and adds one point per distinct score. At each
/// reference FPPI the lowest miss rate among points with fppi <= reference is
/// taken; MR is the geometric mean of those, 0.0 when all are zero.
/// Throws std::invalid_argument with no images or no in-subset GT.
EvalResult mr2(std::span<const ImageMatch> images);

}  // namespace occdet
