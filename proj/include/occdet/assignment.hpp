#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "occdet/decay.hpp"
#include "occdet/geometry.hpp"

namespace occdet {

enum class SampleLabel { Negative, Positive };

struct AssignmentConfig {
    DecaySpec decay = DecaySpec::sigmoid(8.0, 0.5);
    double threshold = 0.5;

    /// Throws std::invalid_argument unless threshold is in (0,1).
    void validate() const;
};

struct AssignmentRecord {
    std::size_t roi_index = 0;
    std::optional<std::size_t> matched_gt;
    double iou_ori = 0.0;
    double vis_ratio = 0.0;
    double iou_vis = 0.0;
    SampleLabel label = SampleLabel::Negative;

    bool positive() const { return label == SampleLabel::Positive; }
};

/// Labels every RoI with the visible IoU against its best-overlapping GT.
///
/// The match is the GT maximizing plain IoU (lowest index on ties); the
/// visible-ratio decay then scales that IoU and the result is compared with
/// the threshold. RoIs overlapping no GT stay unmatched and negative.
std::vector<AssignmentRecord> assign(std::span<const Box> rois, std::span<const GroundTruth> gts,
                                     const AssignmentConfig& cfg);

struct DistributionRow {
    double vis_ratio = 0.0;
    double iou_ori = 0.0;
    bool kept_decay = false;
    bool kept_baseline = false;
};

/// Joins decayed and baseline (decay = none) assignments of the same RoIs
/// into one row per RoI. Throws std::invalid_argument on length mismatch.
std::vector<DistributionRow> distribution_dump(std::span<const AssignmentRecord> records,
                                               std::span<const AssignmentRecord> baseline);

/// Header `vis_ratio,iou_ori,kept_decay,kept_baseline`, booleans as 0/1.
void write_distribution_csv(std::ostream& os, std::span<const DistributionRow> rows);

}  // namespace occdet
