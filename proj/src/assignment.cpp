#include "occdet/assignment.hpp"

#include <ostream>
#include <stdexcept>

namespace occdet {

void AssignmentConfig::validate() const
{
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("assignment threshold must be in (0,1)");
    }
}

std::vector<AssignmentRecord> assign(std::span<const Box> rois, std::span<const GroundTruth> gts,
                                     const AssignmentConfig& cfg)
{
    cfg.validate();
    std::vector<AssignmentRecord> out;
    out.reserve(rois.size());
    for (std::size_t r = 0; r < rois.size(); ++r) {
        AssignmentRecord rec;
        rec.roi_index = r;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double o = iou(rois[r], gts[g].full);
            if (o > rec.iou_ori) {
                rec.iou_ori = o;
                rec.matched_gt = g;
            }
        }
        if (rec.matched_gt) {
            rec.vis_ratio = vis_ratio(rois[r], gts[*rec.matched_gt]);
            rec.iou_vis = rec.iou_ori * eval_decay(cfg.decay, rec.vis_ratio);
        }
        rec.label = rec.iou_vis >= cfg.threshold ? SampleLabel::Positive : SampleLabel::Negative;
        out.push_back(rec);
    }
    return out;
}

std::vector<DistributionRow> distribution_dump(std::span<const AssignmentRecord> records,
                                               std::span<const AssignmentRecord> baseline)
{
    if (records.size() != baseline.size()) {
        throw std::invalid_argument("distribution_dump: decayed and baseline record counts differ");
    }
    std::vector<DistributionRow> rows;
    rows.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        rows.push_back({records[i].vis_ratio, records[i].iou_ori, records[i].positive(), baseline[i].positive()});
    }
    return rows;
}

void write_distribution_csv(std::ostream& os, std::span<const DistributionRow> rows)
{
    const auto old_precision = os.precision(17);
    os << "vis_ratio,iou_ori,kept_decay,kept_baseline\n";
    for (const auto& row : rows) {
        os << row.vis_ratio << ',' << row.iou_ori << ',' << (row.kept_decay ? 1 : 0) << ','
           << (row.kept_baseline ? 1 : 0) << '\n';
    }
    os.precision(old_precision);
}

}  // namespace occdet
