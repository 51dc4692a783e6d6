#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace occdet {

/// Central finite differences of a scalar function at x.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double step = 1e-5);

/// |a - n| / max(|a|, |n|, floor). Entries whose magnitude is below `floor`
/// are judged on absolute error scaled by 1/floor.
double relative_error(double analytic, double numeric, double floor = 1e-4);

struct GradCheckSummary {
    double cls = 0.0;
    double box = 0.0;
    double sign = 0.0;
    int instances = 0;
};

/// Runs `instances` random checks per loss (cls, box over sigma in {1,3,5}
/// and eta in {1,2,3} covering both SmoothL1 branches, sign) and reports the
/// maximum relative error each.
GradCheckSummary check_loss_gradients(std::uint64_t seed, int instances = 100);

}  // namespace occdet
