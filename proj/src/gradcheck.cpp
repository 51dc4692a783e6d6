#include "occdet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "occdet/losses.hpp"
#include "occdet/rng.hpp"

namespace occdet {

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double step)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double up = f(x);
        x[i] = orig - step;
        const double down = f(x);
        x[i] = orig;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

double relative_error(double analytic, double numeric, double floor)
{
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

namespace {

constexpr double kStep = 1e-5;

double max_error(const std::vector<double>& analytic, const std::vector<double>& numeric)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        worst = std::max(worst, relative_error(analytic[i], numeric[i]));
    }
    return worst;
}

double check_cls(Rng& rng)
{
    const auto n = static_cast<std::size_t>(rng.integer(1, 6));
    std::vector<double> x(2 * n);
    std::vector<ClassLabel> labels(n);
    for (auto& v : x) {
        v = rng.uniform(-4.0, 4.0);
    }
    for (auto& l : labels) {
        l = rng.bernoulli(0.5) ? ClassLabel::Pedestrian : ClassLabel::Background;
    }
    auto unpack = [n](const std::vector<double>& v) {
        std::vector<ClassLogits> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = {v[2 * i], v[2 * i + 1]};
        }
        return out;
    };
    const auto res = cls_loss(unpack(x), labels);
    std::vector<double> analytic;
    for (const auto& g : res.grad) {
        analytic.insert(analytic.end(), g.begin(), g.end());
    }
    const auto numeric = numeric_gradient([&](const std::vector<double>& v) { return cls_loss(unpack(v), labels).loss; },
                                          x, kStep);
    return max_error(analytic, numeric);
}

double check_box(Rng& rng, int instance)
{
    static constexpr double kSigmas[] = {1.0, 3.0, 5.0};
    static constexpr double kEtas[] = {1.0, 2.0, 3.0};
    LossConfig cfg;
    cfg.sigma = kSigmas[instance % 3];
    cfg.eta = kEtas[(instance / 3) % 3];
    const double knee = 1.0 / (cfg.sigma * cfg.sigma);

    const auto n = static_cast<std::size_t>(rng.integer(1, 4));
    std::vector<double> x(4 * n);
    std::vector<BoxDeltas> target(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            target[i][k] = rng.uniform(-1.0, 1.0);
            // Half the residuals inside the quadratic zone, half outside;
            // keep clear of the knee where a central difference straddles it.
            double diff = 0.0;
            do {
                diff = rng.bernoulli(0.5) ? rng.uniform(-knee, knee) : rng.uniform(-3.0 * knee - 1.0, 3.0 * knee + 1.0);
            } while (std::abs(std::abs(diff) - knee) < 10.0 * kStep);
            x[4 * i + k] = target[i][k] + diff;
        }
    }
    auto unpack = [n](const std::vector<double>& v) {
        std::vector<BoxDeltas> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < 4; ++k) {
                out[i][k] = v[4 * i + k];
            }
        }
        return out;
    };
    const auto res = box_loss(unpack(x), target, n, cfg);
    std::vector<double> analytic;
    for (const auto& g : res.grad) {
        analytic.insert(analytic.end(), g.t.begin(), g.t.end());
    }
    const auto numeric = numeric_gradient(
        [&](const std::vector<double>& v) { return box_loss(unpack(v), target, n, cfg).loss; }, x, kStep);
    return max_error(analytic, numeric);
}

double check_sign(Rng& rng)
{
    LossConfig cfg;
    cfg.gamma = rng.uniform(0.05, 2.0);
    const auto n = static_cast<std::size_t>(rng.integer(1, 4));
    std::vector<double> x(8 * n);
    std::vector<SignTargets> targets(n);
    for (auto& v : x) {
        v = rng.uniform(-4.0, 4.0);
    }
    for (auto& t : targets) {
        for (auto& s : t.s) {
            s = rng.bernoulli(0.5) ? Sign::Pos : Sign::Neg;
        }
    }
    auto unpack = [n](const std::vector<double>& v) {
        std::vector<SignLogits> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < 4; ++k) {
                out[i][k] = {v[8 * i + 2 * k], v[8 * i + 2 * k + 1]};
            }
        }
        return out;
    };
    const auto res = sign_loss(unpack(x), targets, n, cfg);
    std::vector<double> analytic;
    for (const auto& g : res.grad) {
        for (const auto& row : g) {
            analytic.insert(analytic.end(), row.begin(), row.end());
        }
    }
    const auto numeric = numeric_gradient(
        [&](const std::vector<double>& v) { return sign_loss(unpack(v), targets, n, cfg).loss; }, x, kStep);
    return max_error(analytic, numeric);
}

}  // namespace

GradCheckSummary check_loss_gradients(std::uint64_t seed, int instances)
{
    Rng rng(seed);
    GradCheckSummary s;
    s.instances = instances;
    for (int i = 0; i < instances; ++i) {
        s.cls = std::max(s.cls, check_cls(rng));
        s.box = std::max(s.box, check_box(rng, i));
        s.sign = std::max(s.sign, check_sign(rng));
    }
    return s;
}

}  // namespace occdet
