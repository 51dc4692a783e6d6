#include "occdet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace occdet {

namespace {

// Numerically stable two-way softmax; returns (p0, p1) and log(p0), log(p1).
struct Softmax2 {
    std::array<double, 2> p;
    std::array<double, 2> logp;
};

Softmax2 softmax2(double a, double b)
{
    const double m = std::max(a, b);
    const double lse = m + std::log(std::exp(a - m) + std::exp(b - m));
    Softmax2 s;
    s.logp = {a - lse, b - lse};
    s.p = {std::exp(s.logp[0]), std::exp(s.logp[1])};
    return s;
}

}  // namespace

SignProbs SignProbs::uniform()
{
    SignProbs p;
    for (auto& row : p.p) {
        row = {0.5, 0.5};
    }
    return p;
}

bool SignProbs::valid(double tol) const
{
    return std::all_of(p.begin(), p.end(), [tol](const auto& row) {
        return row[0] >= 0.0 && row[0] <= 1.0 && row[1] >= 0.0 && row[1] <= 1.0 &&
               std::abs(row[0] + row[1] - 1.0) <= tol;
    });
}

SignProbs softmax(const SignLogits& logits)
{
    SignProbs out;
    for (std::size_t k = 0; k < 4; ++k) {
        out.p[k] = softmax2(logits[k][0], logits[k][1]).p;
    }
    return out;
}

void LossConfig::validate() const
{
    if (!(gamma >= 0.0 && std::isfinite(gamma))) {
        throw std::invalid_argument("gamma must be finite and >= 0");
    }
    if (!(sigma > 0.0 && std::isfinite(sigma))) {
        throw std::invalid_argument("sigma must be finite and > 0");
    }
    if (!(eta > 0.0 && std::isfinite(eta))) {
        throw std::invalid_argument("eta must be finite and > 0");
    }
}

LossAndGrad<ClassLogits> cls_loss(std::span<const ClassLogits> logits, std::span<const ClassLabel> labels)
{
    if (logits.empty()) {
        throw std::invalid_argument("cls_loss: empty sample set");
    }
    if (logits.size() != labels.size()) {
        throw std::invalid_argument("cls_loss: logits and labels differ in length");
    }
    const double n = static_cast<double>(logits.size());
    LossAndGrad<ClassLogits> out;
    out.grad.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const auto s = softmax2(logits[i][0], logits[i][1]);
        const std::size_t y = labels[i] == ClassLabel::Pedestrian ? 1 : 0;
        out.loss -= s.logp[y];
        out.grad[i] = {s.p[0] / n, s.p[1] / n};
        out.grad[i][y] -= 1.0 / n;
    }
    out.loss /= n;
    return out;
}

double smooth_l1(double x, double sigma)
{
    const double s2 = sigma * sigma;
    const double ax = std::abs(x);
    if (ax < 1.0 / s2) {
        return 0.5 * s2 * x * x;
    }
    return ax - 0.5 / s2;
}

double smooth_l1_grad(double x, double sigma)
{
    const double s2 = sigma * sigma;
    if (std::abs(x) < 1.0 / s2) {
        return s2 * x;
    }
    return x > 0.0 ? 1.0 : -1.0;
}

LossAndGrad<BoxDeltas> box_loss(std::span<const BoxDeltas> pred, std::span<const BoxDeltas> target,
                                std::size_t n_reg, const LossConfig& cfg)
{
    cfg.validate();
    if (pred.empty()) {
        throw std::invalid_argument("box_loss: empty input");
    }
    if (pred.size() != target.size()) {
        throw std::invalid_argument("box_loss: pred and target differ in length");
    }
    if (n_reg == 0) {
        throw std::invalid_argument("box_loss: n_reg must be >= 1");
    }
    const double scale = cfg.eta / static_cast<double>(n_reg);
    LossAndGrad<BoxDeltas> out;
    out.grad.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            const double diff = pred[i][k] - target[i][k];
            out.loss += smooth_l1(diff, cfg.sigma);
            out.grad[i][k] = scale * smooth_l1_grad(diff, cfg.sigma);
        }
    }
    out.loss *= scale;
    return out;
}

LossAndGrad<SignLogits> sign_loss(std::span<const SignLogits> logits, std::span<const SignTargets> targets,
                                  std::size_t n_reg, const LossConfig& cfg)
{
    cfg.validate();
    if (logits.size() != targets.size()) {
        throw std::invalid_argument("sign_loss: logits and targets differ in length");
    }
    LossAndGrad<SignLogits> out;
    out.grad.assign(logits.size(), SignLogits{});
    if (n_reg == 0) {
        return out;
    }
    const double scale = cfg.gamma / static_cast<double>(n_reg);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto s = softmax2(logits[i][k][0], logits[i][k][1]);
            const std::size_t y = targets[i][k] == Sign::Pos ? 1 : 0;
            out.loss -= s.logp[y];
            out.grad[i][k] = {scale * s.p[0], scale * s.p[1]};
            out.grad[i][k][y] -= scale;
        }
    }
    out.loss *= scale;
    return out;
}

double sign_loss(std::span<const SignProbs> probs, std::span<const SignTargets> targets, std::size_t n_reg,
                 const LossConfig& cfg)
{
    cfg.validate();
    if (probs.size() != targets.size()) {
        throw std::invalid_argument("sign_loss: probs and targets differ in length");
    }
    if (n_reg == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            const double p = targets[i][k] == Sign::Pos ? probs[i].plus(k) : probs[i].minus(k);
            sum -= p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
        }
    }
    return cfg.gamma / static_cast<double>(n_reg) * sum;
}

double total_loss(double cls, double box, double sign)
{
    return cls + box + sign;
}

BoxDeltas refine(const BoxDeltas& d, const SignProbs& p)
{
    BoxDeltas out;
    for (std::size_t k = 0; k < 4; ++k) {
        out[k] = d[k] <= 0.0 ? d[k] * p.minus(k) : d[k] * p.plus(k);
    }
    return out;
}

}  // namespace occdet
