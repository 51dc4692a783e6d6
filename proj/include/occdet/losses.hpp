#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "occdet/boxcodec.hpp"

namespace occdet {

enum class ClassLabel { Background, Pedestrian };

/// Two-way class scores (background, pedestrian) before softmax.
using ClassLogits = std::array<double, 2>;

/// Per-dimension (minus, plus) scores before softmax, dimensions x,y,w,h.
using SignLogits = std::array<std::array<double, 2>, 4>;

/// Per-dimension direction distribution (s-, s+), each row summing to 1.
struct SignProbs {
    std::array<std::array<double, 2>, 4> p{};

    double minus(std::size_t k) const { return p[k][0]; }
    double plus(std::size_t k) const { return p[k][1]; }

    static SignProbs uniform();
    bool valid(double tol = 1e-9) const;
};

SignProbs softmax(const SignLogits& logits);

struct LossConfig {
    double gamma = 0.1;  ///< sign-loss weight
    double sigma = 1.0;  ///< SmoothL1 sigma
    double eta = 1.0;    ///< box-loss weight

    void validate() const;
};

template <typename Grad>
struct LossAndGrad {
    double loss = 0.0;
    std::vector<Grad> grad;
};

/// Mean softmax cross-entropy; gradient is (softmax - onehot) / N.
/// Throws std::invalid_argument on empty or mismatched input.
LossAndGrad<ClassLogits> cls_loss(std::span<const ClassLogits> logits, std::span<const ClassLabel> labels);

/// 0.5 (sigma x)^2 for |x| < 1/sigma^2, |x| - 0.5/sigma^2 otherwise.
double smooth_l1(double x, double sigma);
double smooth_l1_grad(double x, double sigma);

/// eta / n_reg * sum over samples and dims of SmoothL1(pred - target).
/// Throws on empty input, length mismatch or n_reg == 0.
LossAndGrad<BoxDeltas> box_loss(std::span<const BoxDeltas> pred, std::span<const BoxDeltas> target,
                                std::size_t n_reg, const LossConfig& cfg);

/// gamma / n_reg * sum over samples and dims of -log(prob of target sign),
/// with the gradient taken on the pre-softmax logits. Returns zero loss and
/// zero gradients when n_reg == 0.
LossAndGrad<SignLogits> sign_loss(std::span<const SignLogits> logits, std::span<const SignTargets> targets,
                                  std::size_t n_reg, const LossConfig& cfg);

/// Loss-only form on probabilities; a zero probability on a target sign
/// gives +inf.
double sign_loss(std::span<const SignProbs> probs, std::span<const SignTargets> targets, std::size_t n_reg,
                 const LossConfig& cfg);

double total_loss(double cls, double box, double sign);

/// Scales each delta by the probability of its own direction.
BoxDeltas refine(const BoxDeltas& d, const SignProbs& p);

}  // namespace occdet
