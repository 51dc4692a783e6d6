#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "occdet/assignment.hpp"
#include "occdet/boxcodec.hpp"
#include "occdet/losses.hpp"
#include "occdet/synth.hpp"

namespace occdet {

/// Each head moves by lr / L per epoch, where L bounds the curvature of that
/// head's loss on the training features. Any lr in (0, 2) is a descent step.
struct OptimizerConfig {
    double lr = 1.0;
    int epochs = 1500;
    std::uint64_t seed = 0;
};

/// Per-RoI feature vector, in this order:
///   bias; RoI center and size over image size (4); noisy IoU and visible
///   ratio against the matched GT (2); noisy regression-target cues (4);
///   pure Gaussian noise channels.
/// All channels but the bias are whitened on the training split.
struct FeatureConfig {
    double image_width = 640.0;
    double image_height = 480.0;
    double overlap_noise = 0.5;
    double cue_noise = 0.05;
    int noise_channels = 4;

    std::size_t dimension() const { return 11 + static_cast<std::size_t>(noise_channels); }
};

struct TrainConfig {
    LossConfig loss;
    AssignmentConfig assign;
    OptimizerConfig opt;
    FeatureConfig features;

    void validate() const;
};

/// Training failure; `epoch` is -1 when the failure precedes training.
class TrainError : public std::runtime_error {
public:
    TrainError(const std::string& what, int epoch) : std::runtime_error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

/// One RoI ready for the head: features, label and (for positives) targets.
struct Sample {
    std::size_t scene = 0;
    Box roi;
    std::vector<double> features;
    bool positive = false;
    BoxDeltas target;
    SignTargets signs;
};

/// Builds samples for every RoI of every scene. Feature noise is drawn from
/// `seed`, scene by scene, so the result is deterministic.
std::vector<Sample> build_samples(std::span<const Scene> scenes, const TrainConfig& cfg);

/// Three independent linear maps from the feature vector to class logits
/// (2), box deltas (4) and sign logits (4x2). Row-major weights.
class ToyHead {
public:
    ToyHead() = default;
    ToyHead(std::size_t dim, std::uint64_t seed);

    std::size_t dimension() const { return dim_; }

    ClassLogits class_logits(std::span<const double> x) const;
    BoxDeltas deltas(std::span<const double> x) const;
    SignLogits sign_logits(std::span<const double> x) const;

    std::vector<double>& cls_weights() { return cls_; }
    std::vector<double>& reg_weights() { return reg_; }
    std::vector<double>& sign_weights() { return sign_; }
    const std::vector<double>& cls_weights() const { return cls_; }
    const std::vector<double>& reg_weights() const { return reg_; }
    const std::vector<double>& sign_weights() const { return sign_; }

    bool finite() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> cls_;   // 2 x dim
    std::vector<double> reg_;   // 4 x dim
    std::vector<double> sign_;  // 8 x dim
};

struct EpochLosses {
    double cls = 0.0;
    double box = 0.0;
    double sign = 0.0;
    double total = 0.0;

    friend bool operator==(const EpochLosses&, const EpochLosses&) = default;
};

struct TrainReport {
    std::vector<EpochLosses> epochs;
    std::size_t train_positives = 0;
    std::size_t holdout_positives = 0;
    /// Mean over held-out positives and dimensions of |t - t*|.
    double loc_error = 0.0;
    /// Same with each delta refined by the sign head.
    double loc_error_refined = 0.0;
    /// Fraction of held-out (positive, dimension) pairs whose more likely
    /// sign matches the target sign.
    double sign_accuracy = 0.0;
    /// Reasonable-subset MR on the held-out scenes: RoIs scored by the class
    /// head, decoded, clipped, NMS at 0.5.
    double mr2 = 1.0;
    double mr2_refined = 1.0;

    friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct TrainResult {
    ToyHead head;
    TrainReport report;
};

/// Full-batch gradient descent on cls + box + sign loss over the training
/// split (all scenes but the last 20%), evaluated on the held-out split.
/// Throws TrainError when there are no training positives or the loss stops
/// being finite.
TrainResult train(std::span<const Scene> scenes, const TrainConfig& cfg);

/// Index of the first held-out scene: the last 20%, at least one scene.
std::size_t holdout_begin(std::size_t n_scenes);

struct AblationRow {
    std::string name;
    double sigma = 1.0;
    double eta = 1.0;
    double gamma = 0.0;
    bool refine = false;
    double loc_error = 0.0;
    double sign_accuracy = 0.0;
    double mr2 = 1.0;
};

/// Rows: baseline (gamma 0), sigma=3, sigma=5, eta=2, eta=3, +sign loss
/// (gamma from base_cfg, or 0.1 when that is 0), +sign loss & refining.
/// All rows share seeds and features.
std::vector<AblationRow> ablation(std::span<const Scene> scenes, const TrainConfig& base_cfg);

}  // namespace occdet
