#include "occdet/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "occdet/evalmr.hpp"
#include "occdet/nms.hpp"
#include "occdet/rng.hpp"

namespace occdet {

namespace {

constexpr double kNmsThreshold = 0.5;

double dot(std::span<const double> w, std::span<const double> x)
{
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += w[i] * x[i];
    }
    return s;
}

void axpy(std::span<double> w, double a, std::span<const double> x)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        w[i] += a * x[i];
    }
}

// Affine map to zero mean and identity covariance on the training split
// (bias channel untouched), so one step size suits every row of the ablation.
struct Whitener {
    Eigen::VectorXd mean;
    Eigen::MatrixXd transform;

    void apply(std::vector<double>& x) const
    {
        const auto n = mean.size();
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data() + 1, n) - mean;
        Eigen::Map<Eigen::VectorXd>(x.data() + 1, n) = transform * v;
    }
};

Whitener fit_whitener(std::span<const Sample> samples, std::size_t dim)
{
    const auto n = static_cast<Eigen::Index>(dim - 1);
    Whitener w{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n)};
    if (samples.empty()) {
        return w;
    }
    const double count = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        w.mean += Eigen::Map<const Eigen::VectorXd>(s.features.data() + 1, n) / count;
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (const auto& s : samples) {
        const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(s.features.data() + 1, n) - w.mean;
        cov.noalias() += d * d.transpose() / count;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double floor = 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff());
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = eig.eigenvalues()[i];
        inv_sqrt[i] = e > floor ? 1.0 / std::sqrt(e) : 0.0;
    }
    w.transform = inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    return w;
}

// Largest eigenvalue of sum(x x^T) / denom over the selected samples.
double second_moment_bound(std::span<const Sample> samples, std::size_t dim, bool positives_only, double denom)
{
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& s : samples) {
        if (positives_only && !s.positive) {
            continue;
        }
        const Eigen::Map<const Eigen::VectorXd> x(s.features.data(), n);
        m.noalias() += x * x.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m / denom, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

struct StepSizes {
    double cls = 0.0;
    double reg = 0.0;
    double sign = 0.0;
};

// Each head's loss is separate, so each gets lr over its own gradient
// Lipschitz bound. Softmax cross-entropy curvature is at most 1/2 per logit
// pair; SmoothL1 is at most sigma^2.
StepSizes step_sizes(std::span<const Sample> train, std::size_t dim, std::size_t n_pos, const TrainConfig& cfg)
{
    const double all = second_moment_bound(train, dim, false, static_cast<double>(train.size()));
    const double pos = second_moment_bound(train, dim, true, static_cast<double>(n_pos));
    const LossConfig& l = cfg.loss;
    StepSizes st;
    st.cls = cfg.opt.lr / (0.5 * all);
    st.reg = cfg.opt.lr / (l.eta * l.sigma * l.sigma * pos);
    st.sign = l.gamma > 0.0 ? cfg.opt.lr / (0.5 * l.gamma * pos) : 0.0;
    return st;
}

struct Split {
    std::vector<Sample> train;
    std::vector<Sample> holdout;
};

EpochLosses step(ToyHead& head, std::span<const Sample> train, std::size_t n_pos, const TrainConfig& cfg,
                 const StepSizes& st)
{
    const std::size_t dim = head.dimension();
    std::vector<ClassLogits> cls_logits;
    std::vector<ClassLabel> labels;
    std::vector<BoxDeltas> pred;
    std::vector<BoxDeltas> targets;
    std::vector<SignLogits> sign_logits;
    std::vector<SignTargets> sign_targets_;
    cls_logits.reserve(train.size());
    labels.reserve(train.size());
    for (const auto& s : train) {
        cls_logits.push_back(head.class_logits(s.features));
        labels.push_back(s.positive ? ClassLabel::Pedestrian : ClassLabel::Background);
        if (s.positive) {
            pred.push_back(head.deltas(s.features));
            targets.push_back(s.target);
            sign_logits.push_back(head.sign_logits(s.features));
            sign_targets_.push_back(s.signs);
        }
    }

    const auto cls = cls_loss(cls_logits, labels);
    const auto box = box_loss(pred, targets, n_pos, cfg.loss);
    const auto sign = sign_loss(sign_logits, sign_targets_, n_pos, cfg.loss);
    EpochLosses losses{cls.loss, box.loss, sign.loss, total_loss(cls.loss, box.loss, sign.loss)};
    std::vector<double> g_cls(2 * dim, 0.0);
    std::vector<double> g_reg(4 * dim, 0.0);
    std::vector<double> g_sign(8 * dim, 0.0);
    std::size_t p = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const std::span<const double> x = train[i].features;
        for (std::size_t c = 0; c < 2; ++c) {
            axpy(std::span(g_cls).subspan(c * dim, dim), cls.grad[i][c], x);
        }
        if (!train[i].positive) {
            continue;
        }
        for (std::size_t k = 0; k < 4; ++k) {
            axpy(std::span(g_reg).subspan(k * dim, dim), box.grad[p][k], x);
            for (std::size_t c = 0; c < 2; ++c) {
                axpy(std::span(g_sign).subspan((2 * k + c) * dim, dim), sign.grad[p][k][c], x);
            }
        }
        ++p;
    }
    axpy(head.cls_weights(), -st.cls, g_cls);
    axpy(head.reg_weights(), -st.reg, g_reg);
    axpy(head.sign_weights(), -st.sign, g_sign);
    return losses;
}

double holdout_mr2(const ToyHead& head, std::span<const Scene> scenes, std::span<const Sample> holdout,
                   const FeatureConfig& fc, bool refined)
{
    std::vector<ImageMatch> matches;
    std::size_t i = 0;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        std::vector<Detection> dets;
        for (; i < holdout.size() && holdout[i].scene == s; ++i) {
            const auto& x = holdout[i].features;
            const auto logits = head.class_logits(x);
            const double score = 1.0 / (1.0 + std::exp(logits[0] - logits[1]));
            BoxDeltas d = head.deltas(x);
            if (refined) {
                d = refine(d, softmax(head.sign_logits(x)));
            }
            if (!d.finite()) {
                continue;
            }
            const Box b = clip_to_image(decode(holdout[i].roi, d), fc.image_width, fc.image_height);
            if (!b.degenerate()) {
                dets.push_back({b, score});
            }
        }
        matches.push_back(match_detections(nms(dets, kNmsThreshold), scenes[s].gts, SubsetSpec::reasonable()));
    }
    std::size_t n_gt = 0;
    for (const auto& m : matches) {
        n_gt += m.num_evaluated_gt();
    }
    if (matches.empty() || n_gt == 0) {
        return 1.0;
    }
    return mr2(matches).mr2;
}

void evaluate(const ToyHead& head, std::span<const Scene> holdout_scenes, std::span<const Sample> holdout,
              const FeatureConfig& fc, TrainReport& report)
{
    double err = 0.0;
    double err_refined = 0.0;
    std::size_t correct = 0;
    std::size_t n = 0;
    for (const auto& s : holdout) {
        if (!s.positive) {
            continue;
        }
        const BoxDeltas t = head.deltas(s.features);
        const SignProbs p = softmax(head.sign_logits(s.features));
        const BoxDeltas r = refine(t, p);
        for (std::size_t k = 0; k < 4; ++k) {
            err += std::abs(t[k] - s.target[k]);
            err_refined += std::abs(r[k] - s.target[k]);
            const Sign predicted = p.plus(k) > p.minus(k) ? Sign::Pos : Sign::Neg;
            correct += predicted == s.signs[k] ? 1 : 0;
        }
        ++n;
    }
    report.holdout_positives = n;
    if (n > 0) {
        const double denom = 4.0 * static_cast<double>(n);
        report.loc_error = err / denom;
        report.loc_error_refined = err_refined / denom;
        report.sign_accuracy = static_cast<double>(correct) / denom;
    }
    report.mr2 = holdout_mr2(head, holdout_scenes, holdout, fc, false);
    report.mr2_refined = holdout_mr2(head, holdout_scenes, holdout, fc, true);
}

}  // namespace

void TrainConfig::validate() const
{
    loss.validate();
    assign.validate();
    if (!(opt.lr > 0.0 && opt.lr < 2.0)) {
        throw std::invalid_argument("learning rate must be in (0, 2)");
    }
    if (opt.epochs < 1) {
        throw std::invalid_argument("epochs must be >= 1");
    }
    if (!(features.image_width > 0.0 && features.image_height > 0.0)) {
        throw std::invalid_argument("feature image size must be positive");
    }
    if (!(features.overlap_noise >= 0.0 && features.cue_noise >= 0.0) || features.noise_channels < 0) {
        throw std::invalid_argument("feature noise settings must be >= 0");
    }
}

std::vector<Sample> build_samples(std::span<const Scene> scenes, const TrainConfig& cfg)
{
    const FeatureConfig& fc = cfg.features;
    Rng rng(cfg.opt.seed ^ 0x5EEDF00DULL);
    std::vector<Sample> out;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        const Scene& scene = scenes[s];
        const auto records = assign(scene.rois, scene.gts, cfg.assign);
        for (const auto& rec : records) {
            const Box& roi = scene.rois[rec.roi_index];
            Sample sample;
            sample.scene = s;
            sample.roi = roi;
            sample.positive = rec.positive() && !roi.degenerate();

            BoxDeltas cue{};
            if (rec.matched_gt && !roi.degenerate() && !scene.gts[*rec.matched_gt].full.degenerate()) {
                cue = encode(roi, scene.gts[*rec.matched_gt].full);
            }
            if (sample.positive) {
                sample.target = cue;
                sample.signs = sign_targets(cue);
            }

            auto& x = sample.features;
            x.reserve(fc.dimension());
            x.push_back(1.0);
            x.push_back(roi.center_x() / fc.image_width);
            x.push_back(roi.center_y() / fc.image_height);
            x.push_back(roi.width() / fc.image_width);
            x.push_back(roi.height() / fc.image_height);
            x.push_back(rec.iou_ori + rng.normal(0.0, fc.overlap_noise));
            x.push_back(rec.vis_ratio + rng.normal(0.0, fc.overlap_noise));
            for (std::size_t k = 0; k < 4; ++k) {
                x.push_back(cue[k] + rng.normal(0.0, fc.cue_noise));
            }
            for (int c = 0; c < fc.noise_channels; ++c) {
                x.push_back(rng.normal());
            }
            out.push_back(std::move(sample));
        }
    }
    return out;
}

ToyHead::ToyHead(std::size_t dim, std::uint64_t seed) : dim_(dim), cls_(2 * dim), reg_(4 * dim), sign_(8 * dim)
{
    Rng rng(seed);
    for (auto* w : {&cls_, &reg_, &sign_}) {
        for (double& v : *w) {
            v = rng.normal(0.0, 0.01);
        }
    }
}

ClassLogits ToyHead::class_logits(std::span<const double> x) const
{
    return {dot(std::span(cls_).subspan(0, dim_), x), dot(std::span(cls_).subspan(dim_, dim_), x)};
}

BoxDeltas ToyHead::deltas(std::span<const double> x) const
{
    BoxDeltas d;
    for (std::size_t k = 0; k < 4; ++k) {
        d[k] = dot(std::span(reg_).subspan(k * dim_, dim_), x);
    }
    return d;
}

SignLogits ToyHead::sign_logits(std::span<const double> x) const
{
    SignLogits l;
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t c = 0; c < 2; ++c) {
            l[k][c] = dot(std::span(sign_).subspan((2 * k + c) * dim_, dim_), x);
        }
    }
    return l;
}

bool ToyHead::finite() const
{
    const auto ok = [](const std::vector<double>& w) {
        return std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); });
    };
    return ok(cls_) && ok(reg_) && ok(sign_);
}

std::size_t holdout_begin(std::size_t n_scenes)
{
    return n_scenes == 0 ? 0 : n_scenes - std::max<std::size_t>(1, n_scenes / 5);
}

TrainResult train(std::span<const Scene> scenes, const TrainConfig& cfg)
{
    cfg.validate();
    if (scenes.size() < 2) {
        throw TrainError("need at least two scenes for a train/held-out split", -1);
    }
    const std::size_t split = holdout_begin(scenes.size());
    std::vector<Sample> samples = build_samples(scenes, cfg);

    Split data;
    for (auto& s : samples) {
        (s.scene < split ? data.train : data.holdout).push_back(std::move(s));
    }
    for (auto& s : data.holdout) {
        s.scene -= split;
    }
    const std::size_t n_pos =
        static_cast<std::size_t>(std::count_if(data.train.begin(), data.train.end(), [](const Sample& s) { return s.positive; }));
    if (n_pos == 0) {
        throw TrainError("no positive samples in the training split", -1);
    }

    const std::size_t dim = cfg.features.dimension();
    const Whitener white = fit_whitener(data.train, dim);
    for (auto& s : data.train) {
        white.apply(s.features);
    }
    for (auto& s : data.holdout) {
        white.apply(s.features);
    }

    const StepSizes st = step_sizes(data.train, dim, n_pos, cfg);
    TrainResult result{ToyHead(dim, cfg.opt.seed), {}};
    result.report.train_positives = n_pos;
    for (int epoch = 0; epoch < cfg.opt.epochs; ++epoch) {
        const EpochLosses l = step(result.head, data.train, n_pos, cfg, st);
        if (!std::isfinite(l.total) || !result.head.finite()) {
            throw TrainError("training diverged at epoch " + std::to_string(epoch), epoch);
        }
        result.report.epochs.push_back(l);
    }
    evaluate(result.head, scenes.subspan(split), data.holdout, cfg.features, result.report);
    return result;
}

std::vector<AblationRow> ablation(std::span<const Scene> scenes, const TrainConfig& base_cfg)
{
    const double gamma = base_cfg.loss.gamma > 0.0 ? base_cfg.loss.gamma : 0.1;
    struct Variant {
        const char* name;
        double sigma;
        double eta;
        double gamma;
    };
    const Variant variants[] = {
        {"baseline", 1.0, 1.0, 0.0}, {"sigma=3", 3.0, 1.0, 0.0}, {"sigma=5", 5.0, 1.0, 0.0},
        {"eta=2", 1.0, 2.0, 0.0},    {"eta=3", 1.0, 3.0, 0.0},   {"+sign loss", 1.0, 1.0, gamma},
    };

    std::vector<AblationRow> rows;
    for (const auto& v : variants) {
        TrainConfig cfg = base_cfg;
        cfg.loss.sigma = v.sigma;
        cfg.loss.eta = v.eta;
        cfg.loss.gamma = v.gamma;
        const TrainReport r = train(scenes, cfg).report;
        rows.push_back({v.name, v.sigma, v.eta, v.gamma, false, r.loc_error, r.sign_accuracy, r.mr2});
        if (v.gamma > 0.0) {
            rows.push_back({"+sign loss & refining", v.sigma, v.eta, v.gamma, true, r.loc_error_refined, r.sign_accuracy,
                            r.mr2_refined});
        }
    }
    return rows;
}

}  // namespace occdet
