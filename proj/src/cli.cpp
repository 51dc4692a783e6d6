#include "occdet/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "occdet/assignment.hpp"
#include "occdet/evalmr.hpp"
#include "occdet/gradcheck.hpp"
#include "occdet/io.hpp"
#include "occdet/losses.hpp"
#include "occdet/nms.hpp"
#include "occdet/synth.hpp"
#include "occdet/trainer.hpp"

namespace occdet {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kGradTolerance = 1e-5;

/// Thrown for flag values that parse but are out of range.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    return out;
}

DecaySpec parse_decay(const std::string& text)
{
    try {
        return DecaySpec::parse(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::string fmt(double v, int precision = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string sci(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct GenOptions {
    SceneConfig scene;
    int n_scenes = 0;
    std::string out;
    std::string dets_out;
    DetectionSimConfig sim;
    double miss_clear = 0.05;
    double miss_occluded = 0.8;
};

struct AssignOptions {
    std::string decay = "sigmoid:8,0.5";
    double threshold = 0.5;
    std::string scenes;
    std::string out;
};

struct TrainOptions {
    std::string scenes;
    std::string decay = "sigmoid:8,0.5";
    double threshold = 0.5;
    double gamma = 0.1;
    double sigma = 1.0;
    double eta = 1.0;
    TrainConfig cfg;
    std::string out;
};

void add_train_flags(CLI::App* cmd, TrainOptions& o)
{
    cmd->add_option("--scenes", o.scenes, "Scenes JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--decay", o.decay, "Decay spec: none | sigmoid:B,A | ramp:X1,X2 | cosine")->capture_default_str();
    cmd->add_option("--threshold", o.threshold, "Visible IoU threshold")->capture_default_str();
    cmd->add_option("--gamma", o.gamma, "Sign-loss weight")->capture_default_str();
    cmd->add_option("--sigma", o.sigma, "SmoothL1 sigma")->capture_default_str();
    cmd->add_option("--eta", o.eta, "Box-loss weight")->capture_default_str();
    cmd->add_option("--epochs", o.cfg.opt.epochs, "Gradient-descent epochs")->capture_default_str();
    cmd->add_option("--lr", o.cfg.opt.lr, "Step size relative to each head's curvature bound, in (0,2)")->capture_default_str();
    cmd->add_option("--seed", o.cfg.opt.seed, "Seed for features and initialization")->capture_default_str();
    cmd->add_option("--width", o.cfg.features.image_width, "Image width")->capture_default_str();
    cmd->add_option("--height", o.cfg.features.image_height, "Image height")->capture_default_str();
    cmd->add_option("--cue-noise", o.cfg.features.cue_noise, "Std of regression-cue noise")->capture_default_str();
    cmd->add_option("--overlap-noise", o.cfg.features.overlap_noise, "Std of IoU/visible-ratio cue noise")
        ->capture_default_str();
    cmd->add_option("--noise-channels", o.cfg.features.noise_channels, "Pure-noise feature channels")
        ->capture_default_str();
}

TrainConfig finish_train_config(const TrainOptions& o)
{
    TrainConfig cfg = o.cfg;
    cfg.assign.decay = parse_decay(o.decay);
    cfg.assign.threshold = o.threshold;
    cfg.loss.gamma = o.gamma;
    cfg.loss.sigma = o.sigma;
    cfg.loss.eta = o.eta;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

int cmd_gen(const GenOptions& o, std::ostream& out)
{
    if (o.n_scenes < 0) {
        throw UsageError("--scenes must be >= 0");
    }
    std::vector<Scene> scenes;
    try {
        scenes = generate(o.scene, o.n_scenes);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    {
        auto f = open_output(o.out);
        write_scenes(f, scenes);
    }
    std::size_t n_gt = 0;
    std::size_t n_roi = 0;
    for (const auto& s : scenes) {
        n_gt += s.gts.size();
        n_roi += s.rois.size();
    }
    out << "scenes " << scenes.size() << " gts " << n_gt << " rois " << n_roi << '\n';

    if (!o.dets_out.empty()) {
        DetectionSimConfig sim = o.sim;
        try {
            sim.miss = MissCurve({{0.0, o.miss_clear}, {1.0, o.miss_occluded}});
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        std::vector<DetectionSet> sets;
        for (const auto& s : scenes) {
            sets.push_back(simulate_detections(s, sim));
        }
        auto f = open_output(o.dets_out);
        write_detections(f, sets);
        std::size_t n_det = 0;
        for (const auto& d : sets) {
            n_det += d.dets.size();
        }
        out << "detections " << n_det << '\n';
    }
    return kExitOk;
}

int cmd_assign(const AssignOptions& o, std::ostream& out)
{
    AssignmentConfig cfg{parse_decay(o.decay), o.threshold};
    AssignmentConfig base{DecaySpec::none(), o.threshold};
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto scenes = read_scenes_file(o.scenes);
    std::vector<DistributionRow> rows;
    std::size_t pos_decay = 0;
    std::size_t pos_base = 0;
    for (const auto& s : scenes) {
        const auto decayed = assign(s.rois, s.gts, cfg);
        const auto baseline = assign(s.rois, s.gts, base);
        for (const auto& r : distribution_dump(decayed, baseline)) {
            pos_decay += r.kept_decay ? 1 : 0;
            pos_base += r.kept_baseline ? 1 : 0;
            rows.push_back(r);
        }
    }
    if (!o.out.empty()) {
        auto f = open_output(o.out);
        write_distribution_csv(f, rows);
    }
    out << "decay " << cfg.decay.to_string() << " threshold " << fmt(cfg.threshold, 3) << '\n'
        << "rois " << rows.size() << " positives_decay " << pos_decay << " positives_baseline " << pos_base << '\n';
    return kExitOk;
}

int cmd_check_grad(std::uint64_t seed, int instances, std::ostream& out)
{
    if (instances < 1) {
        throw UsageError("--instances must be >= 1");
    }
    const auto s = check_loss_gradients(seed, instances);
    const auto line = [&](const char* name, double e) {
        out << name << " max_rel_err " << sci(e) << (e < kGradTolerance ? " ok" : " FAIL") << '\n';
    };
    out << "instances " << s.instances << " step 1e-05 tolerance " << sci(kGradTolerance) << '\n';
    line("cls", s.cls);
    line("box", s.box);
    line("sign", s.sign);
    const bool ok = s.cls < kGradTolerance && s.box < kGradTolerance && s.sign < kGradTolerance;
    return ok ? kExitOk : kExitData;
}

ojson report_json(const TrainReport& r, const TrainConfig& cfg)
{
    ojson j;
    j["decay"] = cfg.assign.decay.to_string();
    j["threshold"] = cfg.assign.threshold;
    j["gamma"] = cfg.loss.gamma;
    j["sigma"] = cfg.loss.sigma;
    j["eta"] = cfg.loss.eta;
    j["lr"] = cfg.opt.lr;
    j["epochs"] = cfg.opt.epochs;
    j["seed"] = cfg.opt.seed;
    j["train_positives"] = r.train_positives;
    j["holdout_positives"] = r.holdout_positives;
    j["loc_error"] = r.loc_error;
    j["loc_error_refined"] = r.loc_error_refined;
    j["sign_accuracy"] = r.sign_accuracy;
    j["mr2"] = r.mr2;
    j["mr2_refined"] = r.mr2_refined;
    ojson epochs = ojson::array();
    for (const auto& e : r.epochs) {
        epochs.push_back({{"cls", e.cls}, {"box", e.box}, {"sign", e.sign}, {"total", e.total}});
    }
    j["epoch_losses"] = std::move(epochs);
    return j;
}

int cmd_train(const TrainOptions& o, std::ostream& out)
{
    const TrainConfig cfg = finish_train_config(o);
    const auto scenes = read_scenes_file(o.scenes);
    const TrainReport r = train(scenes, cfg).report;
    if (!o.out.empty()) {
        auto f = open_output(o.out);
        f << report_json(r, cfg).dump(2) << '\n';
    }
    const auto& last = r.epochs.back();
    out << "final cls " << fmt(last.cls) << " box " << fmt(last.box) << " sign " << fmt(last.sign) << " total "
        << fmt(last.total) << '\n'
        << "loc_error " << fmt(r.loc_error) << " refined " << fmt(r.loc_error_refined) << " sign_accuracy "
        << fmt(r.sign_accuracy, 4) << '\n'
        << "mr2 " << fmt(100.0 * r.mr2, 2) << "% refined " << fmt(100.0 * r.mr2_refined, 2) << "%\n";
    return kExitOk;
}

int cmd_ablate(const TrainOptions& o, std::ostream& out)
{
    const TrainConfig cfg = finish_train_config(o);
    const auto scenes = read_scenes_file(o.scenes);
    const auto rows = ablation(scenes, cfg);
    std::ostringstream csv;
    csv << "row,sigma,eta,gamma,refine,loc_error,sign_accuracy,mr2\n";
    for (const auto& r : rows) {
        csv << r.name << ',' << fmt(r.sigma, 1) << ',' << fmt(r.eta, 1) << ',' << fmt(r.gamma, 3) << ','
            << (r.refine ? 1 : 0) << ',' << fmt(r.loc_error, 9) << ',' << fmt(r.sign_accuracy, 6) << ','
            << fmt(r.mr2, 6) << '\n';
    }
    if (!o.out.empty()) {
        auto f = open_output(o.out);
        f << csv.str();
    }
    out << csv.str();
    return kExitOk;
}

int cmd_nms(const std::string& in, const std::string& out_path, double thresh, std::ostream& out)
{
    if (!(thresh > 0.0 && thresh < 1.0)) {
        throw UsageError("--thresh must be in (0,1)");
    }
    auto sets = read_detections_file(in);
    std::stable_sort(sets.begin(), sets.end(),
                     [](const DetectionSet& a, const DetectionSet& b) { return a.image_id < b.image_id; });
    std::size_t before = 0;
    std::size_t after = 0;
    for (auto& s : sets) {
        before += s.dets.size();
        s.dets = nms(s.dets, thresh);
        after += s.dets.size();
    }
    auto f = open_output(out_path);
    write_detections(f, sets);
    out << "images " << sets.size() << " detections " << before << " kept " << after << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& dets_path, const std::string& gts_path, const std::string& subset, double match_iou,
             std::ostream& out)
{
    if (!(match_iou > 0.0 && match_iou <= 1.0)) {
        throw UsageError("--match-iou must be in (0,1]");
    }
    std::vector<SubsetSpec> subsets;
    if (subset == "all") {
        subsets = {SubsetSpec::reasonable(), SubsetSpec::heavy(), SubsetSpec::partial(), SubsetSpec::bare()};
    } else {
        try {
            subsets = {SubsetSpec::by_name(subset)};
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }

    const auto scenes = read_scenes_file(gts_path);
    const auto sets = read_detections_file(dets_path);
    std::map<std::string, const DetectionSet*> by_id;
    for (const auto& s : sets) {
        if (!by_id.emplace(s.image_id, &s).second) {
            throw DataError("duplicate detections for image '" + s.image_id + "'");
        }
    }
    std::map<std::string, const Scene*> scene_by_id;
    for (const auto& s : scenes) {
        if (!scene_by_id.emplace(s.image_id, &s).second) {
            throw DataError("duplicate scene '" + s.image_id + "'");
        }
    }
    for (const auto& [id, _] : by_id) {
        if (!scene_by_id.contains(id)) {
            throw DataError("detections for unknown image '" + id + "'");
        }
    }
    if (scene_by_id.empty()) {
        throw DataError("no scenes in '" + gts_path + "'");
    }

    std::string header;
    std::string values;
    std::ostringstream details;
    for (const auto& spec : subsets) {
        std::vector<ImageMatch> matches;
        for (const auto& [id, scene] : scene_by_id) {
            const auto it = by_id.find(id);
            const std::vector<Detection> empty;
            const auto& dets = it == by_id.end() ? empty : it->second->dets;
            matches.push_back(match_detections(dets, scene->gts, spec, match_iou));
        }
        char col[32];
        std::string name = spec.name;
        name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
        std::snprintf(col, sizeof col, "%12s", name.c_str());
        header += col;
        std::size_t n_gt = 0;
        for (const auto& m : matches) {
            n_gt += m.num_evaluated_gt();
        }
        if (n_gt == 0) {
            std::snprintf(col, sizeof col, "%12s", "-");
            values += col;
            details << spec.name << ": no ground truth in subset\n";
            continue;
        }
        const EvalResult r = mr2(matches);
        std::snprintf(col, sizeof col, "%12.2f", 100.0 * r.mr2);
        values += col;
        details << spec.name << ": images " << r.counts.num_images << " gt " << r.counts.num_gt << " det "
                << r.counts.num_det << " tp " << r.counts.num_tp << " fp " << r.counts.num_fp << " mr2 "
                << fmt(r.mr2, 6) << '\n';
    }
    out << "MR-2 (%)\n" << header << '\n' << values << '\n' << details.str();
    return kExitOk;
}

int cmd_refine(const std::string& in_path, const std::string& out_path, std::ostream& out)
{
    std::ifstream in(in_path);
    if (!in) {
        throw DataError("cannot open '" + in_path + "'");
    }
    std::ostringstream buf;
    std::string line;
    std::size_t lineno = 0;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = "line " + std::to_string(lineno) + ": ";
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const ojson::parse_error& e) {
            throw DataError(where + "invalid JSON");
        }
        if (!j.is_object() || !j.contains("deltas") || !j.contains("sign_probs")) {
            throw DataError(where + "expected fields 'deltas' and 'sign_probs'");
        }
        const auto& jd = j["deltas"];
        const auto& jp = j["sign_probs"];
        if (!jd.is_array() || jd.size() != 4 || !jp.is_array() || jp.size() != 4) {
            throw DataError(where + "deltas must be [tx,ty,tw,th] and sign_probs four [s-,s+] pairs");
        }
        BoxDeltas d;
        SignProbs p;
        for (std::size_t k = 0; k < 4; ++k) {
            if (!jd[k].is_number() || !jp[k].is_array() || jp[k].size() != 2 || !jp[k][0].is_number() ||
                !jp[k][1].is_number()) {
                throw DataError(where + "non-numeric delta or probability");
            }
            d[k] = jd[k].get<double>();
            p.p[k] = {jp[k][0].get<double>(), jp[k][1].get<double>()};
        }
        if (!d.finite()) {
            throw DataError(where + "non-finite delta");
        }
        if (!p.valid(1e-6)) {
            throw DataError(where + "each sign_probs pair must lie in [0,1] and sum to 1");
        }
        const BoxDeltas r = refine(d, p);
        j["refined"] = ojson::array({r[0], r[1], r[2], r[3]});
        buf << j.dump() << '\n';
        ++count;
    }
    auto f = open_output(out_path);
    f << buf.str();
    out << "refined " << count << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Occlusion-aware sample assignment, sign refinement and MR-2 evaluation"};
    app.name("occdet");
    app.require_subcommand(1);

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate crowded synthetic scenes (JSONL)");
    gen_cmd->add_option("--seed", gen.scene.seed, "Seed")->capture_default_str();
    gen_cmd->add_option("--scenes", gen.n_scenes, "Number of scenes")->required();
    gen_cmd->add_option("--out", gen.out, "Output scenes JSONL")->required();
    gen_cmd->add_option("--min-peds", gen.scene.min_peds)->capture_default_str();
    gen_cmd->add_option("--max-peds", gen.scene.max_peds)->capture_default_str();
    gen_cmd->add_option("--width", gen.scene.image_width)->capture_default_str();
    gen_cmd->add_option("--height", gen.scene.image_height)->capture_default_str();
    gen_cmd->add_option("--min-height", gen.scene.min_height)->capture_default_str();
    gen_cmd->add_option("--max-height", gen.scene.max_height)->capture_default_str();
    gen_cmd->add_option("--aspect", gen.scene.aspect_ratio, "Width/height of a pedestrian box")->capture_default_str();
    gen_cmd->add_option("--overlap", gen.scene.overlap_intensity, "Crowding in [0,1]")->capture_default_str();
    gen_cmd->add_option("--rois-per-gt", gen.scene.rois_per_gt)->capture_default_str();
    gen_cmd->add_option("--negatives", gen.scene.negative_rois, "Uniform random RoIs per scene")->capture_default_str();
    gen_cmd->add_option("--jitter", gen.scene.roi_jitter, "RoI jitter std (fraction of size)")->capture_default_str();
    gen_cmd->add_option("--jitter-spread", gen.scene.jitter_spread, "Log-std of per-RoI jitter scale")
        ->capture_default_str();
    gen_cmd->add_option("--dets-out", gen.dets_out, "Also write simulated detections here");
    gen_cmd->add_option("--det-noise", gen.sim.noise, "Detection jitter std")->capture_default_str();
    gen_cmd->add_option("--fp-per-image", gen.sim.fp_per_image)->capture_default_str();
    gen_cmd->add_option("--miss-clear", gen.miss_clear, "Miss probability at occlusion 0")->capture_default_str();
    gen_cmd->add_option("--miss-occluded", gen.miss_occluded, "Miss probability at occlusion 1")->capture_default_str();

    AssignOptions asg;
    auto* assign_cmd = app.add_subcommand("assign", "Label RoIs by visible IoU and dump the distribution CSV");
    assign_cmd->add_option("--decay", asg.decay, "Decay spec")->capture_default_str();
    assign_cmd->add_option("--threshold", asg.threshold)->capture_default_str();
    assign_cmd->add_option("--scenes", asg.scenes, "Scenes JSONL")->required()->check(CLI::ExistingFile);
    assign_cmd->add_option("--out", asg.out, "Distribution CSV");

    std::uint64_t grad_seed = 1;
    int grad_instances = 100;
    auto* grad_cmd = app.add_subcommand("check-grad", "Compare analytic loss gradients with finite differences");
    grad_cmd->add_option("--seed", grad_seed)->capture_default_str();
    grad_cmd->add_option("--instances", grad_instances)->capture_default_str();

    TrainOptions tr;
    auto* train_cmd = app.add_subcommand("train-toy", "Train the linear toy head");
    add_train_flags(train_cmd, tr);
    train_cmd->add_option("--report", tr.out, "Report JSON");

    TrainOptions ab;
    auto* ablate_cmd = app.add_subcommand("ablate", "Loss ablation table (CSV)");
    add_train_flags(ablate_cmd, ab);
    ablate_cmd->add_option("--out", ab.out, "Ablation CSV");

    std::string nms_in;
    std::string nms_out;
    double nms_thresh = 0.5;
    auto* nms_cmd = app.add_subcommand("nms", "Greedy NMS over detection JSONL");
    nms_cmd->add_option("--dets", nms_in, "Detections JSONL")->required()->check(CLI::ExistingFile);
    nms_cmd->add_option("--out", nms_out, "Output JSONL")->required();
    nms_cmd->add_option("--thresh", nms_thresh)->capture_default_str();

    std::string eval_dets;
    std::string eval_gts;
    std::string eval_subset = "all";
    double eval_iou = kDefaultMatchIou;
    auto* eval_cmd = app.add_subcommand("eval", "Log-average miss rate per subset");
    eval_cmd->add_option("--dets", eval_dets, "Detections JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--gts", eval_gts, "Scenes JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--subset", eval_subset, "reasonable | partial | bare | heavy | all")->capture_default_str();
    eval_cmd->add_option("--match-iou", eval_iou)->capture_default_str();

    std::string refine_in;
    std::string refine_out;
    auto* refine_cmd = app.add_subcommand("refine", "Scale deltas by their sign probabilities (JSONL)");
    refine_cmd->add_option("--in", refine_in, "JSONL with deltas and sign_probs")->required()->check(CLI::ExistingFile);
    refine_cmd->add_option("--out", refine_out, "Output JSONL")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "occdet: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*gen_cmd) {
            return cmd_gen(gen, out);
        }
        if (*assign_cmd) {
            return cmd_assign(asg, out);
        }
        if (*grad_cmd) {
            return cmd_check_grad(grad_seed, grad_instances, out);
        }
        if (*train_cmd) {
            return cmd_train(tr, out);
        }
        if (*ablate_cmd) {
            return cmd_ablate(ab, out);
        }
        if (*nms_cmd) {
            return cmd_nms(nms_in, nms_out, nms_thresh, out);
        }
        if (*eval_cmd) {
            return cmd_eval(eval_dets, eval_gts, eval_subset, eval_iou, out);
        }
        if (*refine_cmd) {
            return cmd_refine(refine_in, refine_out, out);
        }
    } catch (const UsageError& e) {
        err << "occdet: " << e.what() << '\n';
        return kExitUsage;
    } catch (const TrainError& e) {
        err << "occdet: training failed: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "occdet: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace occdet
