// Command-line front-end: scene generation, batch evaluation, pose
// recovery, loss auditing, gradient checking and Monte-Carlo IoU.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>
#include <vector>

#include "geopose/config.hpp"
#include "geopose/losses.hpp"
#include "geopose/metrics.hpp"
#include "geopose/rng.hpp"
#include "geopose/scene_io.hpp"
#include "geopose/solver.hpp"
#include "geopose/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace geopose;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    const unsigned n_workers = std::min<std::size_t>(jobs, count);
    for (unsigned w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(count);
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

Config load_config_or_default(const std::string& path) {
    if (path.empty()) return Config::defaults();
    return load_config(path);
}

Vec3 random_size_for(ShapeKind shape, Rng& rng) {
    switch (shape) {
        case ShapeKind::box:
            return Vec3(rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.4));
        case ShapeKind::cylinder: {
            const double d = rng.uniform(0.08, 0.25);
            return Vec3(d, rng.uniform(0.1, 0.35), d);
        }
        case ShapeKind::laptop:
            return Vec3(rng.uniform(0.28, 0.4), rng.uniform(0.2, 0.3), rng.uniform(0.2, 0.3));
    }
    throw InvalidArgument("random_size_for: bad shape");
}

struct GenOptions {
    std::string out_dir;
    int count = 100;
    std::uint64_t seed = 0;
    std::vector<std::string> shapes = {"box"};
    int n_points = 1028;
    double noise_sigma = 0.0;
    double outlier_fraction = 0.0;
    std::vector<double> fixed_size;
    bool with_votes = false;
    unsigned jobs = 1;
};

int cmd_gen(const GenOptions& opt, const Config& config) {
    std::vector<ShapeKind> shapes;
    for (const auto& name : opt.shapes) shapes.push_back(parse_shape(name));
    if (shapes.empty()) throw InvalidArgument("gen: at least one shape required");
    if (opt.count <= 0) throw InvalidArgument("gen: --n must be positive");
    if (!opt.fixed_size.empty() && opt.fixed_size.size() != 3)
        throw InvalidArgument("gen: --size needs exactly three values");

    fs::create_directories(opt.out_dir);

    json params;
    params["count"] = opt.count;
    params["seed"] = opt.seed;
    params["shapes"] = opt.shapes;
    params["n_points"] = opt.n_points;
    params["noise_sigma"] = opt.noise_sigma;
    params["outlier_fraction"] = opt.outlier_fraction;
    params["fixed_size"] = opt.fixed_size;
    params["config"] = config_to_json(config);
    const std::string hash = content_hash(params);

    std::vector<std::string> files(static_cast<std::size_t>(opt.count));
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(opt.count));

    parallel_for(static_cast<std::size_t>(opt.count), opt.jobs, [&](std::size_t i) {
        SceneSpec spec;
        spec.shape = shapes[i % shapes.size()];
        spec.seed = mix_seed(opt.seed, i);
        spec.n_points = opt.n_points;
        spec.noise_sigma = opt.noise_sigma;
        spec.outlier_fraction = opt.outlier_fraction;
        if (!opt.fixed_size.empty()) {
            spec.size = Vec3(opt.fixed_size[0], opt.fixed_size[1], opt.fixed_size[2]);
        } else {
            Rng size_rng(mix_seed(spec.seed, 0xabcdULL));
            spec.size = random_size_for(spec.shape, size_rng);
        }
        const Scene scene = generate_scene(spec);

        char name[64];
        std::snprintf(name, sizeof(name), "scene_%05zu.json", i);
        files[i] = name;
        seeds[i] = spec.seed;
        if (opt.with_votes) {
            const FaceVoteSet votes = ground_truth_votes(scene);
            save_scene(scene, fs::path(opt.out_dir) / name, true, &votes);
        } else {
            save_scene(scene, fs::path(opt.out_dir) / name);
        }
    });

    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["kind"] = "manifest";
    manifest["tool_version"] = kToolVersion;
    manifest["config_hash"] = hash;
    manifest["seed"] = opt.seed;
    manifest["count"] = opt.count;
    manifest["files"] = files;
    manifest["seeds"] = seeds;
    atomic_write(fs::path(opt.out_dir) / "manifest.json", manifest.dump(2));

    std::cout << "wrote " << opt.count << " scenes to " << opt.out_dir << " (hash " << hash
              << ")\n";
    return kExitOk;
}

struct SceneResult {
    std::uint64_t seed = 0;
    double rot_err_deg = 0.0;
    double trans_err_m = 0.0;
    double size_err_m = 0.0;
    double iou = 0.0;
    double box_rot_err_deg = 0.0;
    double box_center_err_m = 0.0;
    double box_extent_err_m = 0.0;
    bool refined = false;
    double refined_rot_err_deg = 0.0;
    double refined_trans_err_m = 0.0;
};

json result_to_json(const std::string& id, const SceneResult& r) {
    json j;
    j["id"] = id;
    j["seed"] = r.seed;
    j["rot_err_deg"] = r.rot_err_deg;
    j["trans_err_m"] = r.trans_err_m;
    j["size_err_m"] = r.size_err_m;
    j["iou"] = r.iou;
    j["box_rot_err_deg"] = r.box_rot_err_deg;
    j["box_center_err_m"] = r.box_center_err_m;
    j["box_extent_err_m"] = r.box_extent_err_m;
    if (r.refined) {
        j["refined_rot_err_deg"] = r.refined_rot_err_deg;
        j["refined_trans_err_m"] = r.refined_trans_err_m;
    }
    return j;
}

struct EvalOptions {
    std::string scene_dir;
    std::string out_report;
    std::string out_csv;
    std::string noise_profile = "none";
    std::uint64_t seed = 0;
    std::int64_t iou_samples = 200000;
    bool refine = false;
    bool use_box_pose = false;
    bool print_json = false;
    unsigned jobs = 1;
};

std::vector<fs::path> list_scene_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (fs::is_regular_file(dir)) {
        files.push_back(dir);
        return files;
    }
    if (!fs::is_directory(dir)) throw InvalidArgument("scene path does not exist: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name.ends_with(".json") && name.starts_with("scene_")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw InvalidArgument("no scene_*.json files found in " + dir.string());
    return files;
}

int cmd_eval(const EvalOptions& opt, const Config& config) {
    const std::vector<fs::path> files = list_scene_files(opt.scene_dir);
    const NoiseSpec& noise = config.profile(opt.noise_profile);

    std::vector<SceneResult> results(files.size());
    parallel_for(files.size(), opt.jobs, [&](std::size_t i) {
        const Scene scene = load_scene(files[i]);
        PredictionBundle bundle = exact_bundle(scene, config.loss.k1, config.loss.k2);
        if (!noise.is_zero())
            bundle = corrupt_bundle(bundle, scene, noise, mix_seed(opt.seed, scene.spec.seed),
                                    config.loss.k1, config.loss.k2);

        SceneResult& r = results[i];
        r.seed = scene.spec.seed;
        const SymmetrySpec& sym = scene.prior.symmetry();

        Pose direct = recover_pose(bundle, scene.cloud, scene.prior);
        const RecoveredBox box = recover_box_from_votes(bundle, scene.cloud);
        const Pose box_pose(box.axes, box.center, box.extents.cwiseMax(1e-9));

        r.box_rot_err_deg = rotation_error_deg(box.axes, scene.gt.rotation(), sym);
        r.box_center_err_m = (box.center - scene.gt.translation()).norm();
        r.box_extent_err_m = (box.extents - scene.gt.size()).cwiseAbs().maxCoeff();

        Pose headline = opt.use_box_pose ? box_pose : direct;
        if (opt.refine) {
            const FacePlanes planes = fit_face_planes(bundle, scene.cloud);
            RefineConfig rc = config.refine;
            const RefineResult refined =
                refine_pose(headline, scene.cloud, planes, rc, scene.visible_faces);
            r.refined = true;
            r.refined_rot_err_deg =
                rotation_error_deg(refined.pose.rotation(), scene.gt.rotation(), sym);
            r.refined_trans_err_m =
                (refined.pose.translation() - scene.gt.translation()).norm();
            headline = refined.pose;
        }

        r.rot_err_deg = rotation_error_deg(headline.rotation(), scene.gt.rotation(), sym);
        r.trans_err_m = (headline.translation() - scene.gt.translation()).norm();
        r.size_err_m = (headline.size() - scene.gt.size()).cwiseAbs().maxCoeff();

        const Pose aligned_gt = align_symmetric_gt(headline, scene.gt, sym);
        r.iou = iou_3d(headline, aligned_gt, opt.iou_samples, mix_seed(opt.seed, 0x10u ^ i)).value;
    });

    const auto fraction = [&](const std::function<bool(const SceneResult&)>& pred) {
        std::size_t hits = 0;
        for (const auto& r : results)
            if (pred(r)) ++hits;
        return static_cast<double>(hits) / static_cast<double>(results.size());
    };

    json aggregate;
    for (double thresh : {0.25, 0.5, 0.75}) {
        char key[16];
        std::snprintf(key, sizeof(key), "iou_%02d", static_cast<int>(thresh * 100));
        aggregate[key] = fraction([&](const SceneResult& r) { return r.iou >= thresh; });
    }
    const std::array<std::pair<double, double>, 4> pose_thresholds = {
        {{5.0, 2.0}, {5.0, 5.0}, {10.0, 5.0}, {10.0, 10.0}}};
    for (const auto& [deg, cm] : pose_thresholds) {
        char key[24];
        std::snprintf(key, sizeof(key), "acc_%ddeg_%dcm", static_cast<int>(deg),
                      static_cast<int>(cm));
        aggregate[key] = fraction([&](const SceneResult& r) {
            return r.rot_err_deg < deg && r.trans_err_m * 100.0 < cm;
        });
    }

    json report;
    report["format_version"] = kFormatVersion;
    report["kind"] = "report";
    report["tool_version"] = kToolVersion;
    report["config_hash"] = content_hash(config_to_json(config));
    report["seed"] = opt.seed;
    report["noise_profile"] = opt.noise_profile;
    report["iou_samples"] = opt.iou_samples;
    report["use_box_pose"] = opt.use_box_pose;
    report["aggregate"] = aggregate;
    json rows = json::array();
    for (std::size_t i = 0; i < results.size(); ++i)
        rows.push_back(result_to_json(files[i].filename().string(), results[i]));
    report["per_scene"] = std::move(rows);

    if (!opt.out_report.empty()) atomic_write(opt.out_report, report.dump(2));

    if (!opt.out_csv.empty()) {
        std::string csv =
            "scene_id,seed,rot_err_deg,trans_err_m,size_err_m,iou,box_rot_err_deg,"
            "box_center_err_m,box_extent_err_m\n";
        char line[512];
        for (std::size_t i = 0; i < results.size(); ++i) {
            const SceneResult& r = results[i];
            std::snprintf(line, sizeof(line), "%s,%llu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                          files[i].filename().string().c_str(),
                          static_cast<unsigned long long>(r.seed), r.rot_err_deg, r.trans_err_m,
                          r.size_err_m, r.iou, r.box_rot_err_deg, r.box_center_err_m,
                          r.box_extent_err_m);
            csv += line;
        }
        atomic_write(opt.out_csv, csv);
    }

    if (opt.print_json) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::cout << "scenes: " << results.size() << "  profile: " << opt.noise_profile << "\n";
        for (const auto& [key, value] : aggregate.items())
            std::cout << "  " << key << ": " << value.get<double>() << "\n";
    }
    return kExitOk;
}

int cmd_recover(const std::string& scene_path, const std::string& profile_name,
                std::uint64_t seed, bool print_json, const Config& config) {
    const Scene scene = load_scene(scene_path);
    PredictionBundle bundle = exact_bundle(scene, config.loss.k1, config.loss.k2);
    const NoiseSpec& noise = config.profile(profile_name);
    if (!noise.is_zero())
        bundle = corrupt_bundle(bundle, scene, noise, mix_seed(seed, scene.spec.seed),
                                config.loss.k1, config.loss.k2);

    const Pose pose = recover_pose(bundle, scene.cloud, scene.prior);
    const RecoveredBox box = recover_box_from_votes(bundle, scene.cloud);
    const SymmetrySpec& sym = scene.prior.symmetry();

    json out;
    out["pose"] = pose_to_json(pose);
    out["box"] = {{"center", {box.center.x(), box.center.y(), box.center.z()}},
                  {"extents", {box.extents.x(), box.extents.y(), box.extents.z()}}};
    out["rot_err_deg"] = rotation_error_deg(pose.rotation(), scene.gt.rotation(), sym);
    out["trans_err_m"] = (pose.translation() - scene.gt.translation()).norm();
    if (print_json) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "rotation error:    " << out["rot_err_deg"].get<double>() << " deg\n"
                  << "translation error: " << out["trans_err_m"].get<double>() << " m\n"
                  << "box center error:  " << (box.center - scene.gt.translation()).norm()
                  << " m\n";
    }
    return kExitOk;
}

int cmd_audit_loss(const std::string& scene_path, const std::string& pose_override,
                   const std::string& profile_name, std::uint64_t seed, bool print_json,
                   const Config& config) {
    const Scene scene = load_scene(scene_path);
    PredictionBundle bundle = exact_bundle(scene, config.loss.k1, config.loss.k2);
    const NoiseSpec& noise = config.profile(profile_name);
    if (!noise.is_zero())
        bundle = corrupt_bundle(bundle, scene, noise, mix_seed(seed, scene.spec.seed),
                                config.loss.k1, config.loss.k2);

    Pose pose = scene.gt;
    if (!pose_override.empty()) {
        json j;
        try {
            j = json::parse(pose_override);
        } catch (const json::exception& e) {
            throw InvalidArgument(std::string("audit-loss: bad --pose json: ") + e.what());
        }
        pose = pose_from_json(j);
    }

    const FacePlanes planes = fit_face_planes(bundle, scene.cloud);
    TotalLossInputs inputs;
    inputs.cloud = &scene.cloud;
    inputs.reconstruction = &bundle.reconstruction;
    inputs.rotation = &bundle.rotation;
    inputs.votes = &bundle.votes;
    inputs.planes = &planes;
    inputs.pred = &pose;
    inputs.gt = &scene.gt;
    inputs.symmetry = scene.prior.symmetry();
    inputs.visible = scene.visible_faces;

    const LossBreakdown terms = total_loss(inputs, config.loss);

    if (print_json) {
        json out;
        out["basic_rot_conf"] = terms.basic_rot_conf;
        out["basic_sym"] = terms.basic_sym;
        out["basic_vote_conf"] = terms.basic_vote_conf;
        out["pc_rt"] = terms.pc_rt;
        out["pc_s"] = terms.pc_s;
        out["bb_r"] = terms.bb_r;
        out["bb_t"] = terms.bb_t;
        out["bb_s"] = terms.bb_s;
        out["total"] = terms.total;
        std::cout << out.dump(2) << "\n";
    } else {
        std::printf("basic_rot_conf  %.9g\n", terms.basic_rot_conf);
        std::printf("basic_sym       %.9g\n", terms.basic_sym);
        std::printf("basic_vote_conf %.9g\n", terms.basic_vote_conf);
        std::printf("pc_rt           %.9g\n", terms.pc_rt);
        std::printf("pc_s            %.9g\n", terms.pc_s);
        std::printf("bb_r            %.9g\n", terms.bb_r);
        std::printf("bb_t            %.9g\n", terms.bb_t);
        std::printf("bb_s            %.9g\n", terms.bb_s);
        std::printf("total           %.9g\n", terms.total);
    }
    return kExitOk;
}

struct GradCheckOptions {
    double eps = 1e-5;
    int points = 50;
    std::uint64_t seed = 7;
    bool inject_bug = false;  // negative-control hook used by tests
};

// Random pose near gt whose residuals sit safely away from every L1 kink.
Pose smooth_perturbed_pose(const Scene& scene, const FacePlanes& planes, Rng& rng) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        PoseTangent step;
        Vec3 axis(rng.normal(), rng.normal(), rng.normal());
        if (axis.norm() < 1e-9) continue;
        step.rot = axis.normalized() * rng.uniform(0.03, 0.15);
        step.trans = Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.02;
        step.size = Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.01;
        Pose pose = scene.gt;
        try {
            pose = retract(scene.gt, step);
        } catch (const InvalidArgument&) {
            continue;
        }

        const double guard = 2e-4;
        bool smooth = true;
        const Mat3 rt = pose.rotation().transpose();
        for (std::size_t i = 0; i < scene.cloud.size() && smooth; ++i) {
            const Vec3 u =
                rt * (scene.cloud.points()[i] - pose.translation()) - scene.cloud.canonical()[i];
            if (u.cwiseAbs().minCoeff() < guard) smooth = false;
        }
        for (int a = 0; a < 3 && smooth; ++a) {
            const PlaneParams& pos = planes.at(face_from_axis(a, true));
            const PlaneParams& neg = planes.at(face_from_axis(a, false));
            const double gp = pos.signed_distance(pose.translation());
            const double gn = neg.signed_distance(pose.translation());
            if (std::abs(gp) < guard || std::abs(gn) < guard ||
                std::abs(std::abs(gp) - std::abs(gn)) < guard)
                smooth = false;
        }
        for (FaceId f : kAllFaces) {
            if (!smooth) break;
            const PlaneParams& plane = planes.at(f);
            const double gd = plane.signed_distance(pose.translation());
            if (std::abs(pose.size()[face_axis(f)] / 2.0 - std::abs(gd)) < guard) smooth = false;
        }
        for (int k = 0; k < 3 && smooth; ++k) {
            if (std::abs(pose.rotation().col(0)[k] - planes.at(FaceId::x_pos).N[k]) < guard)
                smooth = false;
            if (std::abs(pose.rotation().col(1)[k] - planes.at(FaceId::y_pos).N[k]) < guard)
                smooth = false;
        }
        if (smooth) return pose;
    }
    throw DegenerateInput("gradcheck: could not find a smooth evaluation point");
}

int cmd_gradcheck(const GradCheckOptions& opt, const Config& config) {
    if (!(opt.eps > 0.0)) throw InvalidArgument("gradcheck: --eps must be positive");
    if (opt.points <= 0) throw InvalidArgument("gradcheck: --points must be positive");

    SceneSpec spec;
    spec.shape = ShapeKind::box;
    spec.size = Vec3(0.3, 0.22, 0.26);
    spec.n_points = 256;
    spec.seed = opt.seed;
    const Scene scene = generate_scene(spec);
    const PredictionBundle bundle = exact_bundle(scene, config.loss.k1, config.loss.k2);
    const FacePlanes planes = fit_face_planes(bundle, scene.cloud);

    const double bug = opt.inject_bug ? 1.01 : 1.0;

    struct Entry {
        const char* name;
        std::function<double(const Pose&)> value;
        std::function<PoseTangent(const Pose&)> grad;
    };
    std::vector<Entry> entries;
    entries.push_back({"pc_rt", [&](const Pose& p) { return pc_pose_loss(scene.cloud, p); },
                       [&, bug](const Pose& p) { return pc_pose_loss_grad(scene.cloud, p).scaled(bug); }});
    entries.push_back({"bb_r", [&](const Pose& p) { return bb_pose_loss(p, planes).bb_r; },
                       [&](const Pose& p) { return bb_pose_loss_grad(p, planes).bb_r; }});
    entries.push_back({"bb_t", [&](const Pose& p) { return bb_pose_loss(p, planes).bb_t; },
                       [&](const Pose& p) { return bb_pose_loss_grad(p, planes).bb_t; }});
    entries.push_back({"bb_s", [&](const Pose& p) { return bb_pose_loss(p, planes).bb_s; },
                       [&](const Pose& p) { return bb_pose_loss_grad(p, planes).bb_s; }});

    const FaceSelection selection = make_face_selection(
        scene.cloud, scene.gt, scene.visible_faces, config.loss.score, config.loss.bin_cap,
        config.loss.bin_seed);
    entries.push_back(
        {"pc_s",
         [&](const Pose& p) {
             return pc_size_loss_with_selection(scene.cloud, selection, p, config.loss.score);
         },
         [&](const Pose& p) {
             return pc_size_loss_grad_with_selection(scene.cloud, selection, p,
                                                     config.loss.score);
         }});

    Rng rng(mix_seed(opt.seed, 0xc0ffee));
    bool all_ok = true;
    std::printf("%-8s %-14s %s\n", "loss", "max_rel_err", "status");
    for (const auto& entry : entries) {
        double worst = 0.0;
        int used = 0;
        for (int k = 0; k < opt.points; ++k) {
            const Pose at = smooth_perturbed_pose(scene, planes, rng);
            const GradCheckResult res = grad_check(entry.value, entry.grad, at, opt.eps);
            if (res.nonsmooth) continue;  // resampled point landed on a kink
            worst = std::max(worst, res.max_rel_error);
            ++used;
        }
        const bool ok = used > 0 && worst < 1e-3;
        all_ok = all_ok && ok;
        std::printf("%-8s %-14.3e %s (%d/%d smooth points)\n", entry.name, worst,
                    ok ? "pass" : "FAIL", used, opt.points);
    }
    return all_ok ? kExitOk : kExitRuntime;
}

int cmd_iou(const std::string& box_a, const std::string& box_b, std::int64_t samples,
            std::uint64_t seed, bool print_json) {
    Pose a = Pose::identity(Vec3::Ones());
    Pose b = a;
    try {
        a = pose_from_json(json::parse(box_a));
        b = pose_from_json(json::parse(box_b));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("iou: bad box json: ") + e.what());
    }
    const IouEstimate est = iou_3d(a, b, samples, seed);
    if (print_json) {
        std::cout << json{{"iou", est.value}, {"std_error", est.std_error}}.dump() << "\n";
    } else {
        std::printf("iou %.6f (std error %.2e, %lld samples)\n", est.value, est.std_error,
                    static_cast<long long>(samples));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometric pose-estimation toolkit: synthetic scenes, voting-based box "
                 "recovery, consistency losses and evaluation metrics"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    app.add_option("--config", config_path, "JSON config file (defaults used when omitted)");
    app.add_option("--seed", seed, "global seed");
    app.add_option("--jobs", jobs, "worker threads for batch commands");

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate synthetic scene files");
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
    gen_cmd->add_option("--n", gen.count, "number of scenes");
    gen_cmd->add_option("--shapes", gen.shapes, "shape cycle (box, cylinder, laptop)")
        ->delimiter(',');
    gen_cmd->add_option("--n-points", gen.n_points, "points per scene");
    gen_cmd->add_option("--noise-sigma", gen.noise_sigma, "point noise sigma (m)");
    gen_cmd->add_option("--outlier-fraction", gen.outlier_fraction, "outlier point fraction");
    gen_cmd->add_option("--size", gen.fixed_size, "fixed extents x y z (m)")->expected(3);
    gen_cmd->add_flag("--with-votes", gen.with_votes, "embed ground-truth votes");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate recovery over a scene directory");
    eval_cmd->add_option("--scenes", eval.scene_dir, "scene directory or single file")
        ->required();
    eval_cmd->add_option("--out", eval.out_report, "report JSON path");
    eval_cmd->add_option("--csv", eval.out_csv, "per-scene CSV path");
    eval_cmd->add_option("--noise-profile", eval.noise_profile, "noise profile name");
    eval_cmd->add_option("--iou-samples", eval.iou_samples, "Monte-Carlo samples per IoU");
    eval_cmd->add_flag("--refine", eval.refine, "run local refinement");
    eval_cmd->add_flag("--use-box-pose", eval.use_box_pose,
                       "evaluate the vote-derived box pose instead of the direct pose");
    eval_cmd->add_flag("--json", eval.print_json, "print the report to stdout");

    std::string scene_path;
    std::string profile = "none";
    bool as_json = false;
    auto* recover_cmd = app.add_subcommand("recover", "recover the pose of one scene");
    recover_cmd->add_option("--scene", scene_path, "scene file")->required();
    recover_cmd->add_option("--noise-profile", profile, "noise profile name");
    recover_cmd->add_flag("--json", as_json, "machine-readable output");

    std::string audit_scene;
    std::string audit_pose;
    std::string audit_profile = "none";
    bool audit_json = false;
    auto* audit_cmd = app.add_subcommand("audit-loss", "print the loss breakdown for a scene");
    audit_cmd->add_option("--scene", audit_scene, "scene file")->required();
    audit_cmd->add_option("--pose", audit_pose, "inline pose json {R,t,s} (default: gt)");
    audit_cmd->add_option("--noise-profile", audit_profile, "noise profile name");
    audit_cmd->add_flag("--json", audit_json, "machine-readable output");

    GradCheckOptions gc;
    auto* gc_cmd = app.add_subcommand("gradcheck", "verify analytic gradients");
    gc_cmd->add_option("--eps", gc.eps, "finite-difference step");
    gc_cmd->add_option("--points", gc.points, "smooth evaluation points per loss");
    gc_cmd->add_flag("--inject-gradient-bug", gc.inject_bug,
                     "negative control: perturb one gradient");

    std::string iou_a;
    std::string iou_b;
    std::int64_t iou_samples = 1000000;
    bool iou_json = false;
    auto* iou_cmd = app.add_subcommand("iou", "Monte-Carlo IoU of two oriented boxes");
    iou_cmd->add_option("--box-a", iou_a, "pose json {R,t,s}")->required();
    iou_cmd->add_option("--box-b", iou_b, "pose json {R,t,s}")->required();
    iou_cmd->add_option("--samples", iou_samples, "Monte-Carlo samples");
    iou_cmd->add_flag("--json", iou_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);

    try {
        const Config config = load_config_or_default(config_path);
        gen.seed = seed;
        gen.jobs = jobs;
        eval.seed = seed;
        eval.jobs = jobs;
        gc.seed = seed != 0 ? seed : gc.seed;

        if (*gen_cmd) return cmd_gen(gen, config);
        if (*eval_cmd) return cmd_eval(eval, config);
        if (*recover_cmd) return cmd_recover(scene_path, profile, seed, as_json, config);
        if (*audit_cmd)
            return cmd_audit_loss(audit_scene, audit_pose, audit_profile, seed, audit_json,
                                  config);
        if (*gc_cmd) return cmd_gradcheck(gc, config);
        if (*iou_cmd) return cmd_iou(iou_a, iou_b, iou_samples, seed, iou_json);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
