// pcu: batch CLI for the self-supervised point-cloud upsampling pipeline.
// Subcommands: sample-mesh, make-patches, train, upsample, eval, gradcheck.
// Exit code 0 on success; nonzero with a single-line "error: ..." otherwise.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcu/autodiff.hpp"
#include "pcu/config.hpp"
#include "pcu/geometry.hpp"
#include "pcu/io.hpp"
#include "pcu/loss.hpp"
#include "pcu/metrics.hpp"
#include "pcu/network.hpp"
#include "pcu/rng.hpp"
#include "pcu/training.hpp"

namespace fs = std::filesystem;
using namespace pcu;

namespace {

std::vector<Vec3> seeded_sphere_points(int n, std::uint64_t seed) {
    rng::Stream stream(rng::key(seed, 0x5EEDu));
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts) {
        Vec3 g{stream.next_normal(), stream.next_normal(), stream.next_normal()};
        double len = norm(g);
        p = len > 0.0 ? g / len : Vec3{1, 0, 0};
    }
    return pts;
}

std::string config_fingerprint(io::RunConfig cfg) {
    // Paths and the run length may legitimately differ when resuming; the
    // trajectory-determining settings must not.
    cfg.dataset_dir.clear();
    cfg.output_dir.clear();
    cfg.checkpoint_path.clear();
    cfg.train.epochs = 0;
    return io::serialize_config(cfg);
}

std::vector<PointCloud> load_dataset(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir))
        throw std::runtime_error("dataset directory not found: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".xyz") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .xyz files in " + dir.string());
    std::vector<PointCloud> models;
    models.reserve(files.size());
    for (const auto& f : files) models.push_back(io::read_xyz(f));
    return models;
}

void append_log_line(std::ofstream& log, const train::StepStats& s) {
    char line[256];
    std::snprintf(line, sizeof line, "step=%lld lr=%.17g loss=%.17g rec=%.17g uni=%.17g sp=%.17g\n",
                  static_cast<long long>(s.step), s.lr, s.loss, s.rec, s.uni, s.sp);
    log << line;
}

int cmd_sample_mesh(const std::string& input, const std::string& output, int count,
                    const std::string& mode, std::uint64_t seed) {
    TriangleMesh mesh = io::read_mesh(input);
    auto sample_mode =
        mode == "poisson" ? io::SampleMode::kPoissonDisk : io::SampleMode::kAreaWeighted;
    PointCloud cloud = io::sample_mesh(mesh, count, sample_mode, seed);
    io::write_xyz(output, cloud.points);
    std::cout << "sampled " << cloud.size() << " points (" << mode << ") -> " << output << "\n";
    return 0;
}

int cmd_make_patches(const std::string& input, const std::string& output_dir, int count,
                     int patch_size, int graph_k) {
    PointCloud cloud = io::read_xyz(input);
    geom::GeodesicPatchStats stats;
    auto patches = geom::geodesic_patches(cloud, count, patch_size, graph_k, &stats);
    if (stats.fallback_points > 0)
        std::cerr << "warning: " << stats.fallback_points << " points in "
                  << stats.affected_patches
                  << " patches filled by Euclidean fallback (disconnected graph)\n";

    fs::create_directories(output_dir);
    nlohmann::json manifest;
    manifest["patch_size"] = patch_size;
    manifest["patches"] = nlohmann::json::array();
    for (std::size_t i = 0; i < patches.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "patch_%03zu.xyz", i);
        io::write_xyz(fs::path(output_dir) / name, patches[i].points);
        nlohmann::json entry;
        entry["file"] = name;
        entry["center"] = {patches[i].center.x, patches[i].center.y, patches[i].center.z};
        entry["scale"] = patches[i].scale;
        entry["source_indices"] = patches[i].source_indices;
        manifest["patches"].push_back(entry);
    }
    std::ofstream mf(fs::path(output_dir) / "manifest.json", std::ios::trunc);
    mf << manifest.dump(2) << "\n";
    std::cout << "wrote " << patches.size() << " patches to " << output_dir << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& output_dir, const std::string& resume) {
    io::RunConfig cfg = io::read_config(config_path);
    if (!data_dir.empty()) cfg.dataset_dir = data_dir;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (cfg.dataset_dir.empty()) throw std::runtime_error("no dataset_dir (config or --data)");
    if (cfg.output_dir.empty()) throw std::runtime_error("no output_dir (config or --output-dir)");
    cfg.train.validate();

    auto models = load_dataset(cfg.dataset_dir);
    auto dataset = train::build_dataset(models, cfg.train);

    train::Trainer trainer(cfg.train);
    bool resuming = !resume.empty();
    if (resuming) {
        std::string stored = trainer.load_checkpoint(resume);
        io::RunConfig stored_cfg = io::parse_config_text(stored);
        if (config_fingerprint(stored_cfg) != config_fingerprint(cfg))
            throw std::runtime_error("checkpoint config does not match --config");
    }

    fs::create_directories(cfg.output_dir);
    fs::path log_path = fs::path(cfg.output_dir) / "train.log";
    std::ofstream log(log_path, resuming ? std::ios::app : std::ios::trunc);
    if (!log) throw std::runtime_error("cannot open log " + log_path.string());

    trainer.fit(dataset, [&](const train::StepStats& s) { append_log_line(log, s); });
    log.flush();

    fs::path ckpt = fs::path(cfg.output_dir) / "checkpoint.bin";
    // Paths are run-local; the snapshot carries only model-relevant settings.
    io::RunConfig snapshot = cfg;
    snapshot.dataset_dir.clear();
    snapshot.output_dir.clear();
    snapshot.checkpoint_path.clear();
    trainer.save_checkpoint(ckpt, io::serialize_config(snapshot));
    std::cout << "trained " << trainer.step() << " steps; checkpoint -> " << ckpt.string()
              << "\n";
    return 0;
}

int cmd_upsample(const std::string& checkpoint, const std::string& input,
                 const std::string& output) {
    io::RunConfig cfg = io::parse_config_text(train::checkpoint_config_text(checkpoint));
    train::Trainer trainer(cfg.train);
    trainer.load_checkpoint(checkpoint);
    PointCloud cloud = io::read_xyz(input);
    PointCloud up = train::upsample_cloud(cloud, trainer.network(), cfg.train);
    io::write_xyz(output, up.points);
    std::cout << "upsampled " << cloud.size() << " -> " << up.size() << " points -> " << output
              << "\n";
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& mesh_path, const std::string& report_json,
             const std::string& report_text, int uniform_seeds) {
    PointCloud pred = io::read_xyz(pred_path);
    PointCloud gt = io::read_xyz(gt_path);
    TriangleMesh mesh;
    bool have_mesh = !mesh_path.empty();
    if (have_mesh) {
        mesh = io::read_mesh(mesh_path);
        if (mesh.face_count() == 0) throw std::runtime_error("mesh has no faces: " + mesh_path);
    }
    loss::UniformConfig ucfg;  // the standard p grid
    metrics::MetricReport report = metrics::evaluate(
        pred.points, gt.points, have_mesh ? &mesh : nullptr, ucfg.p_values, uniform_seeds);

    std::cout << report.to_text();
    // The same numbers scaled by 1e3, the usual table convention.
    std::printf("cd_x1000 %.6f\n", report.cd * 1e3);
    std::printf("hd_x1000 %.6f\n", report.hd * 1e3);
    if (report.has_p2f()) std::printf("p2f_x1000 %.6f\n", report.p2f_mean * 1e3);
    for (const auto& [p, score] : report.uniformity)
        std::printf("uniformity_p%g_x1000 %.6f\n", p, score * 1e3);

    if (!report_json.empty()) {
        std::ofstream out(report_json, std::ios::trunc);
        out << report.to_json() << "\n";
    }
    if (!report_text.empty()) {
        std::ofstream out(report_text, std::ios::trunc);
        out << report.to_text();
    }
    return 0;
}

int cmd_gradcheck(const std::string& config_path, int patch_points, double eps, double threshold,
                  std::uint64_t seed) {
    io::RunConfig cfg;
    if (!config_path.empty()) cfg = io::read_config(config_path);
    auto& tc = cfg.train;

    const int r = tc.net.rate;
    if (patch_points % r != 0) throw std::runtime_error("patch points must be divisible by rate");
    const int coarse_points = patch_points / r;
    // Clamp neighbor counts so the reduced patch stays legal.
    tc.net.gcn_k = std::min(tc.net.gcn_k, coarse_points - 1);
    tc.sp.k = std::min(tc.sp.k, patch_points - 1);
    tc.uniform.m_seeds = std::min(tc.uniform.m_seeds, patch_points * r);

    Patch patch;
    patch.points = seeded_sphere_points(patch_points, seed);
    patch = geom::normalize(std::move(patch));

    net::Network network(tc.net, tc.seed);
    auto f = [&]() {
        auto coarse = geom::downsample_coarse(patch, r, rng::key(seed, 1));
        std::vector<ad::Tensor> fine;
        for (const Patch& c : coarse)
            fine.push_back(network.coarse_to_fine(net::points_to_tensor(c.points)));
        ad::Tensor t = ad::concat(fine, 0);
        return loss::joint_loss(net::points_to_tensor(patch.points), fine, t, tc.weights,
                                tc.uniform, tc.sp, rng::key(seed, 2))
            .total;
    };
    auto report = ad::grad_check(f, network.params(), eps);
    std::printf("gradcheck max_rel_error %.3e (param %s slot %lld, analytic %.9e numeric %.9e)\n",
                report.max_rel_error, report.worst_param.c_str(),
                static_cast<long long>(report.worst_slot), report.analytic, report.numeric);
    if (report.max_rel_error < threshold) {
        std::printf("gradcheck PASS (threshold %.1e)\n", threshold);
        return 0;
    }
    std::printf("gradcheck FAIL (threshold %.1e)\n", threshold);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-supervised point cloud upsampling pipeline"};
    app.require_subcommand(1);

    // sample-mesh
    std::string sm_input, sm_output, sm_mode = "poisson";
    int sm_count = 2048;
    std::uint64_t sm_seed = 1;
    auto* sm = app.add_subcommand("sample-mesh", "Sample a point cloud from a mesh surface");
    sm->add_option("--input", sm_input, "mesh file (.obj/.ply)")->required();
    sm->add_option("--output", sm_output, "output .xyz path")->required();
    sm->add_option("--count", sm_count, "number of points");
    sm->add_option("--mode", sm_mode, "poisson | area")
        ->check(CLI::IsMember({"poisson", "area"}));
    sm->add_option("--seed", sm_seed, "sampling seed");

    // make-patches
    std::string mp_input, mp_output_dir;
    int mp_count = 24, mp_patch_size = 256, mp_graph_k = 5;
    auto* mp = app.add_subcommand("make-patches", "Extract geodesic patches from a cloud");
    mp->add_option("--input", mp_input, "input .xyz cloud")->required();
    mp->add_option("--output-dir", mp_output_dir, "directory for patch files")->required();
    mp->add_option("--count", mp_count, "number of patches");
    mp->add_option("--patch-size", mp_patch_size, "points per patch");
    mp->add_option("--graph-k", mp_graph_k, "geodesic graph connectivity");

    // train
    std::string tr_config, tr_data, tr_output, tr_resume;
    auto* tr = app.add_subcommand("train", "Train on a directory of .xyz models");
    tr->add_option("--config", tr_config, "config file")->required();
    tr->add_option("--data", tr_data, "dataset directory (overrides config)");
    tr->add_option("--output-dir", tr_output, "output directory (overrides config)");
    tr->add_option("--resume", tr_resume, "checkpoint to resume from");

    // upsample
    std::string up_ckpt, up_input, up_output;
    auto* up = app.add_subcommand("upsample", "Upsample a cloud with a trained checkpoint");
    up->add_option("--checkpoint", up_ckpt, "checkpoint file")->required();
    up->add_option("--input", up_input, "input .xyz cloud")->required();
    up->add_option("--output", up_output, "output .xyz path")->required();

    // eval
    std::string ev_pred, ev_gt, ev_mesh, ev_json, ev_text;
    int ev_seeds = 50;
    auto* ev = app.add_subcommand("eval", "Evaluate a prediction against ground truth");
    ev->add_option("--pred", ev_pred, "predicted .xyz")->required();
    ev->add_option("--gt", ev_gt, "ground-truth .xyz")->required();
    ev->add_option("--mesh", ev_mesh, "ground-truth mesh for the surface-distance metric");
    ev->add_option("--report", ev_json, "write a JSON report here");
    ev->add_option("--report-text", ev_text, "write a text report here");
    ev->add_option("--uniform-seeds", ev_seeds, "seed count for the uniformity statistic");

    // gradcheck
    std::string gc_config;
    int gc_points = 16;
    double gc_eps = 1e-5, gc_threshold = 1e-4;
    std::uint64_t gc_seed = 1;
    auto* gc = app.add_subcommand("gradcheck",
                                  "Finite-difference check of the network + joint loss");
    gc->add_option("--config", gc_config, "config file (defaults to the desk-scale config)");
    gc->add_option("--patch-points", gc_points, "patch size for the check");
    gc->add_option("--eps", gc_eps, "central-difference step");
    gc->add_option("--threshold", gc_threshold, "max relative error to pass");
    gc->add_option("--seed", gc_seed, "patch generation seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sm->parsed()) return cmd_sample_mesh(sm_input, sm_output, sm_count, sm_mode, sm_seed);
        if (mp->parsed())
            return cmd_make_patches(mp_input, mp_output_dir, mp_count, mp_patch_size, mp_graph_k);
        if (tr->parsed()) return cmd_train(tr_config, tr_data, tr_output, tr_resume);
        if (up->parsed()) return cmd_upsample(up_ckpt, up_input, up_output);
        if (ev->parsed()) return cmd_eval(ev_pred, ev_gt, ev_mesh, ev_json, ev_text, ev_seeds);
        if (gc->parsed())
            return cmd_gradcheck(gc_config, gc_points, gc_eps, gc_threshold, gc_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
