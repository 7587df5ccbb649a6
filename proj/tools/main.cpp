// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "pcdenoise/datagen.hpp"
#include "pcdenoise/errors.hpp"
#include "pcdenoise/io.hpp"
#include "pcdenoise/metrics.hpp"
#include "pcdenoise/sampler.hpp"
#include "pcdenoise/trainer.hpp"

namespace {

using namespace pcdn;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CLI::ValidationError(what + ": cannot parse number '" + s + "'");
    }
}

// Noise pattern grammar: gaussian:SIGMA, laplace:B, discrete:LEVELS:SIGMA,
// aniso:XX:YY:ZZ[:XY:XZ:YZ], unidir:DX:DY:DZ:SIGMA, uniform:A.
NoiseSpec parse_noise(const std::string& text, uint64_t seed) {
    std::vector<std::string> parts = split(text, ':');
    const std::string& kind = parts[0];
    auto need = [&](size_t n) {
        if (parts.size() != n + 1)
            throw CLI::ValidationError("--noise " + kind + " expects " + std::to_string(n) +
                                       " parameters");
    };
    if (kind == "gaussian") {
        need(1);
        return NoiseSpec::gaussian(to_double(parts[1], "--noise"), seed);
    }
    if (kind == "laplace") {
        need(1);
        return NoiseSpec::laplace(to_double(parts[1], "--noise"), seed);
    }
    if (kind == "discrete") {
        need(2);
        return NoiseSpec::discrete(static_cast<int>(to_double(parts[1], "--noise")),
                                   to_double(parts[2], "--noise"), seed);
    }
    if (kind == "uniform") {
        need(1);
        return NoiseSpec::uniform(to_double(parts[1], "--noise"), seed);
    }
    if (kind == "unidir") {
        need(4);
        Vec3 dir{to_double(parts[1], "--noise"), to_double(parts[2], "--noise"),
                 to_double(parts[3], "--noise")};
        return NoiseSpec::unidirectional(dir, to_double(parts[4], "--noise"), seed);
    }
    if (kind == "aniso") {
        if (parts.size() != 4 && parts.size() != 7)
            throw CLI::ValidationError("--noise aniso expects 3 diagonal or 6 covariance values");
        double xx = to_double(parts[1], "--noise");
        double yy = to_double(parts[2], "--noise");
        double zz = to_double(parts[3], "--noise");
        double xy = parts.size() == 7 ? to_double(parts[4], "--noise") : 0.0;
        double xz = parts.size() == 7 ? to_double(parts[5], "--noise") : 0.0;
        double yz = parts.size() == 7 ? to_double(parts[6], "--noise") : 0.0;
        return NoiseSpec::anisotropic({xx, xy, xz, xy, yy, yz, xz, yz, zz}, seed);
    }
    throw CLI::ValidationError("unknown noise pattern: " + kind);
}

struct ShapeFlags {
    std::string kind = "sphere";
    int n = 10000;
    double radius = 1.0;
    double half = 0.0;
    double torus_major = 0.7;
    double torus_minor = 0.3;
    double gap = 0.3;

    void add_options(CLI::App* cmd, bool with_n) {
        cmd->add_option("--shape", kind, "sphere|plane|cube|torus|two_planes")
            ->default_val(kind);
        if (with_n) cmd->add_option("--n", n, "point count")->default_val(n);
        cmd->add_option("--radius", radius, "sphere radius");
        cmd->add_option("--half", half, "plane/cube half extent (0 = kind default)");
        cmd->add_option("--torus-R", torus_major, "torus major radius");
        cmd->add_option("--torus-r", torus_minor, "torus minor radius");
        cmd->add_option("--gap", gap, "two_planes separation");
    }

    ShapeSpec resolve(uint64_t seed) const {
        if (kind == "sphere") return ShapeSpec::sphere(n, seed, radius);
        if (kind == "plane") return ShapeSpec::plane(n, seed, half);
        if (kind == "cube") return ShapeSpec::cube(n, seed, half);
        if (kind == "torus") return ShapeSpec::torus(n, seed, torus_major, torus_minor);
        if (kind == "two_planes") return ShapeSpec::two_planes(n, seed, gap, half);
        throw CLI::ValidationError("unknown shape: " + kind);
    }
};

std::unique_ptr<ScoreProvider> make_provider(const std::string& oracle_path,
                                             const std::string& checkpoint_path) {
    if (!oracle_path.empty()) return std::make_unique<OracleScore>(read_cloud(oracle_path));
    if (!checkpoint_path.empty())
        return std::make_unique<NetworkScore>(load_model(checkpoint_path));
    throw CLI::ValidationError("either --oracle <clean cloud> or --checkpoint <model> is required");
}

void dump_schedule_table(std::ostream& os, const DiffusionSchedule& s) {
    os << "# t beta alpha_bar sigma_bar_sq\n";
    char buf[128];
    for (int t = 0; t <= s.T; ++t) {
        std::snprintf(buf, sizeof(buf), "%d %.12g %.12g %.12g\n", t,
                      s.beta[static_cast<size_t>(t)], s.alpha_bar[static_cast<size_t>(t)],
                      s.sigma_bar_sq[static_cast<size_t>(t)]);
        os << buf;
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Score-based adaptive iterative point cloud denoising"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value config file; command line flags win");

    // generate ------------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "sample a clean shape and optional noisy copy");
    ShapeFlags gen_shape;
    gen_shape.add_options(gen, true);
    std::string gen_noise;
    std::string gen_out;
    uint64_t gen_seed = 0;
    gen->add_option("--noise", gen_noise, "noise pattern, e.g. gaussian:0.02");
    gen->add_option("--out", gen_out, "output prefix (<prefix>_clean.xyz, <prefix>_noisy.xyz)")
        ->required();
    gen->add_option("--seed", gen_seed, "RNG seed")->default_val(0);

    // train ---------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "train the score network on clean clouds");
    std::string tr_data;
    std::string tr_out = "model.ckpt";
    std::string tr_history;
    TrainConfig tr_config;
    std::string tr_fusion = "fused";
    std::string tr_grad_fusion = "weighted";
    bool tr_no_augment = false;
    tr->add_option("--data", tr_data, "directory of clean .xyz/.ply clouds")->required();
    tr->add_option("--out", tr_out, "checkpoint path")->capture_default_str();
    tr->add_option("--history", tr_history, "loss history CSV path");
    tr->add_option("--iterations", tr_config.iterations)->capture_default_str();
    tr->add_option("--lr", tr_config.lr)->capture_default_str();
    tr->add_option("--lambda", tr_config.lambda)->capture_default_str();
    tr->add_option("--T", tr_config.T)->capture_default_str();
    tr->add_option("--beta-T", tr_config.beta_T)->capture_default_str();
    tr->add_option("--patch-size", tr_config.patch_size)->capture_default_str();
    tr->add_option("--kp", tr_config.K_p, "masked points per patch")->capture_default_str();
    tr->add_option("--seed", tr_config.seed)->capture_default_str();
    tr->add_option("--width", tr_config.hyper.feature_dim)->capture_default_str();
    tr->add_option("--layers", tr_config.hyper.graph_layers)->capture_default_str();
    tr->add_option("--graph-k", tr_config.hyper.graph_k)->capture_default_str();
    tr->add_option("--k-fusion", tr_config.hyper.fusion_k)->capture_default_str();
    tr->add_option("--fusion", tr_fusion, "fused|FT|Ft|Fmean")->capture_default_str();
    tr->add_option("--grad-fusion", tr_grad_fusion, "weighted|const|k1")->capture_default_str();
    tr->add_flag("--no-augment", tr_no_augment, "disable rotation/scale augmentation");
    tr->add_option("--checkpoint-every", tr_config.checkpoint_every)->capture_default_str();

    // denoise ---------------------------------------------------------------
    auto* dn = app.add_subcommand("denoise", "adaptive iterative denoising");
    std::string dn_in, dn_out, dn_oracle, dn_checkpoint, dn_report;
    std::string dn_mode = "adaptive";
    std::string dn_calibration = "chi3";
    SamplerConfig dn_config;
    int dn_T = 1000;
    double dn_beta_T = 2e-6;
    dn->add_option("--in", dn_in, "noisy input cloud")->required();
    dn->add_option("--out", dn_out, "denoised output path")->required();
    dn->add_option("--oracle", dn_oracle, "clean cloud for the analytic score oracle");
    dn->add_option("--checkpoint", dn_checkpoint, "trained model checkpoint");
    dn->add_option("--report", dn_report, "report path (default <out>.report)");
    dn->add_option("--mode", dn_mode, "adaptive|fixed|onestep|gdm")->capture_default_str();
    dn->add_option("--L", dn_config.L)->capture_default_str();
    dn->add_option("--eta", dn_config.eta)->capture_default_str();
    dn->add_option("--patch-size", dn_config.patch_size)->capture_default_str();
    dn->add_option("--patches", dn_config.patch_count, "override patch count (0 = auto)")
        ->capture_default_str();
    dn->add_option("--calibration", dn_calibration, "chi3|raw")->capture_default_str();
    dn->add_option("--seed", dn_config.seed)->capture_default_str();
    dn->add_option("--jobs", dn_config.jobs, "parallel patch workers")->capture_default_str();
    dn->add_option("--T", dn_T)->capture_default_str();
    dn->add_option("--beta-T", dn_beta_T)->capture_default_str();
    dn->add_option("--fixed-alpha", dn_config.fixed_alpha)->capture_default_str();
    dn->add_option("--fixed-decay", dn_config.fixed_alpha_decay)->capture_default_str();
    dn->add_option("--fixed-steps", dn_config.fixed_steps)->capture_default_str();

    // eval ------------------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "compare a denoised cloud against references");
    std::string ev_in, ev_ref, ev_report_in, ev_csv;
    ShapeFlags ev_shape;
    bool ev_has_shape = false;
    ev->add_option("--in", ev_in, "cloud to evaluate")->required();
    ev->add_option("--ref", ev_ref, "reference clean cloud (Chamfer)");
    ev_shape.add_options(ev, false);
    ev->add_option("--report", ev_report_in, "denoise report to merge sigma/tau from");
    ev->add_option("--csv", ev_csv, "append the report as CSV");

    // schedule ----------------------------------------------------------------
    auto* sc = app.add_subcommand("schedule", "inspect the adaptive schedule");
    double sc_sigma = -1.0;
    std::string sc_estimate, sc_oracle, sc_checkpoint, sc_dump;
    std::string sc_calibration = "chi3";
    int sc_T = 1000;
    double sc_beta_T = 2e-6;
    int sc_L = 5;
    int sc_patch_size = 1000;
    sc->add_option("--sigma", sc_sigma, "known noise standard deviation");
    sc->add_option("--estimate", sc_estimate, "estimate sigma from this noisy cloud");
    sc->add_option("--oracle", sc_oracle, "clean cloud for the oracle provider");
    sc->add_option("--checkpoint", sc_checkpoint, "trained model checkpoint");
    sc->add_option("--calibration", sc_calibration, "chi3|raw")->capture_default_str();
    sc->add_option("--T", sc_T)->capture_default_str();
    sc->add_option("--beta-T", sc_beta_T)->capture_default_str();
    sc->add_option("--L", sc_L)->capture_default_str();
    sc->add_option("--patch-size", sc_patch_size)->capture_default_str();
    sc->add_option("--dump", sc_dump, "write the full schedule table ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    ev_has_shape = ev->count("--shape") > 0;

    if (gen->parsed()) {
        ShapeSpec spec = gen_shape.resolve(gen_seed);
        PointCloud clean = sample_shape(spec);
        write_xyz(gen_out + "_clean.xyz", clean);
        KeyValues meta{{"shape", spec.describe()}, {"seed", std::to_string(gen_seed)}};
        if (!gen_noise.empty()) {
            NoiseSpec noise = parse_noise(gen_noise, derive_stream(gen_seed, 1));
            PointCloud noisy = apply_noise(clean, noise);
            write_xyz(gen_out + "_noisy.xyz", noisy);
            meta["noise"] = noise.describe();
        }
        write_key_values(gen_out + ".meta", meta);
        std::cout << "wrote " << gen_out << "_clean.xyz"
                  << (gen_noise.empty() ? "" : " and " + gen_out + "_noisy.xyz") << "\n";
        return 0;
    }

    if (tr->parsed()) {
        tr_config.hyper.fusion = fusion_mode_from_string(tr_fusion);
        tr_config.hyper.grad_fusion = grad_fusion_mode_from_string(tr_grad_fusion);
        tr_config.augment = !tr_no_augment;
        tr_config.checkpoint_path = tr_out;

        std::vector<PointCloud> shapes;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(tr_data)) {
            std::string ext = entry.path().extension().string();
            if (ext == ".xyz" || ext == ".ply") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& path : files)
            shapes.push_back(normalize_unit_sphere(read_cloud(path.string())).cloud);
        if (shapes.empty()) throw IoError("train: no .xyz/.ply clouds in " + tr_data);

        std::cout << "training on " << shapes.size() << " clouds, " << tr_config.iterations
                  << " iterations\n";
        TrainResult result = train(shapes, tr_config, [&](const TrainRecord& r) {
            if (r.iteration % 100 == 0)
                std::cout << "iter " << r.iteration << " loss " << r.loss << "\n";
        });
        if (!tr_history.empty()) write_loss_history(tr_history, result.history);
        std::cout << "checkpoint written to " << tr_out << "\n";
        return 0;
    }

    if (dn->parsed()) {
        dn_config.mode = sampler_mode_from_string(dn_mode);
        if (dn_calibration != "raw" && dn_calibration != "chi3")
            throw CLI::ValidationError("--calibration must be chi3 or raw");
        dn_config.calibration =
            dn_calibration == "raw" ? Calibration::raw : Calibration::chi3;
        PointCloud noisy = read_cloud(dn_in);
        std::unique_ptr<ScoreProvider> provider = make_provider(dn_oracle, dn_checkpoint);
        DiffusionSchedule schedule = linear_schedule(dn_T, dn_beta_T);

        double start = now_seconds();
        auto [out, report] = denoise(noisy, *provider, schedule, dn_config);
        double elapsed = now_seconds() - start;

        write_xyz(dn_out, out);
        std::string report_path = dn_report.empty() ? dn_out + ".report" : dn_report;
        std::ofstream rs(report_path);
        if (!rs) throw IoError("denoise: cannot open " + report_path + " for writing");
        rs << report.text();
        rs << "wall_time = " << elapsed << "\n";
        std::cout << report.text() << "wrote " << dn_out << "\n";
        return 0;
    }

    if (ev->parsed()) {
        PointCloud cloud = read_cloud(ev_in);
        EvalReport report;
        double start = now_seconds();
        if (!ev_ref.empty()) report.chamfer = chamfer(cloud, read_cloud(ev_ref));
        if (ev_has_shape) {
            ev_shape.n = 1;
            report.p2s_mean = point_to_surface(cloud, ev_shape.resolve(0));
        }
        if (!ev_report_in.empty()) {
            KeyValues kv = read_key_values(ev_report_in);
            if (kv.count("sigma_hat")) report.sigma_estimated = std::stod(kv.at("sigma_hat"));
            if (kv.count("tau_hat")) report.tau_hat = std::stoi(kv.at("tau_hat"));
        }
        report.wall_time = now_seconds() - start;
        std::cout << report.table();
        if (!ev_csv.empty()) {
            bool fresh = !std::filesystem::exists(ev_csv);
            std::ofstream os(ev_csv, std::ios::app);
            if (!os) throw IoError("eval: cannot open " + ev_csv + " for writing");
            if (fresh) os << report.csv_header() << "\n";
            os << report.csv_row() << "\n";
        }
        return 0;
    }

    if (sc->parsed()) {
        DiffusionSchedule schedule = linear_schedule(sc_T, sc_beta_T);
        double sigma_sq = -1.0;
        if (sc_sigma >= 0.0) {
            sigma_sq = sc_sigma * sc_sigma;
        } else if (!sc_estimate.empty()) {
            PointCloud noisy = read_cloud(sc_estimate);
            std::unique_ptr<ScoreProvider> provider = make_provider(sc_oracle, sc_checkpoint);
            NormalizeResult norm = normalize_unit_sphere(noisy);
            provider->set_frame(norm.center, norm.scale);
            std::vector<Patch> patches =
                extract_patches(norm.cloud, std::min(sc_patch_size, norm.cloud.size()));
            std::vector<Vec3> scores;
            for (const Patch& p : patches) {
                PointCloud pc;
                for (int i : p.indices) pc.points.push_back(norm.cloud[i]);
                std::vector<Vec3> s = provider->scores(pc, pc, schedule.T, schedule.T);
                scores.insert(scores.end(), s.begin(), s.end());
            }
            Calibration cal = sc_calibration == "raw" ? Calibration::raw : Calibration::chi3;
            NoiseEstimate est = estimate_noise_variance(scores, cal);
            sigma_sq = est.sigma_bar_sq;
            std::cout << "sigma_hat = " << std::sqrt(est.sigma_bar_sq) << "\n";
        }

        if (sigma_sq >= 0.0) {
            int tau = match_timestep(schedule, sigma_sq);
            AdaptiveSchedule steps = adaptive_schedule(schedule, tau, sc_L);
            std::cout << "tau_hat = " << tau << "\n";
            std::cout << "steps =";
            for (size_t i = 1; i < steps.taus.size(); ++i) std::cout << ' ' << steps.taus[i];
            std::cout << "\n";
            std::cout << "iterations = " << steps.iterations() << "\n";
        }
        if (!sc_dump.empty()) {
            if (sc_dump == "-") {
                dump_schedule_table(std::cout, schedule);
            } else {
                std::ofstream os(sc_dump);
                if (!os) throw IoError("schedule: cannot open " + sc_dump + " for writing");
                dump_schedule_table(os, schedule);
            }
        }
        if (sigma_sq < 0.0 && sc_dump.empty())
            throw CLI::ValidationError("schedule: provide --sigma, --estimate, or --dump");
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
