// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcdenoise/datagen.hpp"
#include "pcdenoise/errors.hpp"
#include "pcdenoise/io.hpp"
#include "pcdenoise/metrics.hpp"
#include "pcdenoise/sampler.hpp"
#include "pcdenoise/trainer.hpp"

namespace py = pybind11;
using namespace pcdn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud cloud_from_array(const Array& array) {
    if (array.ndim() != 2 || array.shape(1) != 3)
        throw InvalidInput("expected an (n, 3) float array");
    PointCloud cloud;
    auto r = array.unchecked<2>();
    cloud.points.reserve(static_cast<size_t>(r.shape(0)));
    for (py::ssize_t i = 0; i < r.shape(0); ++i)
        cloud.points.push_back({r(i, 0), r(i, 1), r(i, 2)});
    return cloud;
}

Array cloud_to_array(const PointCloud& cloud) {
    Array out({static_cast<py::ssize_t>(cloud.size()), static_cast<py::ssize_t>(3)});
    auto w = out.mutable_unchecked<2>();
    for (int i = 0; i < cloud.size(); ++i) {
        w(i, 0) = cloud[i].x;
        w(i, 1) = cloud[i].y;
        w(i, 2) = cloud[i].z;
    }
    return out;
}

Array vecs_to_array(const std::vector<Vec3>& vecs) {
    PointCloud tmp;
    tmp.points = vecs;
    return cloud_to_array(tmp);
}

std::vector<Vec3> vecs_from_array(const Array& array) {
    return cloud_from_array(array).points;
}

ShapeSpec shape_from_args(const std::string& kind, int n, uint64_t seed, double radius,
                          double half, double torus_major, double torus_minor, double gap) {
    if (kind == "sphere") return ShapeSpec::sphere(n, seed, radius);
    if (kind == "plane") return ShapeSpec::plane(n, seed, half);
    if (kind == "cube") return ShapeSpec::cube(n, seed, half);
    if (kind == "torus") return ShapeSpec::torus(n, seed, torus_major, torus_minor);
    if (kind == "two_planes") return ShapeSpec::two_planes(n, seed, gap, half);
    throw InvalidInput("unknown shape kind: " + kind);
}

NoiseSpec noise_from_args(const std::string& pattern, double sigma, uint64_t seed, double b,
                          double a, int levels, const std::vector<double>& cov,
                          const std::vector<double>& direction) {
    if (pattern == "gaussian") return NoiseSpec::gaussian(sigma, seed);
    if (pattern == "laplace") return NoiseSpec::laplace(b, seed);
    if (pattern == "uniform") return NoiseSpec::uniform(a, seed);
    if (pattern == "discrete") return NoiseSpec::discrete(levels, sigma, seed);
    if (pattern == "unidir") {
        if (direction.size() != 3) throw InvalidInput("direction must have 3 components");
        return NoiseSpec::unidirectional({direction[0], direction[1], direction[2]}, sigma, seed);
    }
    if (pattern == "aniso") {
        if (cov.size() != 9) throw InvalidInput("cov must have 9 row-major entries");
        std::array<double, 9> m;
        std::copy(cov.begin(), cov.end(), m.begin());
        return NoiseSpec::anisotropic(m, seed);
    }
    throw InvalidInput("unknown noise pattern: " + pattern);
}

SamplerConfig sampler_config_from_kwargs(const std::string& mode, double eta, int L,
                                         uint64_t seed, int patch_size, int patches,
                                         const std::string& calibration, int jobs) {
    SamplerConfig config;
    config.mode = sampler_mode_from_string(mode);
    config.eta = eta;
    config.L = L;
    config.seed = seed;
    config.patch_size = patch_size;
    config.patch_count = patches;
    config.calibration = calibration == "raw" ? Calibration::raw : Calibration::chi3;
    config.jobs = jobs;
    return config;
}

py::dict report_to_dict(const DenoiseReport& report) {
    py::dict d;
    d["sigma_bar_sq_raw"] = report.sigma_bar_sq_raw;
    d["sigma_bar_sq"] = report.sigma_bar_sq;
    d["sigma_hat"] = report.sigma_hat;
    d["tau_hat"] = report.tau_hat;
    d["schedule_steps"] = report.schedule_steps;
    d["step_mean_displacement"] = report.step_mean_displacement;
    d["patch_count"] = report.patch_count;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Score-based adaptive iterative point cloud denoising";

    py::register_exception<InvalidInput>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<DiffusionSchedule>(m, "Schedule")
        .def(py::init([](int T, double beta_T) { return linear_schedule(T, beta_T); }),
             py::arg("T") = 1000, py::arg("beta_T") = 2e-6)
        .def_readonly("T", &DiffusionSchedule::T)
        .def_property_readonly("beta",
                               [](const DiffusionSchedule& s) { return py::array(py::cast(s.beta)); })
        .def_property_readonly(
            "alpha_bar",
            [](const DiffusionSchedule& s) { return py::array(py::cast(s.alpha_bar)); })
        .def_property_readonly(
            "sigma_bar_sq",
            [](const DiffusionSchedule& s) { return py::array(py::cast(s.sigma_bar_sq)); })
        .def("sigma_bar", &DiffusionSchedule::sigma_bar, py::arg("t"))
        .def("per_step_variance", &DiffusionSchedule::per_step_variance, py::arg("t"))
        .def(
            "match_timestep",
            [](const DiffusionSchedule& s, double sigma_bar_sq) {
                return match_timestep(s, sigma_bar_sq);
            },
            py::arg("sigma_bar_sq"))
        .def(
            "adaptive_steps",
            [](const DiffusionSchedule& s, int tau_hat, int L) {
                return adaptive_schedule(s, tau_hat, L).taus;
            },
            py::arg("tau_hat"), py::arg("L") = 5);

    m.def(
        "sample_shape",
        [](const std::string& kind, int n, uint64_t seed, double radius, double half,
           double torus_major, double torus_minor, double gap) {
            return cloud_to_array(sample_shape(
                shape_from_args(kind, n, seed, radius, half, torus_major, torus_minor, gap)));
        },
        py::arg("kind"), py::arg("n"), py::arg("seed") = 0, py::arg("radius") = 1.0,
        py::arg("half") = 0.0, py::arg("torus_major") = 0.7, py::arg("torus_minor") = 0.3,
        py::arg("gap") = 0.3);

    m.def(
        "apply_noise",
        [](const Array& points, const std::string& pattern, double sigma, uint64_t seed,
           double b, double a, int levels, const std::vector<double>& cov,
           const std::vector<double>& direction) {
            return cloud_to_array(apply_noise(
                cloud_from_array(points),
                noise_from_args(pattern, sigma, seed, b, a, levels, cov, direction)));
        },
        py::arg("points"), py::arg("pattern") = "gaussian", py::arg("sigma") = 0.01,
        py::arg("seed") = 0, py::arg("b") = 0.01, py::arg("a") = 0.01, py::arg("levels") = 4,
        py::arg("cov") = std::vector<double>{}, py::arg("direction") = std::vector<double>{});

    m.def(
        "normalize_unit_sphere",
        [](const Array& points) {
            NormalizeResult r = normalize_unit_sphere(cloud_from_array(points));
            return py::make_tuple(cloud_to_array(r.cloud),
                                  py::make_tuple(r.center.x, r.center.y, r.center.z), r.scale);
        },
        py::arg("points"));

    m.def(
        "knn",
        [](const Array& points, const std::vector<double>& query, int k) {
            if (query.size() != 3) throw InvalidInput("query must have 3 components");
            NeighborIndex index(cloud_from_array(points));
            return index.query({query[0], query[1], query[2]}, k);
        },
        py::arg("points"), py::arg("query"), py::arg("k"));

    m.def(
        "farthest_point_sample",
        [](const Array& points, int m, int seed_index) {
            return farthest_point_sample(cloud_from_array(points), m, seed_index);
        },
        py::arg("points"), py::arg("m"), py::arg("seed_index") = 0);

    m.def(
        "forward_sample",
        [](const DiffusionSchedule& schedule, const Array& points, int t, uint64_t seed) {
            Rng rng(seed);
            return cloud_to_array(forward_sample(schedule, cloud_from_array(points), t, rng));
        },
        py::arg("schedule"), py::arg("points"), py::arg("t"), py::arg("seed") = 0);

    m.def(
        "estimate_noise_variance",
        [](const Array& scores, const std::string& calibration) {
            NoiseEstimate est = estimate_noise_variance(
                vecs_from_array(scores),
                calibration == "raw" ? Calibration::raw : Calibration::chi3);
            py::dict d;
            d["sigma_bar_sq_raw"] = est.sigma_bar_sq_raw;
            d["sigma_bar_sq"] = est.sigma_bar_sq;
            d["calibration"] = est.calibration;
            return d;
        },
        py::arg("scores"), py::arg("calibration") = "chi3");

    m.def(
        "ground_truth_score",
        [](const Array& x, const Array& x0) {
            return vecs_to_array(ground_truth_score(cloud_from_array(x), cloud_from_array(x0)));
        },
        py::arg("x"), py::arg("x0"));

    m.def(
        "denoise_oracle",
        [](const Array& noisy, const Array& clean, int T, double beta_T,
           const std::string& mode, double eta, int L, uint64_t seed, int patch_size,
           int patches, const std::string& calibration, int jobs) {
            DiffusionSchedule schedule = linear_schedule(T, beta_T);
            OracleScore oracle(cloud_from_array(clean));
            SamplerConfig config = sampler_config_from_kwargs(mode, eta, L, seed, patch_size,
                                                              patches, calibration, jobs);
            auto [out, report] = denoise(cloud_from_array(noisy), oracle, schedule, config);
            return py::make_tuple(cloud_to_array(out), report_to_dict(report));
        },
        py::arg("noisy"), py::arg("clean"), py::arg("T") = 1000, py::arg("beta_T") = 2e-6,
        py::arg("mode") = "adaptive", py::arg("eta") = 0.0, py::arg("L") = 5,
        py::arg("seed") = 0, py::arg("patch_size") = 1000, py::arg("patches") = 0,
        py::arg("calibration") = "chi3", py::arg("jobs") = 1);

    m.def(
        "denoise_checkpoint",
        [](const Array& noisy, const std::string& checkpoint, int T, double beta_T,
           const std::string& mode, double eta, int L, uint64_t seed, int patch_size,
           int patches, const std::string& calibration, int jobs) {
            DiffusionSchedule schedule = linear_schedule(T, beta_T);
            NetworkScore provider(load_model(checkpoint));
            SamplerConfig config = sampler_config_from_kwargs(mode, eta, L, seed, patch_size,
                                                              patches, calibration, jobs);
            auto [out, report] = denoise(cloud_from_array(noisy), provider, schedule, config);
            return py::make_tuple(cloud_to_array(out), report_to_dict(report));
        },
        py::arg("noisy"), py::arg("checkpoint"), py::arg("T") = 1000, py::arg("beta_T") = 2e-6,
        py::arg("mode") = "adaptive", py::arg("eta") = 0.0, py::arg("L") = 5,
        py::arg("seed") = 0, py::arg("patch_size") = 1000, py::arg("patches") = 0,
        py::arg("calibration") = "chi3", py::arg("jobs") = 1);

    m.def(
        "train",
        [](const std::vector<Array>& shapes, const std::string& checkpoint, int iterations,
           int patch_size, int K_p, double lambda, double lr, uint64_t seed, bool augment,
           int width, int layers, int graph_k, int fusion_k, const std::string& fusion,
           const std::string& grad_fusion, int T, double beta_T) {
            TrainConfig config;
            config.T = T;
            config.beta_T = beta_T;
            config.iterations = iterations;
            config.patch_size = patch_size;
            config.K_p = K_p;
            config.lambda = lambda;
            config.lr = lr;
            config.seed = seed;
            config.augment = augment;
            config.checkpoint_path = checkpoint;
            config.hyper.feature_dim = width;
            config.hyper.graph_layers = layers;
            config.hyper.graph_k = graph_k;
            config.hyper.fusion_k = fusion_k;
            config.hyper.fusion = fusion_mode_from_string(fusion);
            config.hyper.grad_fusion = grad_fusion_mode_from_string(grad_fusion);

            std::vector<PointCloud> clouds;
            for (const Array& a : shapes) clouds.push_back(cloud_from_array(a));
            TrainResult result = train(clouds, config);

            py::list history;
            for (const TrainRecord& r : result.history) {
                py::dict d;
                d["iteration"] = r.iteration;
                d["loss"] = r.loss;
                d["sigma_bar_t"] = r.sigma_bar_t;
                d["t"] = r.t;
                d["delta"] = r.delta;
                history.append(d);
            }
            return history;
        },
        py::arg("shapes"), py::arg("checkpoint"), py::arg("iterations") = 1000,
        py::arg("patch_size") = 64, py::arg("K_p") = 32, py::arg("lambda_") = 0.99,
        py::arg("lr") = 1e-3, py::arg("seed") = 0, py::arg("augment") = true,
        py::arg("width") = 16, py::arg("layers") = 2, py::arg("graph_k") = 8,
        py::arg("fusion_k") = 16, py::arg("fusion") = "fused",
        py::arg("grad_fusion") = "weighted", py::arg("T") = 1000, py::arg("beta_T") = 2e-6);

    m.def(
        "chamfer",
        [](const Array& a, const Array& b) {
            return chamfer(cloud_from_array(a), cloud_from_array(b));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "point_to_surface",
        [](const Array& points, const std::string& kind, double radius, double half,
           double torus_major, double torus_minor, double gap) {
            return point_to_surface(
                cloud_from_array(points),
                shape_from_args(kind, 1, 0, radius, half, torus_major, torus_minor, gap));
        },
        py::arg("points"), py::arg("kind"), py::arg("radius") = 1.0, py::arg("half") = 0.0,
        py::arg("torus_major") = 0.7, py::arg("torus_minor") = 0.3, py::arg("gap") = 0.3);

    m.def(
        "read_cloud", [](const std::string& path) { return cloud_to_array(read_cloud(path)); },
        py::arg("path"));
    m.def(
        "write_xyz",
        [](const std::string& path, const Array& points) {
            write_xyz(path, cloud_from_array(points));
        },
        py::arg("path"), py::arg("points"));
}
