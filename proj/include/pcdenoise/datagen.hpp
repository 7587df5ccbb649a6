// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "pcdenoise/geometry.hpp"

namespace pcdn {

// Analytic surfaces with closed-form distance functions. Default dimensions
// fit inside the unit sphere so sampled clouds are already normalized.
struct ShapeSpec {
    enum class Kind { sphere, plane, cube, torus, two_planes };

    Kind kind = Kind::sphere;
    int n = 0;
    uint64_t seed = 0;
    double radius = 1.0;                  // sphere
    double half = 0.0;                    // plane/cube/two_planes half extent (0: kind default)
    double torus_major = 0.7;             // torus R
    double torus_minor = 0.3;             // torus r
    double gap = 0.3;                     // two_planes separation

    static ShapeSpec sphere(int n, uint64_t seed = 0, double radius = 1.0);
    static ShapeSpec plane(int n, uint64_t seed = 0, double half = 0.0);
    static ShapeSpec cube(int n, uint64_t seed = 0, double half = 0.0);
    static ShapeSpec torus(int n, uint64_t seed = 0, double R = 0.7, double r = 0.3);
    static ShapeSpec two_planes(int n, uint64_t seed = 0, double gap = 0.3, double half = 0.0);

    double resolved_half() const;

    // Unsigned distance from an arbitrary point to the surface. The plane
    // kinds are treated as unbounded for distance purposes.
    double surface_distance(const Vec3& p) const;

    std::string describe() const;
};

// Uniform-on-surface sampling, deterministic under spec.seed.
PointCloud sample_shape(const ShapeSpec& spec);

struct NoiseSpec {
    enum class Pattern { gaussian_iso, laplace, discrete, gaussian_aniso, gaussian_unidir, uniform };

    Pattern pattern = Pattern::gaussian_iso;
    uint64_t seed = 0;
    double sigma = 0.0;                    // gaussian_iso / discrete / gaussian_unidir
    double b = 0.0;                        // laplace scale
    double a = 0.0;                        // uniform half width
    int levels = 0;                        // discrete offset count
    std::array<double, 9> cov{};           // gaussian_aniso, row-major 3x3
    Vec3 direction{0.0, 0.0, 1.0};         // gaussian_unidir

    static NoiseSpec gaussian(double sigma, uint64_t seed = 0);
    static NoiseSpec laplace(double b, uint64_t seed = 0);
    static NoiseSpec discrete(int levels, double sigma, uint64_t seed = 0);
    static NoiseSpec anisotropic(const std::array<double, 9>& cov, uint64_t seed = 0);
    static NoiseSpec unidirectional(const Vec3& direction, double sigma, uint64_t seed = 0);
    static NoiseSpec uniform(double a, uint64_t seed = 0);

    std::string describe() const;
};

// Per-point independent perturbation. Deterministic under spec.seed.
PointCloud apply_noise(const PointCloud& cloud, const NoiseSpec& spec);

}  // namespace pcdn
