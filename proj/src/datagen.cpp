// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcdenoise/errors.hpp"
#include "pcdenoise/rng.hpp"

namespace pcdn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Default half extents put the shape's circumradius at 1.
constexpr double kPlaneHalf = 0.70710678118654752440;   // 1/sqrt(2)
constexpr double kCubeHalf = 0.57735026918962576451;    // 1/sqrt(3)

Vec3 sample_square(double half, Rng& rng) {
    return {rng.uniform(-half, half), rng.uniform(-half, half), 0.0};
}

// Cholesky factor of a symmetric PSD 3x3 matrix; throws on invalid input.
std::array<double, 9> cholesky3(const std::array<double, 9>& m) {
    auto at = [&](int r, int c) { return m[static_cast<size_t>(3 * r + c)]; };
    for (int r = 0; r < 3; ++r)
        for (int c = r + 1; c < 3; ++c)
            if (std::abs(at(r, c) - at(c, r)) > 1e-12)
                throw InvalidInput("anisotropic noise: covariance not symmetric");
    std::array<double, 9> L{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = at(i, j);
            for (int k = 0; k < j; ++k)
                sum -= L[static_cast<size_t>(3 * i + k)] * L[static_cast<size_t>(3 * j + k)];
            if (i == j) {
                if (sum < -1e-12) throw InvalidInput("anisotropic noise: covariance not PSD");
                L[static_cast<size_t>(3 * i + j)] = std::sqrt(std::max(sum, 0.0));
            } else {
                double d = L[static_cast<size_t>(3 * j + j)];
                L[static_cast<size_t>(3 * i + j)] = d > 0.0 ? sum / d : 0.0;
            }
        }
    }
    return L;
}

}  // namespace

ShapeSpec ShapeSpec::sphere(int n, uint64_t seed, double radius) {
    ShapeSpec s;
    s.kind = Kind::sphere;
    s.n = n;
    s.seed = seed;
    s.radius = radius;
    return s;
}

ShapeSpec ShapeSpec::plane(int n, uint64_t seed, double half) {
    ShapeSpec s;
    s.kind = Kind::plane;
    s.n = n;
    s.seed = seed;
    s.half = half;
    return s;
}

ShapeSpec ShapeSpec::cube(int n, uint64_t seed, double half) {
    ShapeSpec s;
    s.kind = Kind::cube;
    s.n = n;
    s.seed = seed;
    s.half = half;
    return s;
}

ShapeSpec ShapeSpec::torus(int n, uint64_t seed, double R, double r) {
    ShapeSpec s;
    s.kind = Kind::torus;
    s.n = n;
    s.seed = seed;
    s.torus_major = R;
    s.torus_minor = r;
    return s;
}

ShapeSpec ShapeSpec::two_planes(int n, uint64_t seed, double gap, double half) {
    ShapeSpec s;
    s.kind = Kind::two_planes;
    s.n = n;
    s.seed = seed;
    s.gap = gap;
    s.half = half;
    return s;
}

double ShapeSpec::resolved_half() const {
    if (half > 0.0) return half;
    return kind == Kind::cube ? kCubeHalf : kPlaneHalf;
}

double ShapeSpec::surface_distance(const Vec3& p) const {
    switch (kind) {
        case Kind::sphere:
            return std::abs(p.norm() - radius);
        case Kind::plane:
            return std::abs(p.z);
        case Kind::two_planes:
            return std::min(std::abs(p.z - 0.5 * gap), std::abs(p.z + 0.5 * gap));
        case Kind::torus: {
            double q = std::sqrt(p.x * p.x + p.y * p.y) - torus_major;
            return std::abs(std::sqrt(q * q + p.z * p.z) - torus_minor);
        }
        case Kind::cube: {
            double h = resolved_half();
            Vec3 q{std::abs(p.x) - h, std::abs(p.y) - h, std::abs(p.z) - h};
            Vec3 outside{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
            double inside = std::min(std::max({q.x, q.y, q.z}), 0.0);
            return std::abs(outside.norm() + inside);
        }
    }
    throw Unsupported("surface_distance: unknown shape kind");
}

std::string ShapeSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::sphere: os << "sphere r=" << radius; break;
        case Kind::plane: os << "plane half=" << resolved_half(); break;
        case Kind::cube: os << "cube half=" << resolved_half(); break;
        case Kind::torus: os << "torus R=" << torus_major << " r=" << torus_minor; break;
        case Kind::two_planes:
            os << "two_planes gap=" << gap << " half=" << resolved_half();
            break;
    }
    os << " n=" << n << " seed=" << seed;
    return os.str();
}

PointCloud sample_shape(const ShapeSpec& spec) {
    if (spec.n < 1) throw InvalidInput("sample_shape: n must be >= 1");
    Rng rng(spec.seed);
    PointCloud out;
    out.points.reserve(static_cast<size_t>(spec.n));

    switch (spec.kind) {
        case ShapeSpec::Kind::sphere: {
            if (!(spec.radius > 0.0)) throw InvalidInput("sample_shape: sphere radius <= 0");
            while (out.size() < spec.n) {
                Vec3 v = rng.normal3();
                double norm = v.norm();
                if (norm < 1e-12) continue;
                out.points.push_back(v * (spec.radius / norm));
            }
            break;
        }
        case ShapeSpec::Kind::plane: {
            double h = spec.resolved_half();
            for (int i = 0; i < spec.n; ++i) out.points.push_back(sample_square(h, rng));
            break;
        }
        case ShapeSpec::Kind::two_planes: {
            double h = spec.resolved_half();
            for (int i = 0; i < spec.n; ++i) {
                Vec3 p = sample_square(h, rng);
                p.z = rng.uniform() < 0.5 ? 0.5 * spec.gap : -0.5 * spec.gap;
                out.points.push_back(p);
            }
            break;
        }
        case ShapeSpec::Kind::cube: {
            double h = spec.resolved_half();
            for (int i = 0; i < spec.n; ++i) {
                int face = static_cast<int>(rng.uniform_int(0, 5));
                double u = rng.uniform(-h, h);
                double v = rng.uniform(-h, h);
                double w = face % 2 == 0 ? h : -h;
                Vec3 p;
                switch (face / 2) {
                    case 0: p = {w, u, v}; break;
                    case 1: p = {u, w, v}; break;
                    default: p = {u, v, w}; break;
                }
                out.points.push_back(p);
            }
            break;
        }
        case ShapeSpec::Kind::torus: {
            double R = spec.torus_major;
            double r = spec.torus_minor;
            if (!(R > 0.0) || !(r > 0.0) || r > R)
                throw InvalidInput("sample_shape: torus requires 0 < r <= R");
            while (out.size() < spec.n) {
                double theta = rng.uniform(0.0, 2.0 * kPi);
                double phi = rng.uniform(0.0, 2.0 * kPi);
                // Rejection on the surface element (R + r cos phi) dphi dtheta.
                if (rng.uniform() * (R + r) > R + r * std::cos(phi)) continue;
                double ring = R + r * std::cos(phi);
                out.points.push_back(
                    {ring * std::cos(theta), ring * std::sin(theta), r * std::sin(phi)});
            }
            break;
        }
    }
    return out;
}

NoiseSpec NoiseSpec::gaussian(double sigma, uint64_t seed) {
    NoiseSpec s;
    s.pattern = Pattern::gaussian_iso;
    s.sigma = sigma;
    s.seed = seed;
    return s;
}

NoiseSpec NoiseSpec::laplace(double b, uint64_t seed) {
    NoiseSpec s;
    s.pattern = Pattern::laplace;
    s.b = b;
    s.seed = seed;
    return s;
}

NoiseSpec NoiseSpec::discrete(int levels, double sigma, uint64_t seed) {
    NoiseSpec s;
    s.pattern = Pattern::discrete;
    s.levels = levels;
    s.sigma = sigma;
    s.seed = seed;
    return s;
}

NoiseSpec NoiseSpec::anisotropic(const std::array<double, 9>& cov, uint64_t seed) {
    NoiseSpec s;
    s.pattern = Pattern::gaussian_aniso;
    s.cov = cov;
    s.seed = seed;
    return s;
}

NoiseSpec NoiseSpec::unidirectional(const Vec3& direction, double sigma, uint64_t seed) {
    NoiseSpec s;
    s.pattern = Pattern::gaussian_unidir;
    double norm = direction.norm();
    if (!(norm > 0.0)) throw InvalidInput("unidirectional noise: zero direction");
    s.direction = direction / norm;
    s.sigma = sigma;
    s.seed = seed;
    return s;
}

NoiseSpec NoiseSpec::uniform(double a, uint64_t seed) {
    NoiseSpec s;
    s.pattern = Pattern::uniform;
    s.a = a;
    s.seed = seed;
    return s;
}

std::string NoiseSpec::describe() const {
    std::ostringstream os;
    switch (pattern) {
        case Pattern::gaussian_iso: os << "gaussian sigma=" << sigma; break;
        case Pattern::laplace: os << "laplace b=" << b; break;
        case Pattern::discrete: os << "discrete levels=" << levels << " sigma=" << sigma; break;
        case Pattern::gaussian_aniso: os << "anisotropic"; break;
        case Pattern::gaussian_unidir:
            os << "unidirectional (" << direction.x << "," << direction.y << "," << direction.z
               << ") sigma=" << sigma;
            break;
        case Pattern::uniform: os << "uniform a=" << a; break;
    }
    os << " seed=" << seed;
    return os.str();
}

PointCloud apply_noise(const PointCloud& cloud, const NoiseSpec& spec) {
    Rng rng(spec.seed);
    PointCloud out = cloud;

    switch (spec.pattern) {
        case NoiseSpec::Pattern::gaussian_iso: {
            if (spec.sigma < 0.0) throw InvalidInput("gaussian noise: sigma < 0");
            if (spec.sigma == 0.0) return out;
            for (Vec3& p : out.points) p += spec.sigma * rng.normal3();
            break;
        }
        case NoiseSpec::Pattern::laplace: {
            if (!(spec.b > 0.0)) throw InvalidInput("laplace noise: b <= 0");
            auto draw = [&]() {
                double u = rng.uniform() - 0.5;
                return -spec.b * (u < 0.0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
            };
            for (Vec3& p : out.points) p += Vec3{draw(), draw(), draw()};
            break;
        }
        case NoiseSpec::Pattern::discrete: {
            if (spec.levels < 1) throw InvalidInput("discrete noise: levels < 1");
            if (spec.sigma < 0.0) throw InvalidInput("discrete noise: sigma < 0");
            // Fixed random unit offsets drawn once from the same seed.
            std::vector<Vec3> offsets;
            offsets.reserve(static_cast<size_t>(spec.levels));
            while (static_cast<int>(offsets.size()) < spec.levels) {
                Vec3 v = rng.normal3();
                double norm = v.norm();
                if (norm < 1e-12) continue;
                offsets.push_back(v / norm);
            }
            for (Vec3& p : out.points)
                p += spec.sigma * offsets[static_cast<size_t>(
                                      rng.uniform_int(0, spec.levels - 1))];
            break;
        }
        case NoiseSpec::Pattern::gaussian_aniso: {
            std::array<double, 9> L = cholesky3(spec.cov);
            for (Vec3& p : out.points) {
                Vec3 z = rng.normal3();
                p += Vec3{L[0] * z.x, L[3] * z.x + L[4] * z.y,
                          L[6] * z.x + L[7] * z.y + L[8] * z.z};
            }
            break;
        }
        case NoiseSpec::Pattern::gaussian_unidir: {
            if (spec.sigma < 0.0) throw InvalidInput("unidirectional noise: sigma < 0");
            for (Vec3& p : out.points) p += spec.direction * (spec.sigma * rng.normal());
            break;
        }
        case NoiseSpec::Pattern::uniform: {
            if (!(spec.a > 0.0)) throw InvalidInput("uniform noise: a <= 0");
            for (Vec3& p : out.points)
                p += Vec3{rng.uniform(-spec.a, spec.a), rng.uniform(-spec.a, spec.a),
                          rng.uniform(-spec.a, spec.a)};
            break;
        }
    }
    return out;
}

}  // namespace pcdn
