// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "pcdenoise/errors.hpp"
#include "pcdenoise/metrics.hpp"
#include "test_helpers.hpp"

using namespace pcdn;

namespace {

double brute_chamfer(const PointCloud& a, const PointCloud& b) {
    auto one_way = [](const PointCloud& from, const PointCloud& to) {
        double sum = 0.0;
        for (const Vec3& p : from.points) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& q : to.points) best = std::min(best, dist_sq(p, q));
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    return one_way(a, b) + one_way(b, a);
}

}  // namespace

TEST_CASE("chamfer: identical clouds and the two-singleton case") {
    Rng rng(31);
    PointCloud a = test::random_cloud(100, rng);
    CHECK(chamfer(a, a) == 0.0);

    PointCloud p({{0, 0, 0}});
    PointCloud q({{1, 0, 0}});
    CHECK(chamfer(p, q) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("chamfer: matches the O(n^2) oracle and is symmetric") {
    Rng rng(32);
    for (int rep = 0; rep < 5; ++rep) {
        PointCloud a = test::random_cloud(300, rng);
        PointCloud b = test::random_cloud(250, rng);
        double got = chamfer(a, b);
        CHECK(std::abs(got - brute_chamfer(a, b)) < 1e-12);
        CHECK(chamfer(b, a) == got);
    }
}

TEST_CASE("chamfer: duplicated cloud stays at zero") {
    Rng rng(33);
    PointCloud a = test::random_cloud(50, rng);
    PointCloud doubled = a;
    doubled.points.insert(doubled.points.end(), a.points.begin(), a.points.end());
    CHECK(chamfer(a, doubled) == 0.0);
}

TEST_CASE("chamfer: empty input raises InvalidInput") {
    PointCloud a({{0, 0, 0}});
    CHECK_THROWS_AS(chamfer(a, PointCloud{}), InvalidInput);
}

TEST_CASE("point_to_surface: sphere distances") {
    PointCloud on = sample_shape(ShapeSpec::sphere(500, 1));
    CHECK(point_to_surface(on, ShapeSpec::sphere(1, 0)) < 1e-12);

    PointCloud out({{1.1, 0, 0}});
    CHECK(point_to_surface(out, ShapeSpec::sphere(1, 0)) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("point_to_surface: torus matches a dense-sample NN approximation") {
    ShapeSpec torus = ShapeSpec::torus(1, 0, 0.7, 0.3);
    PointCloud dense = sample_shape(ShapeSpec::torus(1000000, 99, 0.7, 0.3));
    NeighborIndex index(dense);

    Rng rng(34);
    PointCloud probes = test::random_cloud(200, rng, 1.1);
    double analytic = point_to_surface(probes, torus);
    double sampled = 0.0;
    for (const Vec3& p : probes.points) sampled += (dense[index.nearest(p)] - p).norm();
    sampled /= probes.size();
    CHECK(std::abs(analytic - sampled) < 1e-3);
}

TEST_CASE("point_to_surface: cube distance handles faces, edges, inside") {
    ShapeSpec cube = ShapeSpec::cube(1, 0, 1.0);  // half extent 1
    PointCloud probes({{0.0, 0.0, 0.0},     // center: distance 1 to faces
                       {2.0, 0.0, 0.0},     // outside a face
                       {2.0, 2.0, 0.0},     // outside an edge
                       {0.5, 0.0, 0.0}});   // inside
    CHECK(cube.surface_distance(probes[0]) == doctest::Approx(1.0));
    CHECK(cube.surface_distance(probes[1]) == doctest::Approx(1.0));
    CHECK(cube.surface_distance(probes[2]) == doctest::Approx(std::sqrt(2.0)));
    CHECK(cube.surface_distance(probes[3]) == doctest::Approx(0.5));
}

TEST_CASE("EvalReport: csv and table formatting") {
    EvalReport r;
    r.chamfer = 0.5;
    r.p2s_mean = 0.25;
    r.sigma_estimated = 0.02;
    r.tau_hat = 500;
    r.wall_time = 1.5;
    CHECK(r.csv_header() == "chamfer,p2s_mean,sigma_estimated,tau_hat,wall_time");
    CHECK(r.csv_row() == "0.5,0.25,0.02,500,1.5");
    CHECK(r.table().find("tau_hat") != std::string::npos);
}
