// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>

#include "pcdenoise/errors.hpp"
#include "pcdenoise/geometry.hpp"
#include "test_helpers.hpp"

using namespace pcdn;

TEST_CASE("normalize_unit_sphere: single point degenerates to scale 1") {
    PointCloud cloud({{5.0, 5.0, 5.0}});
    NormalizeResult r = normalize_unit_sphere(cloud);
    CHECK(r.cloud[0] == Vec3{0.0, 0.0, 0.0});
    CHECK(r.center == Vec3{5.0, 5.0, 5.0});
    CHECK(r.scale == 1.0);
}

TEST_CASE("normalize_unit_sphere: cube corners scale by sqrt(3)") {
    PointCloud cloud;
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
            for (double sz : {-1.0, 1.0}) cloud.points.push_back({sx, sy, sz});
    NormalizeResult r = normalize_unit_sphere(cloud);
    CHECK(r.scale == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    double max_radius = 0.0;
    for (const Vec3& p : r.cloud.points) max_radius = std::max(max_radius, p.norm());
    CHECK(max_radius == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize_unit_sphere: round trip within 1e-12 per coordinate") {
    Rng rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        PointCloud cloud = test::random_cloud(100, rng, 50.0);
        NormalizeResult r = normalize_unit_sphere(cloud);
        for (const Vec3& p : r.cloud.points) CHECK(p.norm() <= 1.0 + 1e-12);
        PointCloud back = denormalize(r.cloud, r.center, r.scale);
        for (int i = 0; i < cloud.size(); ++i) {
            CHECK(std::abs(back[i].x - cloud[i].x) < 1e-12);
            CHECK(std::abs(back[i].y - cloud[i].y) < 1e-12);
            CHECK(std::abs(back[i].z - cloud[i].z) < 1e-12);
        }
    }
}

TEST_CASE("normalize_unit_sphere: rejects bad input") {
    CHECK_THROWS_AS(normalize_unit_sphere(PointCloud{}), InvalidInput);
    PointCloud nan_cloud({{0.0, 0.0, std::nan("")}});
    CHECK_THROWS_AS(normalize_unit_sphere(nan_cloud), InvalidInput);
}

TEST_CASE("knn: k = n returns a permutation, coincident query first") {
    Rng rng(5);
    PointCloud cloud = test::random_cloud(40, rng);
    NeighborIndex index(cloud);
    std::vector<int> all = index.query(cloud[17], cloud.size());
    CHECK(all.size() == 40);
    CHECK(all[0] == 17);  // distance 0 to itself
    std::set<int> unique(all.begin(), all.end());
    CHECK(unique.size() == 40);
}

TEST_CASE("knn: errors on k out of range") {
    Rng rng(6);
    PointCloud cloud = test::random_cloud(10, rng);
    NeighborIndex index(cloud);
    CHECK_THROWS_AS(index.query({0, 0, 0}, 11), InvalidInput);
    CHECK_THROWS_AS(index.query({0, 0, 0}, 0), InvalidInput);
}

TEST_CASE("knn: matches brute force on 100 random clouds") {
    Rng rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        int n = 2 + static_cast<int>(rng.uniform_int(0, 498));
        int k = 1 + static_cast<int>(rng.uniform_int(0, std::min(31, n - 1)));
        PointCloud cloud = test::random_cloud(n, rng);
        NeighborIndex index(cloud);
        Vec3 q{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
        CHECK(index.query(q, k) == test::brute_force_knn(cloud, q, k));
    }
}

TEST_CASE("knn: exact ties resolve to the lowest index") {
    // Four points at identical distance from the origin plus duplicates.
    PointCloud cloud({{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}, {1, 0, 0}});
    NeighborIndex index(cloud);
    std::vector<int> got = index.query({0, 0, 0}, 3);
    CHECK(got == std::vector<int>{0, 1, 2});
    CHECK(index.query({1, 0, 0}, 2) == std::vector<int>{0, 4});
}

TEST_CASE("farthest_point_sample: m = 1 returns the seed") {
    Rng rng(8);
    PointCloud cloud = test::random_cloud(20, rng);
    CHECK(farthest_point_sample(cloud, 1, 7) == std::vector<int>{7});
}

TEST_CASE("farthest_point_sample: collinear points pick the far end") {
    PointCloud cloud({{0, 0, 0}, {1, 0, 0}, {10, 0, 0}});
    CHECK(farthest_point_sample(cloud, 2, 0) == std::vector<int>{0, 2});
}

TEST_CASE("farthest_point_sample: m = n visits every index exactly once") {
    Rng rng(9);
    PointCloud cloud = test::random_cloud(60, rng);
    cloud.points[10] = cloud.points[3];  // duplicates must still be visited
    std::vector<int> picks = farthest_point_sample(cloud, cloud.size(), 4);
    std::set<int> unique(picks.begin(), picks.end());
    CHECK(static_cast<int>(unique.size()) == cloud.size());
}

TEST_CASE("farthest_point_sample: matches independent greedy reference") {
    Rng rng(10);
    for (int rep = 0; rep < 20; ++rep) {
        int n = 3 + static_cast<int>(rng.uniform_int(0, 60));
        int m = 1 + static_cast<int>(rng.uniform_int(0, n - 1));
        int seed = static_cast<int>(rng.uniform_int(0, n - 1));
        PointCloud cloud = test::random_cloud(n, rng);
        CHECK(farthest_point_sample(cloud, m, seed) == test::brute_force_fps(cloud, m, seed));
    }
}

TEST_CASE("farthest_point_sample: rejects out-of-range arguments") {
    Rng rng(12);
    PointCloud cloud = test::random_cloud(5, rng);
    CHECK_THROWS_AS(farthest_point_sample(cloud, 6, 0), InvalidInput);
    CHECK_THROWS_AS(farthest_point_sample(cloud, 0, 0), InvalidInput);
    CHECK_THROWS_AS(farthest_point_sample(cloud, 2, 5), InvalidInput);
}

TEST_CASE("make_patch: mask highlights the nearest-to-center points") {
    PointCloud cloud({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
    Patch patch = make_patch(cloud, {0, 1, 2, 3}, 0, 2);
    CHECK(patch.mask == std::vector<bool>{true, true, false, false});
    CHECK(patch.center_index == 0);
}

TEST_CASE("extract_patches: small cloud collapses to one full patch") {
    Rng rng(13);
    PointCloud cloud = test::random_cloud(30, rng);
    std::vector<Patch> patches = extract_patches(cloud, 30);
    REQUIRE(patches.size() == 1);
    CHECK(static_cast<int>(patches[0].indices.size()) == 30);
}

TEST_CASE("extract_patches: union of patches covers every point") {
    Rng rng(14);
    for (int rep = 0; rep < 5; ++rep) {
        PointCloud cloud = test::random_cloud(400, rng);
        int patch_size = 100;
        std::vector<Patch> patches = extract_patches(cloud, patch_size);
        std::set<int> covered;
        size_t total = 0;
        for (const Patch& p : patches) {
            covered.insert(p.indices.begin(), p.indices.end());
            total += p.indices.size();
        }
        CHECK(static_cast<int>(covered.size()) == cloud.size());
        CHECK(total >= static_cast<size_t>(cloud.size()));
    }
}

TEST_CASE("extract_patches: fixed count is honored") {
    Rng rng(15);
    PointCloud cloud = test::random_cloud(200, rng);
    std::vector<Patch> patches = extract_patches(cloud, 50, CoverageMode::fixed(3));
    CHECK(patches.size() == 3);
}

TEST_CASE("stitch_patches: single and overlapping patches follow the center rule") {
    PointCloud original({{0, 0, 0}, {1, 0, 0}, {10, 0, 0}});

    SUBCASE("one patch") {
        Patch p = make_patch(original, {0, 1, 2}, 0, 3);
        std::vector<std::pair<Patch, std::vector<Vec3>>> patches{
            {p, {{5, 5, 5}, {6, 6, 6}, {7, 7, 7}}}};
        PointCloud out = stitch_patches(original, patches);
        CHECK(out[1] == Vec3{6, 6, 6});
    }

    SUBCASE("nearest center wins") {
        // Point 1 sits 1.0 from center 0 and 9.0 from center 2.
        Patch a = make_patch(original, {0, 1}, 0, 2);
        Patch b = make_patch(original, {1, 2}, 2, 2);
        std::vector<std::pair<Patch, std::vector<Vec3>>> patches{
            {a, {{0, 0, 0}, {111, 0, 0}}}, {b, {{222, 0, 0}, {10, 0, 0}}}};
        PointCloud out = stitch_patches(original, patches);
        CHECK(out[1] == Vec3{111, 0, 0});
    }

    SUBCASE("uncovered point raises CoverageError") {
        Patch a = make_patch(original, {0, 1}, 0, 2);
        std::vector<std::pair<Patch, std::vector<Vec3>>> patches{{a, {{0, 0, 0}, {1, 0, 0}}}};
        CHECK_THROWS_AS(stitch_patches(original, patches), CoverageError);
    }
}

TEST_CASE("stitch_patches: matches brute-force nearest-center assignment") {
    Rng rng(16);
    PointCloud cloud = test::random_cloud(150, rng);
    std::vector<Patch> patches = extract_patches(cloud, 40);
    std::vector<std::pair<Patch, std::vector<Vec3>>> moved;
    for (const Patch& p : patches) {
        std::vector<Vec3> positions;
        for (int idx : p.indices) positions.push_back(cloud[idx] * 0.5 + Vec3{0.1, 0.0, 0.0});
        moved.emplace_back(p, positions);
    }
    PointCloud got = stitch_patches(cloud, moved);

    for (int i = 0; i < cloud.size(); ++i) {
        double best_d = std::numeric_limits<double>::infinity();
        Vec3 expected;
        for (const auto& [p, positions] : moved) {
            for (size_t j = 0; j < p.indices.size(); ++j) {
                if (p.indices[j] != i) continue;
                double d = dist_sq(cloud[i], cloud[p.center_index]);
                if (d < best_d) {
                    best_d = d;
                    expected = positions[j];
                }
            }
        }
        CHECK(got[i] == expected);
    }
}
