// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pcdenoise/vec3.hpp"

namespace pcdn {

struct PointCloud {
    std::vector<Vec3> points;

    PointCloud() = default;
    explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}

    int size() const { return static_cast<int>(points.size()); }
    bool empty() const { return points.empty(); }
    const Vec3& operator[](int i) const { return points[static_cast<size_t>(i)]; }
    Vec3& operator[](int i) { return points[static_cast<size_t>(i)]; }

    bool all_finite() const;
    Vec3 centroid() const;
};

// Result of mapping a cloud into the unit sphere: out = (x - center) / scale.
struct NormalizeResult {
    PointCloud cloud;
    Vec3 center;
    double scale = 1.0;
};

// Translate the centroid to the origin and scale the farthest point to
// radius 1. Coincident clouds keep scale 1. Throws InvalidInput on empty or
// non-finite input.
NormalizeResult normalize_unit_sphere(const PointCloud& cloud);

// Inverse of normalize_unit_sphere: x * scale + center.
PointCloud denormalize(const PointCloud& cloud, const Vec3& center, double scale);

// Exact k-nearest-neighbor index (kd-tree). Queries match a brute-force scan
// ordered by (squared distance, index); ties resolve to the lowest index.
// Immutable after construction, safe for concurrent queries.
class NeighborIndex {
  public:
    explicit NeighborIndex(const PointCloud& cloud);

    int size() const { return static_cast<int>(pts_.size()); }
    const Vec3& point(int i) const { return pts_[static_cast<size_t>(i)]; }

    // k indices sorted by ascending distance. Throws InvalidInput unless
    // 1 <= k <= size().
    std::vector<int> query(const Vec3& q, int k) const;

    // Nearest single neighbor, equivalent to query(q, 1)[0] but cheaper.
    int nearest(const Vec3& q) const;

  private:
    struct Node {
        int left = -1;   // child node index, -1 for leaf
        int right = -1;
        int axis = 0;
        double split = 0.0;
        int begin = 0;  // leaf range into order_
        int end = 0;
    };

    struct Best {
        double d2;
        int idx;
        bool operator<(const Best& o) const {  // max-heap: worst on top
            return d2 < o.d2 || (d2 == o.d2 && idx < o.idx);
        }
    };

    int build(int begin, int end, std::vector<Vec3>& boxmin, std::vector<Vec3>& boxmax);
    void search(int node, const Vec3& q, int k, std::vector<Best>& heap) const;

    std::vector<Vec3> pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Greedy farthest point sampling. First pick is seed_index; each subsequent
// pick maximizes the minimum distance to the picked set, ties to the lowest
// index. Throws InvalidInput unless 1 <= m <= n and seed_index is valid.
std::vector<int> farthest_point_sample(const PointCloud& cloud, int m, int seed_index);

struct Patch {
    std::vector<int> indices;      // into the parent cloud
    int center_index = 0;          // parent-cloud index of the patch center
    std::vector<bool> mask;        // per patch point, highlights the
                                   // mask_size points nearest to the center
};

Patch make_patch(const PointCloud& cloud, std::vector<int> indices, int center_index,
                 int mask_size);

struct CoverageMode {
    // count <= 0: smallest number of FPS-ordered patches covering every point.
    // count  > 0: exactly that many patches.
    int count = 0;
    static CoverageMode full() { return {0}; }
    static CoverageMode fixed(int r) { return {r}; }
};

// FPS-centered overlapping patches of `patch_size` nearest neighbors each.
// FPS is seeded at index 0 for determinism.
std::vector<Patch> extract_patches(const PointCloud& cloud, int patch_size,
                                   CoverageMode coverage = CoverageMode::full(),
                                   int mask_size = -1);

// Reassemble a cloud from per-patch denoised positions. Every point takes its
// position from the patch whose center is nearest in the original cloud, ties
// to the lowest patch ordinal. Throws CoverageError if a point is uncovered.
PointCloud stitch_patches(const PointCloud& original,
                          std::span<const std::pair<Patch, std::vector<Vec3>>> patches);

}  // namespace pcdn
