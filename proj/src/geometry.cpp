// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcdenoise/errors.hpp"

namespace pcdn {

namespace {
constexpr int kLeafSize = 16;

double axis_of(const Vec3& v, int axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }
}  // namespace

bool PointCloud::all_finite() const {
    for (const Vec3& p : points)
        if (!p.finite()) return false;
    return true;
}

Vec3 PointCloud::centroid() const {
    Vec3 c;
    for (const Vec3& p : points) c += p;
    return c / static_cast<double>(points.size());
}

NormalizeResult normalize_unit_sphere(const PointCloud& cloud) {
    if (cloud.empty()) throw InvalidInput("normalize_unit_sphere: empty cloud");
    if (!cloud.all_finite()) throw InvalidInput("normalize_unit_sphere: non-finite coordinates");
    Vec3 c = cloud.centroid();
    double r2 = 0.0;
    for (const Vec3& p : cloud.points) r2 = std::max(r2, (p - c).norm_sq());
    double scale = r2 > 0.0 ? std::sqrt(r2) : 1.0;
    NormalizeResult out;
    out.center = c;
    out.scale = scale;
    out.cloud.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) out.cloud.points.push_back((p - c) / scale);
    return out;
}

PointCloud denormalize(const PointCloud& cloud, const Vec3& center, double scale) {
    PointCloud out;
    out.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) out.points.push_back(p * scale + center);
    return out;
}

NeighborIndex::NeighborIndex(const PointCloud& cloud) : pts_(cloud.points) {
    if (pts_.empty()) throw InvalidInput("NeighborIndex: empty cloud");
    order_.resize(pts_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * pts_.size() / kLeafSize + 2);
    std::vector<Vec3> boxmin, boxmax;  // scratch, unused beyond build
    root_ = build(0, static_cast<int>(pts_.size()), boxmin, boxmax);
}

int NeighborIndex::build(int begin, int end, std::vector<Vec3>& boxmin,
                         std::vector<Vec3>& boxmax) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin <= kLeafSize) {
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }
    Vec3 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (int i = begin; i < end; ++i) {
        const Vec3& p = pts_[static_cast<size_t>(order_[static_cast<size_t>(i)])];
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    Vec3 extent = hi - lo;
    int axis = 0;
    if (extent.y > axis_of(extent, axis)) axis = 1;
    if (extent.z > axis_of(extent, axis)) axis = 2;
    if (axis_of(extent, axis) == 0.0) {  // all coincident: make a leaf
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }
    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         double va = axis_of(pts_[static_cast<size_t>(a)], axis);
                         double vb = axis_of(pts_[static_cast<size_t>(b)], axis);
                         return va < vb || (va == vb && a < b);
                     });
    node.axis = axis;
    node.split = axis_of(pts_[static_cast<size_t>(order_[static_cast<size_t>(mid)])], axis);
    int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    int left = build(begin, mid, boxmin, boxmax);
    int right = build(mid, end, boxmin, boxmax);
    nodes_[static_cast<size_t>(self)].left = left;
    nodes_[static_cast<size_t>(self)].right = right;
    return self;
}

void NeighborIndex::search(int node_id, const Vec3& q, int k, std::vector<Best>& heap) const {
    const Node& node = nodes_[static_cast<size_t>(node_id)];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            int idx = order_[static_cast<size_t>(i)];
            Best cand{dist_sq(q, pts_[static_cast<size_t>(idx)]), idx};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end());
            } else if (cand < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    double diff = axis_of(q, node.axis) - node.split;
    int near = diff < 0.0 ? node.left : node.right;
    int far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    // The far side can still hold an equal-distance lower index, so descend
    // on <= rather than <.
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().d2) search(far, q, k, heap);
}

std::vector<int> NeighborIndex::query(const Vec3& q, int k) const {
    if (k < 1) throw InvalidInput("knn: k must be positive");
    if (k > size()) throw InvalidInput("knn: k exceeds cloud size");
    std::vector<Best> heap;
    heap.reserve(static_cast<size_t>(k));
    search(root_, q, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    std::vector<int> out;
    out.reserve(static_cast<size_t>(k));
    for (const Best& b : heap) out.push_back(b.idx);
    return out;
}

int NeighborIndex::nearest(const Vec3& q) const {
    std::vector<Best> heap;
    heap.reserve(1);
    search(root_, q, 1, heap);
    return heap.front().idx;
}

std::vector<int> farthest_point_sample(const PointCloud& cloud, int m, int seed_index) {
    int n = cloud.size();
    if (n < 1) throw InvalidInput("farthest_point_sample: empty cloud");
    if (m < 1 || m > n) throw InvalidInput("farthest_point_sample: m out of range");
    if (seed_index < 0 || seed_index >= n)
        throw InvalidInput("farthest_point_sample: seed_index out of range");

    std::vector<int> picks;
    picks.reserve(static_cast<size_t>(m));
    std::vector<double> min_d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    int current = seed_index;
    picks.push_back(current);
    min_d2[static_cast<size_t>(current)] = -1.0;  // never re-picked
    for (int step = 1; step < m; ++step) {
        const Vec3& p = cloud[current];
        int best = -1;
        double best_d2 = -1.0;
        for (int i = 0; i < n; ++i) {
            double d2 = std::min(min_d2[static_cast<size_t>(i)], dist_sq(cloud[i], p));
            min_d2[static_cast<size_t>(i)] = d2;
            if (d2 > best_d2) {
                best_d2 = d2;
                best = i;
            }
        }
        current = best;
        picks.push_back(current);
        min_d2[static_cast<size_t>(current)] = -1.0;  // never re-picked
    }
    return picks;
}

Patch make_patch(const PointCloud& cloud, std::vector<int> indices, int center_index,
                 int mask_size) {
    Patch patch;
    patch.indices = std::move(indices);
    patch.center_index = center_index;
    int n = static_cast<int>(patch.indices.size());
    int highlighted = std::min(mask_size, n);
    patch.mask.assign(static_cast<size_t>(n), false);

    const Vec3& c = cloud[center_index];
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double da = dist_sq(cloud[patch.indices[static_cast<size_t>(a)]], c);
        double db = dist_sq(cloud[patch.indices[static_cast<size_t>(b)]], c);
        return da < db ||
               (da == db &&
                patch.indices[static_cast<size_t>(a)] < patch.indices[static_cast<size_t>(b)]);
    });
    for (int i = 0; i < highlighted; ++i) patch.mask[static_cast<size_t>(order[static_cast<size_t>(i)])] = true;
    return patch;
}

std::vector<Patch> extract_patches(const PointCloud& cloud, int patch_size, CoverageMode coverage,
                                   int mask_size) {
    int n = cloud.size();
    if (n < 1) throw InvalidInput("extract_patches: empty cloud");
    if (patch_size > n) throw InvalidInput("extract_patches: patch_size exceeds cloud size");
    if (patch_size < 1) throw InvalidInput("extract_patches: patch_size must be positive");
    if (mask_size < 0) mask_size = patch_size;

    NeighborIndex index(cloud);
    int max_centers = coverage.count > 0 ? std::min(coverage.count, n) : n;

    // Incremental FPS over patch centers: identical pick sequence to
    // farthest_point_sample(cloud, max_centers, 0), computed lazily so full
    // coverage can stop early.
    std::vector<double> min_d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    int current = 0;
    min_d2[0] = -1.0;

    std::vector<Patch> patches;
    std::vector<bool> covered(static_cast<size_t>(n), false);
    int covered_count = 0;
    for (int step = 0; step < max_centers; ++step) {
        if (step > 0) {
            const Vec3& p = cloud[current];
            int best = -1;
            double best_d2 = -1.0;
            for (int i = 0; i < n; ++i) {
                double d2 = std::min(min_d2[static_cast<size_t>(i)], dist_sq(cloud[i], p));
                min_d2[static_cast<size_t>(i)] = d2;
                if (d2 > best_d2) {
                    best_d2 = d2;
                    best = i;
                }
            }
            current = best;
            min_d2[static_cast<size_t>(current)] = -1.0;
        }
        std::vector<int> idx = index.query(cloud[current], patch_size);
        for (int i : idx) {
            if (!covered[static_cast<size_t>(i)]) {
                covered[static_cast<size_t>(i)] = true;
                ++covered_count;
            }
        }
        patches.push_back(make_patch(cloud, std::move(idx), current, mask_size));
        if (coverage.count <= 0 && covered_count == n) break;
    }
    return patches;
}

PointCloud stitch_patches(const PointCloud& original,
                          std::span<const std::pair<Patch, std::vector<Vec3>>> patches) {
    int n = original.size();
    PointCloud out;
    out.points.resize(static_cast<size_t>(n));
    std::vector<double> best_d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<bool> assigned(static_cast<size_t>(n), false);

    for (const auto& [patch, positions] : patches) {
        if (positions.size() != patch.indices.size())
            throw InvalidInput("stitch_patches: positions/indices length mismatch");
        const Vec3& center = original[patch.center_index];
        for (size_t j = 0; j < patch.indices.size(); ++j) {
            int pt = patch.indices[j];
            double d2 = dist_sq(original[pt], center);
            // Strict < keeps the earliest patch on ties.
            if (d2 < best_d2[static_cast<size_t>(pt)]) {
                best_d2[static_cast<size_t>(pt)] = d2;
                out.points[static_cast<size_t>(pt)] = positions[j];
                assigned[static_cast<size_t>(pt)] = true;
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (!assigned[static_cast<size_t>(i)])
            throw CoverageError("stitch_patches: point " + std::to_string(i) +
                                " not covered by any patch");
    return out;
}

}  // namespace pcdn
