// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "pcdenoise/geometry.hpp"
#include "pcdenoise/nn.hpp"
#include "pcdenoise/rng.hpp"

namespace pcdn::test {

inline PointCloud random_cloud(int n, Rng& rng, double extent = 1.0) {
    PointCloud cloud;
    cloud.points.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        cloud.points.push_back(
            {rng.uniform(-extent, extent), rng.uniform(-extent, extent),
             rng.uniform(-extent, extent)});
    return cloud;
}

// O(n log n) reference: sort all indices by (squared distance, index).
inline std::vector<int> brute_force_knn(const PointCloud& cloud, const Vec3& q, int k) {
    std::vector<int> idx(static_cast<size_t>(cloud.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        double da = dist_sq(cloud[a], q);
        double db = dist_sq(cloud[b], q);
        return da < db || (da == db && a < b);
    });
    idx.resize(static_cast<size_t>(k));
    return idx;
}

// Independent greedy FPS reference.
inline std::vector<int> brute_force_fps(const PointCloud& cloud, int m, int seed_index) {
    int n = cloud.size();
    std::vector<bool> picked(static_cast<size_t>(n), false);
    std::vector<int> picks{seed_index};
    picked[static_cast<size_t>(seed_index)] = true;
    while (static_cast<int>(picks.size()) < m) {
        int best = -1;
        double best_d = -1.0;
        for (int i = 0; i < n; ++i) {
            if (picked[static_cast<size_t>(i)]) continue;
            double mind = std::numeric_limits<double>::infinity();
            for (int p : picks) mind = std::min(mind, dist_sq(cloud[i], cloud[p]));
            if (mind > best_d) {
                best_d = mind;
                best = i;
            }
        }
        picks.push_back(best);
        picked[static_cast<size_t>(best)] = true;
    }
    return picks;
}

// Central finite differences against reverse-mode gradients for every value
// in `params`. `build` must construct the scalar loss from fresh leaves each
// call.
//
// relu/max-pool losses are piecewise linear; finite differences across a kink
// do not estimate a derivative. Two detectors exclude such elements instead
// of polluting the comparison:
//  - two central step sizes disagreeing flags a kink inside the interval
//    (smooth f agrees to O(h^2));
//  - forward and backward differences disagreeing flags a kink at the
//    evaluation point itself (exact max-pool ties), where reverse mode
//    returns a one-sided subgradient.
struct GradcheckResult {
    double max_rel = 0.0;
    int kinks = 0;
    int total = 0;
};

inline GradcheckResult gradcheck_filtered(
    std::vector<Tensor> params,
    const std::function<int(Tape&, const std::vector<int>&)>& build, double h = 1e-5,
    double floor_ = 1e-3) {
    Tape tape;
    std::vector<int> nodes;
    for (const Tensor& p : params) nodes.push_back(tape.leaf(p, true));
    int loss = build(tape, nodes);
    tape.backward(loss);
    std::vector<Tensor> analytic;
    for (int node : nodes) analytic.push_back(tape.grad(node));
    double f0 = tape.value(loss).data[0];

    GradcheckResult result;
    for (size_t p = 0; p < params.size(); ++p) {
        for (size_t i = 0; i < params[p].data.size(); ++i) {
            double saved = params[p].data[i];
            auto eval = [&](double v) {
                params[p].data[i] = v;
                Tape t2;
                std::vector<int> n2;
                for (const Tensor& q : params) n2.push_back(t2.leaf(q, false));
                return t2.value(build(t2, n2)).data[0];
            };
            double f_plus = eval(saved + h);
            double f_minus = eval(saved - h);
            double f_plus2 = eval(saved + h / 2);
            double f_minus2 = eval(saved - h / 2);
            double fd_h = (f_plus - f_minus) / (2.0 * h);
            double fd_h2 = (f_plus2 - f_minus2) / h;
            params[p].data[i] = saved;
            result.total += 1;

            double spread =
                std::abs(fd_h - fd_h2) / std::max({std::abs(fd_h), std::abs(fd_h2), floor_});
            // Point-kink: the forward/backward gap converges to the one-sided
            // slope difference instead of shrinking linearly with h.
            double gap_h = std::abs((f_plus - f0) - (f0 - f_minus)) / h;
            double gap_h2 = std::abs((f_plus2 - f0) - (f0 - f_minus2)) / (h / 2);
            bool point_kink = gap_h > 1e-3 * std::max({std::abs(fd_h), floor_}) &&
                              gap_h2 > 0.75 * gap_h;
            if (spread > 1e-3 || point_kink) {
                result.kinks += 1;
                continue;
            }
            double ad = analytic[p].data[i];
            double denom = std::max({std::abs(fd_h2), std::abs(ad), floor_});
            result.max_rel = std::max(result.max_rel, std::abs(fd_h2 - ad) / denom);
        }
    }
    return result;
}

inline double gradcheck(std::vector<Tensor> params,
                        const std::function<int(Tape&, const std::vector<int>&)>& build,
                        double h = 1e-5, double floor_ = 1e-3) {
    GradcheckResult result = gradcheck_filtered(std::move(params), build, h, floor_);
    // Keep the check meaningful: at least 90% of elements must be verified.
    if (result.kinks * 10 > result.total) return 1.0;
    return result.max_rel;
}

}  // namespace pcdn::test
