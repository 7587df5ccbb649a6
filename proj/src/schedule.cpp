// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "pcdenoise/errors.hpp"

namespace pcdn {

double DiffusionSchedule::sigma_bar(int t) const {
    return std::sqrt(sigma_bar_sq[static_cast<size_t>(t)]);
}

double DiffusionSchedule::per_step_variance(int t) const {
    if (t < 1 || t > T) throw InvalidInput("per_step_variance: t out of range");
    return beta[static_cast<size_t>(t)] / alpha_bar[static_cast<size_t>(t)];
}

DiffusionSchedule linear_schedule(int T, double beta_T) {
    if (T < 1) throw InvalidInput("linear_schedule: T must be >= 1");
    if (!(beta_T > 0.0) || !(beta_T < 1.0))
        throw InvalidInput("linear_schedule: beta_T must be in (0, 1)");
    DiffusionSchedule s;
    s.T = T;
    size_t count = static_cast<size_t>(T) + 1;
    s.beta.resize(count);
    s.alpha.resize(count);
    s.alpha_bar.resize(count);
    s.sigma_bar_sq.resize(count);
    double prod = 1.0;
    // 1 - alpha_bar_t accumulated by its own recurrence
    // (1 - abar_t = (1 - abar_{t-1}) + beta_t abar_{t-1}); subtracting the
    // near-1 product would cancel catastrophically for small t.
    double one_minus_prod = 0.0;
    for (size_t t = 0; t < count; ++t) {
        s.beta[t] = beta_T * static_cast<double>(t) / static_cast<double>(T);
        s.alpha[t] = 1.0 - s.beta[t];
        if (t > 0) {
            one_minus_prod += s.beta[t] * prod;
            prod *= s.alpha[t];
        }
        s.alpha_bar[t] = prod;
        s.sigma_bar_sq[t] = one_minus_prod / prod;
    }
    return s;
}

PointCloud forward_sample(const DiffusionSchedule& schedule, const PointCloud& x0, int t,
                          Rng& rng) {
    if (t < 0 || t > schedule.T) throw InvalidInput("forward_sample: t out of range");
    double sigma = schedule.sigma_bar(t);
    PointCloud out;
    out.points.reserve(x0.points.size());
    for (const Vec3& p : x0.points) out.points.push_back(p + sigma * rng.normal3());
    return out;
}

double chi3_calibration_factor() {
    constexpr double pi = 3.14159265358979323846;
    return 1.0 / (3.0 - 8.0 / pi);
}

NoiseEstimate estimate_noise_variance(std::span<const Vec3> scores, Calibration mode) {
    if (scores.size() < 2) throw InvalidInput("estimate_noise_variance: need at least 2 scores");
    double mean = 0.0;
    for (const Vec3& s : scores) mean += s.norm();
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (const Vec3& s : scores) {
        double d = s.norm() - mean;
        var += d * d;
    }
    var /= static_cast<double>(scores.size());

    NoiseEstimate est;
    est.sigma_bar_sq_raw = var;
    est.calibration = mode == Calibration::chi3 ? chi3_calibration_factor() : 1.0;
    est.sigma_bar_sq = var * est.calibration;
    return est;
}

int match_timestep(const DiffusionSchedule& schedule, double sigma_bar_sq) {
    if (!(sigma_bar_sq >= 0.0)) throw InvalidInput("match_timestep: negative variance");
    int best = 0;
    double best_err = std::abs(schedule.sigma_bar_sq[0] - sigma_bar_sq);
    for (int t = 1; t <= schedule.T; ++t) {
        double err = std::abs(schedule.sigma_bar_sq[static_cast<size_t>(t)] - sigma_bar_sq);
        if (err < best_err) {
            best_err = err;
            best = t;
        }
    }
    return best;
}

AdaptiveSchedule adaptive_schedule(const DiffusionSchedule& schedule, int tau_hat, int L) {
    if (tau_hat < 0 || tau_hat > schedule.T)
        throw InvalidInput("adaptive_schedule: tau_hat out of range");
    if (L < 1) throw InvalidInput("adaptive_schedule: L must be >= 1");
    AdaptiveSchedule out;
    out.taus.push_back(0);
    for (int l = 1; l <= L; ++l) {
        // Candidate l * tau_hat / L rounded to the nearest training timestep;
        // exact at l = L, so the sequence always ends at tau_hat.
        double candidate = static_cast<double>(l) * static_cast<double>(tau_hat) /
                           static_cast<double>(L);
        int t = static_cast<int>(std::lround(candidate));
        if (t > out.taus.back()) out.taus.push_back(t);
    }
    return out;
}

}  // namespace pcdn
