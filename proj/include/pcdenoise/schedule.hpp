// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "pcdenoise/geometry.hpp"
#include "pcdenoise/rng.hpp"

namespace pcdn {

// Training-time diffusion schedule, indexed t = 0..T with beta_0 = 0.
// alpha_bar_t is the running product of (1 - beta_s); sigma_bar_sq_t is the
// total noise variance (1 - alpha_bar_t) / alpha_bar_t coupled with the
// clean cloud at timestep t.
struct DiffusionSchedule {
    int T = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;
    std::vector<double> sigma_bar_sq;

    double sigma_bar(int t) const;

    // Variance injected by the single step t-1 -> t: beta_t / alpha_bar_t.
    double per_step_variance(int t) const;
};

// beta_t = beta_T * t / T. Requires T >= 1 and 0 < beta_T < 1.
DiffusionSchedule linear_schedule(int T, double beta_T);

// x^t = x^0 + sigma_bar_t * z, z ~ N(0, I), one draw per coordinate.
PointCloud forward_sample(const DiffusionSchedule& schedule, const PointCloud& x0, int t,
                          Rng& rng);

// L-element iterative subsequence {tau_0 = 0 < ... < tau_L = tau_hat},
// aligned to integer timesteps of the training schedule.
struct AdaptiveSchedule {
    std::vector<int> taus;
    int iterations() const { return static_cast<int>(taus.size()) - 1; }
};

enum class Calibration { raw, chi3 };

struct NoiseEstimate {
    double sigma_bar_sq_raw = 0.0;  // Var(||score||) as-is
    double sigma_bar_sq = 0.0;      // after calibration
    double calibration = 1.0;       // factor applied to raw
};

// Inverse variance of a unit-sigma 3-dof chi distribution, 1 / (3 - 8/pi).
// Applied in chi3 mode to make the norm-variance estimate unbiased for
// isotropic Gaussian displacements.
double chi3_calibration_factor();

// Population variance of the score norms (Var(||s||)), optionally calibrated.
// Requires at least 2 scores.
NoiseEstimate estimate_noise_variance(std::span<const Vec3> scores, Calibration mode);

// Linear search for argmin_t |sigma_bar_sq_t - target|, ties to the smaller t.
int match_timestep(const DiffusionSchedule& schedule, double sigma_bar_sq);

// Interpolate tau_hat into L steps of size tau_hat / L, round each candidate
// to the nearest training timestep, and collapse duplicates. tau_hat = 0
// yields {0}: zero denoising iterations.
AdaptiveSchedule adaptive_schedule(const DiffusionSchedule& schedule, int tau_hat, int L);

}  // namespace pcdn
