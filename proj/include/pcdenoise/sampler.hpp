// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcdenoise/geometry.hpp"
#include "pcdenoise/schedule.hpp"
#include "pcdenoise/score_model.hpp"

namespace pcdn {

enum class SamplerMode { adaptive, fixed, one_step, gdm };

SamplerMode sampler_mode_from_string(const std::string& s);
std::string to_string(SamplerMode m);

struct SamplerConfig {
    SamplerMode mode = SamplerMode::adaptive;
    double eta = 0.0;        // sampling noise weight in [0, 1]
    int L = 5;               // adaptive schedule length
    uint64_t seed = 0;
    int patch_size = 1000;
    int patch_count = 0;     // 0: smallest count achieving full coverage
    Calibration calibration = Calibration::chi3;
    int jobs = 1;
    // FixedSched parameters; the paper gives no values, these are arbitrary.
    double fixed_alpha = 0.99;
    double fixed_alpha_decay = 0.95;
    int fixed_steps = 5;

    void validate() const;
};

// Closed-form per-step quantities of the reverse process.
struct StepCoefficients {
    int t = 0;
    int t_minus_delta = 0;
    double sigma_cap = 0.0;  // capital-sigma variance of the DDPM posterior
    double sigma_eta = 0.0;  // eta * sigma_cap
    double mu_coeff = 0.0;   // scalar applied to the score in the mean update
};

// Throws NumericalError naming (t, delta, eta) if the square root argument
// turns negative (possible for eta outside [0, 1]).
StepCoefficients step_coefficients(const DiffusionSchedule& schedule, int t, int t_minus_delta,
                                   double eta);

// x^{t-delta} = x^t + mu_coeff * s + z, z ~ N(0, sigma_eta I). No random
// draws occur when sigma_eta == 0, so the eta = 0 step is deterministic.
PointCloud reverse_step(const DiffusionSchedule& schedule, const PointCloud& x_t,
                        std::span<const Vec3> scores, int t, int t_minus_delta, double eta,
                        Rng& rng);

// Generative-DDPM ablation step, including the 1/sqrt(alpha_t) rescaling that
// reintroduces the shifting problem:
// x^{t-1} = (x^t - beta_t / sqrt(1 - alpha_bar_t) * s) / sqrt(alpha_t) + z,
// z ~ N(0, beta_t I).
PointCloud gdm_reverse_step(const DiffusionSchedule& schedule, const PointCloud& x_t,
                            std::span<const Vec3> scores, int t, Rng& rng);

// FixedSched ablation: alpha * alpha_decay^l treated as fractions of the
// training schedule's terminal noise variance and mapped to timesteps through
// the monotone sigma_bar_sq correspondence.
AdaptiveSchedule fixed_schedule(const DiffusionSchedule& schedule, double alpha,
                                double alpha_decay, int steps);

struct DenoiseReport {
    double sigma_bar_sq_raw = -1.0;
    double sigma_bar_sq = -1.0;
    double sigma_hat = -1.0;  // sqrt of the calibrated estimate
    int tau_hat = -1;
    std::vector<int> schedule_steps;           // taus, ascending, ending at tau_hat
    std::vector<double> step_mean_displacement;  // per iteration, normalized frame
    int patch_count = 0;

    std::string text() const;
};

// Algorithm: normalize, extract overlapping patches, estimate the noise
// variance from concatenated whole-cloud scores, match tau_hat, build the
// iterative schedule, denoise every patch independently (reproducible
// per-patch RNG streams, optionally in parallel), stitch, denormalize.
std::pair<PointCloud, DenoiseReport> denoise(const PointCloud& noisy, ScoreProvider& provider,
                                             const DiffusionSchedule& schedule,
                                             const SamplerConfig& config);

}  // namespace pcdn
