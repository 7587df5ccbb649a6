// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pcdenoise/schedule.hpp"
#include "pcdenoise/score_model.hpp"

namespace pcdn {

struct TrainConfig {
    int T = 1000;
    double beta_T = 2e-6;
    int patch_size = 1000;
    int K_p = 256;           // masked points per patch
    double lambda = 0.99;    // loss weighting
    double lr = 1e-4;
    int iterations = 10000;
    uint64_t seed = 0;
    bool augment = true;     // random rotation + uniform scale in [0.8, 1.25]
    int checkpoint_every = 0;  // 0: only at the end (when a path is given)
    std::string checkpoint_path;
    ScoreModelHyper hyper;

    void validate() const;
};

// One two-stage training sample (Algorithm 1 inner loop).
struct TrainSample {
    PointCloud clean_patch;      // x^0
    std::vector<bool> mask;      // K_p highlighted points
    int t = 0;
    int delta = 0;
    PointCloud x_t;              // stage 1 input
    PointCloud x_t_minus_delta;  // stage 2 input: x^t updated with stage-1 scores
    std::vector<Vec3> truth_t;         // S(x^t)
    std::vector<Vec3> truth_t_minus;   // S(x^{t-delta})
};

// Exact per-point nearest-neighbor displacement toward the clean cloud
// (ground-truth score field).
std::vector<Vec3> ground_truth_score(const PointCloud& x, const PointCloud& x0);

// Weighted score-matching loss over the given (already masked) points:
// mean over points of || ((1-lambda)/sigma_bar_t + lambda) (pred - truth) ||^2.
// Requires sigma_bar_t > 0.
double loss_value(std::span<const Vec3> pred, std::span<const Vec3> truth, double sigma_bar_t,
                  double lambda);

// Crop a random patch, draw (t, delta), run the two sampling stages with the
// network in `net`, and compute both ground-truth score fields.
TrainSample sample_training_step(const PointCloud& clean, const DiffusionSchedule& schedule,
                                 const TrainConfig& config, const ScoreNet& net, Rng& rng);

struct TrainRecord {
    int iteration = 0;
    double loss = 0.0;
    double sigma_bar_t = 0.0;
    int t = 0;
    int delta = 0;
};

struct TrainResult {
    ScoreNet net;
    std::vector<TrainRecord> history;
};

using TrainCallback = std::function<void(const TrainRecord&)>;

// Algorithm 1: per iteration, pick a shape (round robin), augment, sample the
// two-stage patch, sum both masked stage losses, backprop, Adam step.
TrainResult train(std::span<const PointCloud> shapes, const TrainConfig& config,
                  const TrainCallback& callback = {});

// Loss history CSV: iteration,loss,sigma_bar_t,t,delta.
void write_loss_history(const std::string& path, std::span<const TrainRecord> history);

}  // namespace pcdn
