// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pcdenoise/errors.hpp"
#include "pcdenoise/sampler.hpp"

namespace pcdn {

namespace {

std::vector<Vec3> tensor_to_vecs(const Tensor& t) {
    std::vector<Vec3> out(static_cast<size_t>(t.rows()));
    for (int i = 0; i < t.rows(); ++i) out[static_cast<size_t>(i)] = {t.at(i, 0), t.at(i, 1),
                                                                      t.at(i, 2)};
    return out;
}

Tensor vecs_to_tensor(std::span<const Vec3> v) {
    Tensor t = Tensor::zeros({static_cast<int>(v.size()), 3});
    for (size_t i = 0; i < v.size(); ++i) {
        t.data[3 * i] = v[i].x;
        t.data[3 * i + 1] = v[i].y;
        t.data[3 * i + 2] = v[i].z;
    }
    return t;
}

// Uniform random rotation (quaternion of four normals) and uniform scale.
PointCloud augment_cloud(const PointCloud& cloud, Rng& rng) {
    double q[4];
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& v : q) {
            v = rng.normal();
            norm += v * v;
        }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm, z = q[3] / norm;
    double R[3][3] = {
        {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
        {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
        {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)},
    };
    double scale = rng.uniform(0.8, 1.25);
    PointCloud out;
    out.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) {
        Vec3 r{R[0][0] * p.x + R[0][1] * p.y + R[0][2] * p.z,
               R[1][0] * p.x + R[1][1] * p.y + R[1][2] * p.z,
               R[2][0] * p.x + R[2][1] * p.y + R[2][2] * p.z};
        out.points.push_back(r * scale);
    }
    return out;
}

struct PatchDraw {
    PointCloud patch;
    std::vector<bool> mask;
    int t = 0;
    int delta = 0;
    PointCloud x_t;
};

PatchDraw draw_patch(const PointCloud& clean, const DiffusionSchedule& schedule,
                     const TrainConfig& config, Rng& rng) {
    int n = clean.size();
    if (n < config.patch_size)
        throw InvalidInput("sample_training_step: cloud smaller than patch_size");

    int seed_point = static_cast<int>(rng.uniform_int(0, n - 1));
    NeighborIndex index(clean);
    std::vector<int> indices = index.query(clean[seed_point], config.patch_size);
    Patch patch = make_patch(clean, std::move(indices), seed_point, config.K_p);

    PatchDraw draw;
    draw.patch.points.reserve(patch.indices.size());
    for (int i : patch.indices) draw.patch.points.push_back(clean[i]);
    draw.mask = std::move(patch.mask);
    draw.t = static_cast<int>(rng.uniform_int(1, schedule.T));
    draw.delta = static_cast<int>(rng.uniform_int(1, draw.t));
    draw.x_t = forward_sample(schedule, draw.patch, draw.t, rng);
    return draw;
}

std::vector<int> mask_indices(const std::vector<bool>& mask) {
    std::vector<int> idx;
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) idx.push_back(static_cast<int>(i));
    return idx;
}

double loss_weight(double sigma_bar_t, double lambda) {
    if (!(sigma_bar_t > 0.0)) throw InvalidInput("loss: sigma_bar_t must be > 0");
    if (lambda < 0.0 || lambda > 1.0) throw InvalidInput("loss: lambda must be in [0,1]");
    return (1.0 - lambda) / sigma_bar_t + lambda;
}

// Stage-2 clouds can sit at timestep 0 where the Eq-style weight is
// undefined; weight them with the smallest in-range timestep instead.
double stage_sigma(const DiffusionSchedule& schedule, int t) {
    return schedule.sigma_bar(std::max(t, 1));
}

int build_masked_loss(Tape& tape, int pred_node, std::span<const Vec3> truth,
                      const std::vector<int>& mask_idx, double weight) {
    int diff = tape.sub(pred_node, tape.constant(vecs_to_tensor(truth)));
    int masked = tape.gather_rows(diff, mask_idx);
    int sq = tape.mul(masked, masked);
    int rowsum = tape.matmul(sq, tape.constant(Tensor({3, 1}, {1.0, 1.0, 1.0})));
    return tape.scale(tape.reduce_mean(rowsum), weight * weight);
}

}  // namespace

void TrainConfig::validate() const {
    if (T < 1) throw InvalidInput("TrainConfig: T must be >= 1");
    if (!(beta_T > 0.0) || !(beta_T < 1.0)) throw InvalidInput("TrainConfig: beta_T in (0,1)");
    if (patch_size < 1) throw InvalidInput("TrainConfig: patch_size must be positive");
    if (K_p < 1 || K_p > patch_size) throw InvalidInput("TrainConfig: need 1 <= K_p <= patch_size");
    if (lambda < 0.0 || lambda > 1.0) throw InvalidInput("TrainConfig: lambda in [0,1]");
    if (!(lr > 0.0)) throw InvalidInput("TrainConfig: lr must be positive");
    if (iterations < 1) throw InvalidInput("TrainConfig: iterations must be >= 1");
}

std::vector<Vec3> ground_truth_score(const PointCloud& x, const PointCloud& x0) {
    if (x0.empty()) throw InvalidInput("ground_truth_score: empty clean cloud");
    NeighborIndex index(x0);
    std::vector<Vec3> out;
    out.reserve(x.points.size());
    for (const Vec3& p : x.points) out.push_back(x0[index.nearest(p)] - p);
    return out;
}

double loss_value(std::span<const Vec3> pred, std::span<const Vec3> truth, double sigma_bar_t,
                  double lambda) {
    if (pred.size() != truth.size()) throw InvalidInput("loss: pred/truth length mismatch");
    if (pred.empty()) throw InvalidInput("loss: empty inputs");
    double w = loss_weight(sigma_bar_t, lambda);
    double sum = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - truth[i]).norm_sq();
    return w * w * sum / static_cast<double>(pred.size());
}

TrainSample sample_training_step(const PointCloud& clean, const DiffusionSchedule& schedule,
                                 const TrainConfig& config, const ScoreNet& net, Rng& rng) {
    PatchDraw draw = draw_patch(clean, schedule, config, rng);

    TrainSample sample;
    sample.t = draw.t;
    sample.delta = draw.delta;
    sample.mask = draw.mask;

    std::vector<Vec3> pred_t = network_scores(net, draw.x_t, draw.x_t, draw.t, schedule.T);
    sample.x_t_minus_delta =
        reverse_step(schedule, draw.x_t, pred_t, draw.t, draw.t - draw.delta, 0.0, rng);
    sample.truth_t = ground_truth_score(draw.x_t, draw.patch);
    sample.truth_t_minus = ground_truth_score(sample.x_t_minus_delta, draw.patch);
    sample.clean_patch = std::move(draw.patch);
    sample.x_t = std::move(draw.x_t);
    return sample;
}

TrainResult train(std::span<const PointCloud> shapes, const TrainConfig& config,
                  const TrainCallback& callback) {
    config.validate();
    if (shapes.empty()) throw InvalidInput("train: need at least one clean cloud");

    DiffusionSchedule schedule = linear_schedule(config.T, config.beta_T);
    TrainResult result;
    result.net = ScoreNet::init(config.hyper, config.seed);
    result.history.reserve(static_cast<size_t>(config.iterations));

    Rng rng(derive_stream(config.seed, 0x7261696eULL));
    AdamConfig adam;
    adam.lr = config.lr;

    for (int iter = 1; iter <= config.iterations; ++iter) {
        try {
            const PointCloud& shape = shapes[static_cast<size_t>((iter - 1) %
                                                                 static_cast<int>(shapes.size()))];
            PointCloud prepared = config.augment ? augment_cloud(shape, rng) : shape;
            PatchDraw draw = draw_patch(prepared, schedule, config, rng);
            std::vector<int> mask_idx = mask_indices(draw.mask);

            Tape tape;
            TapeBinding bp = bind_params(tape, result.net, true);

            int pred_t_node =
                build_network_scores(tape, bp, draw.x_t, draw.x_t, draw.t, schedule.T);

            // Stage 2 input is the network-updated cloud, detached from the
            // stage-1 graph.
            std::vector<Vec3> pred_t = tensor_to_vecs(tape.value(pred_t_node));
            int t_prev = draw.t - draw.delta;
            PointCloud x_prev = reverse_step(schedule, draw.x_t, pred_t, draw.t, t_prev, 0.0, rng);
            int pred_prev_node =
                build_network_scores(tape, bp, x_prev, draw.x_t, t_prev, schedule.T);

            std::vector<Vec3> truth_t = ground_truth_score(draw.x_t, draw.patch);
            std::vector<Vec3> truth_prev = ground_truth_score(x_prev, draw.patch);

            double sigma_t = schedule.sigma_bar(draw.t);
            int loss_t = build_masked_loss(tape, pred_t_node, truth_t, mask_idx,
                                           loss_weight(sigma_t, config.lambda));
            int loss_prev =
                build_masked_loss(tape, pred_prev_node, truth_prev, mask_idx,
                                  loss_weight(stage_sigma(schedule, t_prev), config.lambda));
            int total = tape.add(loss_t, loss_prev);
            tape.backward(total);

            std::vector<Tensor> grads;
            grads.reserve(bp.param_nodes.size());
            for (int node : bp.param_nodes) grads.push_back(tape.grad(node));
            adam_step(result.net.params, grads, adam);

            TrainRecord record;
            record.iteration = iter;
            record.loss = tape.value(total).data[0];
            record.sigma_bar_t = sigma_t;
            record.t = draw.t;
            record.delta = draw.delta;
            result.history.push_back(record);
            if (callback) callback(record);
        } catch (const NumericalError& e) {
            throw NumericalError("train: iteration " + std::to_string(iter) + ": " + e.what());
        }

        if (!config.checkpoint_path.empty() && config.checkpoint_every > 0 &&
            iter % config.checkpoint_every == 0)
            save_model(config.checkpoint_path, result.net);
    }

    if (!config.checkpoint_path.empty()) save_model(config.checkpoint_path, result.net);
    return result;
}

void write_loss_history(const std::string& path, std::span<const TrainRecord> history) {
    std::ofstream os(path);
    if (!os) throw IoError("write_loss_history: cannot open " + path);
    os << "iteration,loss,sigma_bar_t,t,delta\n";
    os.precision(12);
    for (const TrainRecord& r : history)
        os << r.iteration << ',' << r.loss << ',' << r.sigma_bar_t << ',' << r.t << ',' << r.delta
           << '\n';
    if (!os) throw IoError("write_loss_history: write failed for " + path);
}

}  // namespace pcdn
