// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "pcdenoise/errors.hpp"

namespace pcdn {

namespace {

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

PointCloud gather_points(const PointCloud& cloud, const std::vector<int>& indices) {
    PointCloud out;
    out.points.reserve(indices.size());
    for (int i : indices) out.points.push_back(cloud[i]);
    return out;
}

}  // namespace

SamplerMode sampler_mode_from_string(const std::string& s) {
    if (s == "adaptive") return SamplerMode::adaptive;
    if (s == "fixed") return SamplerMode::fixed;
    if (s == "onestep") return SamplerMode::one_step;
    if (s == "gdm") return SamplerMode::gdm;
    throw InvalidInput("unknown sampler mode: " + s);
}

std::string to_string(SamplerMode m) {
    switch (m) {
        case SamplerMode::adaptive: return "adaptive";
        case SamplerMode::fixed: return "fixed";
        case SamplerMode::one_step: return "onestep";
        case SamplerMode::gdm: return "gdm";
    }
    return "?";
}

void SamplerConfig::validate() const {
    if (!(eta >= 0.0) || !(eta <= 1.0)) throw InvalidInput("SamplerConfig: eta must be in [0,1]");
    if (L < 1) throw InvalidInput("SamplerConfig: L must be >= 1");
    if (patch_size < 1) throw InvalidInput("SamplerConfig: patch_size must be positive");
    if (jobs < 1) throw InvalidInput("SamplerConfig: jobs must be positive");
    if (mode == SamplerMode::fixed) {
        if (!(fixed_alpha > 0.0) || !(fixed_alpha <= 1.0) || !(fixed_alpha_decay > 0.0) ||
            !(fixed_alpha_decay <= 1.0) || fixed_steps < 1)
            throw InvalidInput("SamplerConfig: invalid fixed schedule parameters");
    }
}

StepCoefficients step_coefficients(const DiffusionSchedule& schedule, int t, int t_minus_delta,
                                   double eta) {
    if (t_minus_delta < 0 || t_minus_delta >= t || t > schedule.T)
        throw InvalidInput("step_coefficients: need 0 <= t-delta < t <= T");
    double ab_t = schedule.alpha_bar[static_cast<size_t>(t)];
    double ab_prev = schedule.alpha_bar[static_cast<size_t>(t_minus_delta)];

    StepCoefficients out;
    out.t = t;
    out.t_minus_delta = t_minus_delta;
    out.sigma_cap = schedule.sigma_bar_sq[static_cast<size_t>(t_minus_delta)] *
                    (ab_prev - ab_t) / ((1.0 - ab_t) * ab_prev);
    out.sigma_eta = eta * out.sigma_cap;

    double arg = (1.0 - ab_prev * (1.0 + out.sigma_eta)) * ab_t / ((1.0 - ab_t) * ab_prev);
    if (arg < 0.0) {
        std::ostringstream os;
        os << "step_coefficients: negative sqrt argument at t=" << t
           << " delta=" << (t - t_minus_delta) << " eta=" << eta;
        throw NumericalError(os.str());
    }
    out.mu_coeff = 1.0 - std::sqrt(arg);
    return out;
}

PointCloud reverse_step(const DiffusionSchedule& schedule, const PointCloud& x_t,
                        std::span<const Vec3> scores, int t, int t_minus_delta, double eta,
                        Rng& rng) {
    if (scores.size() != x_t.points.size())
        throw InvalidInput("reverse_step: scores length does not match point count");
    StepCoefficients coeff = step_coefficients(schedule, t, t_minus_delta, eta);
    double noise_std = coeff.sigma_eta > 0.0 ? std::sqrt(coeff.sigma_eta) : 0.0;
    PointCloud out;
    out.points.reserve(x_t.points.size());
    for (size_t i = 0; i < x_t.points.size(); ++i) {
        Vec3 p = x_t.points[i] + coeff.mu_coeff * scores[i];
        if (noise_std > 0.0) p += noise_std * rng.normal3();
        out.points.push_back(p);
    }
    return out;
}

PointCloud gdm_reverse_step(const DiffusionSchedule& schedule, const PointCloud& x_t,
                            std::span<const Vec3> scores, int t, Rng& rng) {
    if (t < 1 || t > schedule.T) throw InvalidInput("gdm_reverse_step: t out of range");
    if (scores.size() != x_t.points.size())
        throw InvalidInput("gdm_reverse_step: scores length does not match point count");
    double beta = schedule.beta[static_cast<size_t>(t)];
    if (beta == 0.0) return x_t;
    double alpha = schedule.alpha[static_cast<size_t>(t)];
    double ab_t = schedule.alpha_bar[static_cast<size_t>(t)];
    double score_coeff = beta / std::sqrt(1.0 - ab_t);
    double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    double noise_std = std::sqrt(beta);
    PointCloud out;
    out.points.reserve(x_t.points.size());
    for (size_t i = 0; i < x_t.points.size(); ++i) {
        Vec3 p = (x_t.points[i] - score_coeff * scores[i]) * inv_sqrt_alpha;
        p += noise_std * rng.normal3();
        out.points.push_back(p);
    }
    return out;
}

AdaptiveSchedule fixed_schedule(const DiffusionSchedule& schedule, double alpha,
                                double alpha_decay, int steps) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw InvalidInput("fixed_schedule: alpha must be in (0,1]");
    if (!(alpha_decay > 0.0) || !(alpha_decay <= 1.0))
        throw InvalidInput("fixed_schedule: alpha_decay must be in (0,1]");
    if (steps < 1) throw InvalidInput("fixed_schedule: steps must be >= 1");

    double top = schedule.sigma_bar_sq[static_cast<size_t>(schedule.T)];
    AdaptiveSchedule out;
    out.taus.push_back(0);
    std::vector<int> mapped;
    double a = alpha;
    for (int l = 0; l < steps; ++l) {
        mapped.push_back(match_timestep(schedule, a * top));
        a *= alpha_decay;
    }
    std::sort(mapped.begin(), mapped.end());
    for (int t : mapped)
        if (t > out.taus.back()) out.taus.push_back(t);
    return out;
}

std::string DenoiseReport::text() const {
    std::ostringstream os;
    os.precision(9);
    os << "sigma_bar_sq_raw = " << sigma_bar_sq_raw << '\n';
    os << "sigma_bar_sq = " << sigma_bar_sq << '\n';
    os << "sigma_hat = " << sigma_hat << '\n';
    os << "tau_hat = " << tau_hat << '\n';
    os << "patch_count = " << patch_count << '\n';
    os << "schedule_steps =";
    for (int t : schedule_steps) os << ' ' << t;
    os << '\n';
    os << "step_mean_displacement =";
    for (double d : step_mean_displacement) os << ' ' << d;
    os << '\n';
    return os.str();
}

std::pair<PointCloud, DenoiseReport> denoise(const PointCloud& noisy, ScoreProvider& provider,
                                             const DiffusionSchedule& schedule,
                                             const SamplerConfig& config) {
    config.validate();
    NormalizeResult norm = normalize_unit_sphere(noisy);
    provider.set_frame(norm.center, norm.scale);

    int patch_size = std::min(config.patch_size, norm.cloud.size());
    CoverageMode coverage =
        config.patch_count > 0 ? CoverageMode::fixed(config.patch_count) : CoverageMode::full();
    std::vector<Patch> patches = extract_patches(norm.cloud, patch_size, coverage);
    int R = static_cast<int>(patches.size());

    std::vector<PointCloud> patch_clouds(static_cast<size_t>(R));
    for (int r = 0; r < R; ++r)
        patch_clouds[static_cast<size_t>(r)] =
            gather_points(norm.cloud, patches[static_cast<size_t>(r)].indices);

    DenoiseReport report;
    report.patch_count = R;

    // Whole-cloud score estimate s(X|X): per-patch scores concatenated,
    // overlaps included.
    AdaptiveSchedule steps;
    if (config.mode == SamplerMode::fixed) {
        steps = fixed_schedule(schedule, config.fixed_alpha, config.fixed_alpha_decay,
                               config.fixed_steps);
        report.tau_hat = steps.taus.back();
    } else {
        std::vector<std::vector<Vec3>> per_patch(static_cast<size_t>(R));
        parallel_for(R, config.jobs, [&](int r) {
            const PointCloud& pc = patch_clouds[static_cast<size_t>(r)];
            per_patch[static_cast<size_t>(r)] = provider.scores(pc, pc, schedule.T, schedule.T);
        });
        std::vector<Vec3> all_scores;
        for (const auto& s : per_patch) all_scores.insert(all_scores.end(), s.begin(), s.end());
        NoiseEstimate est = estimate_noise_variance(all_scores, config.calibration);
        report.sigma_bar_sq_raw = est.sigma_bar_sq_raw;
        report.sigma_bar_sq = est.sigma_bar_sq;
        report.sigma_hat = std::sqrt(est.sigma_bar_sq);
        report.tau_hat = match_timestep(schedule, est.sigma_bar_sq);

        switch (config.mode) {
            case SamplerMode::adaptive:
                steps = adaptive_schedule(schedule, report.tau_hat, config.L);
                break;
            case SamplerMode::one_step:
                steps.taus = {0};
                if (report.tau_hat > 0) steps.taus.push_back(report.tau_hat);
                break;
            case SamplerMode::gdm:
                steps.taus.resize(static_cast<size_t>(report.tau_hat) + 1);
                std::iota(steps.taus.begin(), steps.taus.end(), 0);
                break;
            case SamplerMode::fixed:
                break;
        }
    }
    report.schedule_steps = steps.taus;

    int iterations = steps.iterations();
    std::vector<std::vector<double>> disp_sums(
        static_cast<size_t>(R), std::vector<double>(static_cast<size_t>(iterations), 0.0));

    std::vector<std::vector<Vec3>> results(static_cast<size_t>(R));
    parallel_for(R, config.jobs, [&](int r) {
        Rng rng(derive_stream(config.seed, static_cast<uint64_t>(r)));
        const PointCloud& original = patch_clouds[static_cast<size_t>(r)];
        PointCloud current = original;
        for (int l = iterations; l >= 1; --l) {
            int t = steps.taus[static_cast<size_t>(l)];
            int t_prev = steps.taus[static_cast<size_t>(l) - 1];
            std::vector<Vec3> scores = provider.scores(current, original, t, schedule.T);
            PointCloud next =
                config.mode == SamplerMode::gdm
                    ? gdm_reverse_step(schedule, current, scores, t, rng)
                    : reverse_step(schedule, current, scores, t, t_prev, config.eta, rng);
            double sum = 0.0;
            for (int i = 0; i < next.size(); ++i) sum += (next[i] - current[i]).norm();
            disp_sums[static_cast<size_t>(r)][static_cast<size_t>(iterations - l)] = sum;
            current = std::move(next);
        }
        results[static_cast<size_t>(r)] = std::move(current.points);
    });

    if (iterations > 0) {
        double total_points = 0.0;
        for (const PointCloud& pc : patch_clouds) total_points += pc.size();
        report.step_mean_displacement.assign(static_cast<size_t>(iterations), 0.0);
        for (int l = 0; l < iterations; ++l) {
            double sum = 0.0;
            for (int r = 0; r < R; ++r) sum += disp_sums[static_cast<size_t>(r)][static_cast<size_t>(l)];
            report.step_mean_displacement[static_cast<size_t>(l)] = sum / total_points;
        }
    }

    std::vector<std::pair<Patch, std::vector<Vec3>>> stitched;
    stitched.reserve(static_cast<size_t>(R));
    for (int r = 0; r < R; ++r)
        stitched.emplace_back(std::move(patches[static_cast<size_t>(r)]),
                              std::move(results[static_cast<size_t>(r)]));
    PointCloud assembled = stitch_patches(norm.cloud, stitched);
    return {denormalize(assembled, norm.center, norm.scale), report};
}

}  // namespace pcdn
