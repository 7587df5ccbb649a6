// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcdenoise/geometry.hpp"
#include "pcdenoise/nn.hpp"

namespace pcdn {

// Produces per-point score vectors s(x^t | x^T) pointing toward the
// underlying surface. `current` is the cloud being denoised at timestep t,
// `original` the input noisy cloud the iteration started from. Implementations
// must be safe for concurrent scores() calls.
class ScoreProvider {
  public:
    virtual ~ScoreProvider() = default;

    virtual std::vector<Vec3> scores(const PointCloud& current, const PointCloud& original, int t,
                                     int T) const = 0;

    // Called by the denoising driver after normalizing its input, so providers
    // holding references in the caller's frame can follow the transform
    // (normalized = (x - center) / scale).
    virtual void set_frame(const Vec3& center, double scale) { (void)center; (void)scale; }
};

// Analytic oracle: scores(x) = NN(x, clean) - x against a clean reference.
class OracleScore : public ScoreProvider {
  public:
    explicit OracleScore(PointCloud clean_reference);

    std::vector<Vec3> scores(const PointCloud& current, const PointCloud& original, int t,
                             int T) const override;
    void set_frame(const Vec3& center, double scale) override;

  private:
    PointCloud reference_;  // as given by the caller
    PointCloud framed_;     // reference mapped into the active frame
    std::unique_ptr<NeighborIndex> index_;
};

enum class FusionMode { fused, F_T, F_t, F_mean };
enum class GradFusionMode { weighted, constant, k1 };

FusionMode fusion_mode_from_string(const std::string& s);
GradFusionMode grad_fusion_mode_from_string(const std::string& s);
std::string to_string(FusionMode m);
std::string to_string(GradFusionMode m);

struct ScoreModelHyper {
    int feature_dim = 32;   // per-point feature width d
    int graph_layers = 3;   // edge-conv stack depth
    int graph_k = 16;       // neighbors per edge-conv
    int fusion_k = 32;      // gradient candidates per point
    int pe_freqs = 4;       // sin/cos frequencies for position and timestep
    FusionMode fusion = FusionMode::fused;
    GradFusionMode grad_fusion = GradFusionMode::weighted;

    int pos_encoding_dim() const { return 3 + 6 * pe_freqs; }
    int time_embedding_dim() const { return 2 * pe_freqs; }
};

// The trainable score network: feature extraction (dynamic edge convolutions),
// feature fusion, per-neighbor gradient prediction, and gradient fusion.
struct ScoreNet {
    ScoreModelHyper hyper;
    ModelParams params;

    static ScoreNet init(const ScoreModelHyper& hyper, uint64_t seed);
};

// Parameter leaves registered on a tape, aligned with params.entries.
struct TapeBinding {
    std::vector<int> param_nodes;
    const ScoreNet* net = nullptr;

    int id(const std::string& name) const;
};

TapeBinding bind_params(Tape& tape, const ScoreNet& net, bool requires_grad);

// Neighbor lists of the dynamic feature graph, one flat [n * graph_k] list
// per layer. Passing a partially filled object reuses the stored layers and
// appends any missing ones, which pins the graph across repeated builds.
struct FeatureGraphs {
    std::vector<std::vector<int>> per_layer;
};

// Graph builders. All return tape node ids.
int build_features(Tape& tape, const TapeBinding& bp, std::span<const Vec3> pts,
                   FeatureGraphs* graphs = nullptr);                               // [n,d]
int build_fused_features(Tape& tape, const TapeBinding& bp, std::span<const Vec3> pts_t, int t,
                         int T, int feat_t_node, int feat_T_node);                 // [n,d]
// rel_node: [m,3] relative coordinates v - x_i; feat_node: [m,d] per-row
// features. Returns (gradient [m,3], importance logit [m,1]).
std::pair<int, int> build_gradient_predictor(Tape& tape, const TapeBinding& bp, int rel_node,
                                             int feat_node);
// Per-point neighbor gradients predicted from the fused features and reduced
// by the configured gradient fusion. pts_t must be centered.
int build_score_head(Tape& tape, const TapeBinding& bp, std::span<const Vec3> pts_t,
                     int fused_node);                                             // [n,3]
// Full pipeline: centers both clouds at the centroid of `original`, extracts
// and fuses features, predicts per-neighbor gradients, and fuses them.
int build_network_scores(Tape& tape, const TapeBinding& bp, const PointCloud& current,
                         const PointCloud& original, int t, int T);               // [n,3]

// Value-level entry points.
Tensor extract_features(const ScoreNet& net, const PointCloud& cloud);
Tensor fuse_features(const ScoreNet& net, const PointCloud& x_t, int t, int T,
                     const Tensor& feat_t, const Tensor& feat_T);
std::pair<Vec3, double> predict_gradient(const ScoreNet& net, const Vec3& v, const Vec3& x_i,
                                         std::span<const double> feature);
Vec3 fuse_gradients(std::span<const Vec3> gs, std::span<const double> ws, GradFusionMode mode);
std::vector<Vec3> network_scores(const ScoreNet& net, const PointCloud& x_t,
                                 const PointCloud& x_T, int t, int T);

class NetworkScore : public ScoreProvider {
  public:
    explicit NetworkScore(ScoreNet net) : net_(std::move(net)) {}

    std::vector<Vec3> scores(const PointCloud& current, const PointCloud& original, int t,
                             int T) const override;

    const ScoreNet& net() const { return net_; }
    ScoreNet& net() { return net_; }

  private:
    ScoreNet net_;
};

// Checkpoints carry the hyperparameters in the header blob.
void save_model(const std::string& path, const ScoreNet& net);
ScoreNet load_model(const std::string& path);

}  // namespace pcdn
