// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/score_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "pcdenoise/errors.hpp"

namespace pcdn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Chunk size (rows) for memory-bounded inference evaluation.
constexpr int kInferenceChunk = 8192;

std::vector<Vec3> centered(const PointCloud& cloud, const Vec3& c) {
    std::vector<Vec3> out;
    out.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) out.push_back(p - c);
    return out;
}

// Brute-force k nearest rows in feature space, (distance, index) tie-break.
std::vector<int> feature_knn_flat(const Tensor& feats, int k) {
    int n = feats.rows(), d = feats.cols();
    std::vector<int> flat(static_cast<size_t>(n) * static_cast<size_t>(k));
    std::vector<std::pair<double, int>> cand(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double d2 = 0.0;
            for (int c = 0; c < d; ++c) {
                double diff = feats.at(i, c) - feats.at(j, c);
                d2 += diff * diff;
            }
            cand[static_cast<size_t>(j)] = {d2, j};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (int c = 0; c < k; ++c)
            flat[static_cast<size_t>(i) * static_cast<size_t>(k) + static_cast<size_t>(c)] =
                cand[static_cast<size_t>(c)].second;
    }
    return flat;
}

std::vector<int> coord_knn_flat(std::span<const Vec3> pts, int k) {
    PointCloud cloud(std::vector<Vec3>(pts.begin(), pts.end()));
    NeighborIndex index(cloud);
    std::vector<int> flat;
    flat.reserve(pts.size() * static_cast<size_t>(k));
    for (const Vec3& p : pts) {
        std::vector<int> idx = index.query(p, k);
        flat.insert(flat.end(), idx.begin(), idx.end());
    }
    return flat;
}

std::vector<int> repeat_each(int n, int k) {
    std::vector<int> out(static_cast<size_t>(n) * static_cast<size_t>(k));
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c)
            out[static_cast<size_t>(i) * static_cast<size_t>(k) + static_cast<size_t>(c)] = i;
    return out;
}

Tensor coords_tensor(std::span<const Vec3> pts) {
    Tensor t = Tensor::zeros({static_cast<int>(pts.size()), 3});
    for (size_t i = 0; i < pts.size(); ++i) {
        t.data[3 * i] = pts[i].x;
        t.data[3 * i + 1] = pts[i].y;
        t.data[3 * i + 2] = pts[i].z;
    }
    return t;
}

// 3 raw coordinates plus sin/cos at pe_freqs octave frequencies per axis.
Tensor positional_encoding(std::span<const Vec3> pts, int pe_freqs) {
    int dims = 3 + 6 * pe_freqs;
    Tensor t = Tensor::zeros({static_cast<int>(pts.size()), dims});
    for (size_t i = 0; i < pts.size(); ++i) {
        double raw[3] = {pts[i].x, pts[i].y, pts[i].z};
        int col = 0;
        for (double v : raw) t.at(static_cast<int>(i), col++) = v;
        for (int f = 0; f < pe_freqs; ++f) {
            double freq = kPi * static_cast<double>(1 << f);
            for (double v : raw) {
                t.at(static_cast<int>(i), col++) = std::sin(freq * v);
                t.at(static_cast<int>(i), col++) = std::cos(freq * v);
            }
        }
    }
    return t;
}

Tensor time_embedding(double t_over_T, int n, int pe_freqs) {
    Tensor t = Tensor::zeros({n, 2 * pe_freqs});
    for (int f = 0; f < pe_freqs; ++f) {
        double freq = kPi * static_cast<double>(1 << f);
        double s = std::sin(freq * t_over_T);
        double c = std::cos(freq * t_over_T);
        for (int i = 0; i < n; ++i) {
            t.at(i, 2 * f) = s;
            t.at(i, 2 * f + 1) = c;
        }
    }
    return t;
}

void he_init(Tensor& w, int fan_in, double gain, Rng& rng) {
    double limit = gain * std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : w.data) v = rng.uniform(-limit, limit);
}

void add_linear(ModelParams& params, const std::string& prefix, int in, int out, double gain,
                Rng& rng) {
    Tensor w = Tensor::zeros({in, out});
    he_init(w, in, gain, rng);
    params.add(prefix + ".w", std::move(w));
    params.add(prefix + ".b", Tensor::zeros({1, out}));
}

void add_mlp3(ModelParams& params, const std::string& prefix, int in, int hidden, int out,
              Rng& rng) {
    add_linear(params, prefix + ".1", in, hidden, 1.0, rng);
    add_linear(params, prefix + ".2", hidden, hidden, 1.0, rng);
    add_linear(params, prefix + ".3", hidden, out, 1.0, rng);
}

int linear(Tape& tape, const TapeBinding& bp, const std::string& prefix, int x) {
    return tape.add_rowvec(tape.matmul(x, bp.id(prefix + ".w")), bp.id(prefix + ".b"));
}

int mlp3(Tape& tape, const TapeBinding& bp, const std::string& prefix, int x) {
    int h = tape.relu(linear(tape, bp, prefix + ".1", x));
    h = tape.relu(linear(tape, bp, prefix + ".2", h));
    return linear(tape, bp, prefix + ".3", h);
}

}  // namespace

OracleScore::OracleScore(PointCloud clean_reference) : reference_(std::move(clean_reference)) {
    if (reference_.empty()) throw InvalidInput("OracleScore: empty clean reference");
    framed_ = reference_;
    index_ = std::make_unique<NeighborIndex>(framed_);
}

void OracleScore::set_frame(const Vec3& center, double scale) {
    framed_.points.clear();
    framed_.points.reserve(reference_.points.size());
    for (const Vec3& p : reference_.points) framed_.points.push_back((p - center) / scale);
    index_ = std::make_unique<NeighborIndex>(framed_);
}

std::vector<Vec3> OracleScore::scores(const PointCloud& current, const PointCloud& original,
                                      int t, int T) const {
    (void)original;
    (void)t;
    (void)T;
    std::vector<Vec3> out;
    out.reserve(current.points.size());
    for (const Vec3& p : current.points) out.push_back(framed_[index_->nearest(p)] - p);
    return out;
}

FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "fused") return FusionMode::fused;
    if (s == "FT") return FusionMode::F_T;
    if (s == "Ft") return FusionMode::F_t;
    if (s == "Fmean") return FusionMode::F_mean;
    throw InvalidInput("unknown fusion mode: " + s);
}

GradFusionMode grad_fusion_mode_from_string(const std::string& s) {
    if (s == "weighted") return GradFusionMode::weighted;
    if (s == "const") return GradFusionMode::constant;
    if (s == "k1") return GradFusionMode::k1;
    throw InvalidInput("unknown gradient fusion mode: " + s);
}

std::string to_string(FusionMode m) {
    switch (m) {
        case FusionMode::fused: return "fused";
        case FusionMode::F_T: return "FT";
        case FusionMode::F_t: return "Ft";
        case FusionMode::F_mean: return "Fmean";
    }
    return "?";
}

std::string to_string(GradFusionMode m) {
    switch (m) {
        case GradFusionMode::weighted: return "weighted";
        case GradFusionMode::constant: return "const";
        case GradFusionMode::k1: return "k1";
    }
    return "?";
}

ScoreNet ScoreNet::init(const ScoreModelHyper& hyper, uint64_t seed) {
    if (hyper.feature_dim < 1 || hyper.graph_layers < 1 || hyper.graph_k < 1 ||
        hyper.fusion_k < 1 || hyper.pe_freqs < 1)
        throw InvalidInput("ScoreNet: invalid hyperparameters");
    ScoreNet net;
    net.hyper = hyper;
    Rng rng(seed);
    int d = hyper.feature_dim;

    for (int l = 0; l < hyper.graph_layers; ++l) {
        int din = l == 0 ? 3 : d;
        std::string prefix = "enc.l" + std::to_string(l);
        add_linear(net.params, prefix + ".1", 2 * din, d, 1.0, rng);
        add_linear(net.params, prefix + ".2", d, d, 1.0, rng);
    }

    int e_in = hyper.pos_encoding_dim() + hyper.time_embedding_dim();
    add_mlp3(net.params, "fuse.e", e_in, d, d, rng);
    add_mlp3(net.params, "fuse.et", 2 * d, d, d, rng);
    add_mlp3(net.params, "fuse.eT", 2 * d, d, d, rng);
    add_mlp3(net.params, "fuse.out", d, d, d, rng);

    add_linear(net.params, "grad.in", 3 + d, d, 1.0, rng);
    for (int r = 0; r < 4; ++r) {
        std::string prefix = "grad.r" + std::to_string(r);
        add_linear(net.params, prefix + ".1", d, d, 1.0, rng);
        add_linear(net.params, prefix + ".2", d, d, 1.0, rng);
    }
    // Small head init keeps initial score predictions near zero.
    add_linear(net.params, "grad.g", d, 3, 0.1, rng);
    add_linear(net.params, "grad.w", d, 1, 0.1, rng);
    return net;
}

int TapeBinding::id(const std::string& name) const {
    for (size_t i = 0; i < net->params.entries.size(); ++i)
        if (net->params.entries[i].name == name) return param_nodes[i];
    throw InvalidInput("TapeBinding: unknown parameter " + name);
}

TapeBinding bind_params(Tape& tape, const ScoreNet& net, bool requires_grad) {
    TapeBinding bp;
    bp.net = &net;
    bp.param_nodes.reserve(net.params.entries.size());
    for (const ModelParams::Entry& e : net.params.entries)
        bp.param_nodes.push_back(tape.leaf(e.value, requires_grad));
    return bp;
}

int build_features(Tape& tape, const TapeBinding& bp, std::span<const Vec3> pts,
                   FeatureGraphs* graphs) {
    const ScoreModelHyper& hyper = bp.net->hyper;
    int n = static_cast<int>(pts.size());
    int k = hyper.graph_k;
    if (n < k) throw InvalidInput("extract_features: cloud smaller than graph_k");

    std::vector<int> self_flat = repeat_each(n, k);
    int feats = tape.constant(coords_tensor(pts));
    for (int l = 0; l < hyper.graph_layers; ++l) {
        // Layer 0 gathers neighbors in coordinate space; later layers follow
        // the feature-space graph recomputed from the previous layer output.
        std::vector<int> nbr_flat;
        if (graphs && l < static_cast<int>(graphs->per_layer.size())) {
            nbr_flat = graphs->per_layer[static_cast<size_t>(l)];
        } else {
            nbr_flat = l == 0 ? coord_knn_flat(pts, k) : feature_knn_flat(tape.value(feats), k);
            if (graphs) graphs->per_layer.push_back(nbr_flat);
        }
        int fi = tape.gather_rows(feats, self_flat);
        int fj = tape.gather_rows(feats, std::move(nbr_flat));
        int edge = tape.concat_cols(fi, tape.sub(fj, fi));
        std::string prefix = "enc.l" + std::to_string(l);
        // LeakyReLU as in DGCNN; plain relu's zero plateau also degenerates
        // the neighbor max-pool on sparse activations.
        int h = tape.leaky_relu(linear(tape, bp, prefix + ".1", edge), 0.2);
        h = tape.leaky_relu(linear(tape, bp, prefix + ".2", h), 0.2);
        feats = tape.group_max(h, k);
    }
    return feats;
}

int build_fused_features(Tape& tape, const TapeBinding& bp, std::span<const Vec3> pts_t, int t,
                         int T, int feat_t_node, int feat_T_node) {
    const ScoreModelHyper& hyper = bp.net->hyper;
    const Tensor& ft = tape.value(feat_t_node);
    const Tensor& fT = tape.value(feat_T_node);
    if (!ft.same_shape(fT))
        throw InvalidInput("fuse_features: feature shapes differ " + ft.shape_str() + " vs " +
                           fT.shape_str());
    if (ft.rows() != static_cast<int>(pts_t.size()))
        throw InvalidInput("fuse_features: features misaligned with points");

    switch (hyper.fusion) {
        case FusionMode::F_T:
            return mlp3(tape, bp, "fuse.out", feat_T_node);
        case FusionMode::F_t:
            return mlp3(tape, bp, "fuse.out", feat_t_node);
        case FusionMode::F_mean:
            return mlp3(tape, bp, "fuse.out",
                        tape.scale(tape.add(feat_t_node, feat_T_node), 0.5));
        case FusionMode::fused:
            break;
    }

    int n = static_cast<int>(pts_t.size());
    int pe = tape.constant(positional_encoding(pts_t, hyper.pe_freqs));
    int te = tape.constant(
        time_embedding(static_cast<double>(t) / static_cast<double>(T), n, hyper.pe_freqs));
    int e = mlp3(tape, bp, "fuse.e", tape.concat_cols(pe, te));
    int et = mlp3(tape, bp, "fuse.et", tape.concat_cols(e, feat_t_node));
    int eT = mlp3(tape, bp, "fuse.eT", tape.concat_cols(e, feat_T_node));
    int mix = tape.add(tape.mul(feat_t_node, et), tape.mul(feat_T_node, eT));
    return mlp3(tape, bp, "fuse.out", mix);
}

std::pair<int, int> build_gradient_predictor(Tape& tape, const TapeBinding& bp, int rel_node,
                                             int feat_node) {
    int h = tape.relu(linear(tape, bp, "grad.in", tape.concat_cols(rel_node, feat_node)));
    for (int r = 0; r < 4; ++r) {
        std::string prefix = "grad.r" + std::to_string(r);
        int hh = tape.relu(linear(tape, bp, prefix + ".1", h));
        hh = linear(tape, bp, prefix + ".2", hh);
        h = tape.add(h, hh);
    }
    int g = linear(tape, bp, "grad.g", h);
    int w = linear(tape, bp, "grad.w", h);
    return {g, w};
}

// Per-neighbor relative coordinates and the gathered feature rows feeding
// the gradient predictor, then fusion down to one vector per point.
int build_score_head(Tape& tape, const TapeBinding& bp, std::span<const Vec3> pts_t,
                     int fused_node) {
    const ScoreModelHyper& hyper = bp.net->hyper;
    int n = static_cast<int>(pts_t.size());
    int k = hyper.grad_fusion == GradFusionMode::k1 ? 1 : hyper.fusion_k;
    if (n < k) throw InvalidInput("network_scores: patch smaller than fusion_k");

    std::vector<int> nbr_flat = coord_knn_flat(pts_t, k);
    Tensor rel = Tensor::zeros({n * k, 3});
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < k; ++c) {
            const Vec3 d =
                pts_t[static_cast<size_t>(i)] -
                pts_t[static_cast<size_t>(nbr_flat[static_cast<size_t>(i * k + c)])];
            int row = i * k + c;
            rel.at(row, 0) = d.x;
            rel.at(row, 1) = d.y;
            rel.at(row, 2) = d.z;
        }
    }
    int rel_node = tape.constant(std::move(rel));
    int feat_rows = tape.gather_rows(fused_node, std::move(nbr_flat));
    auto [g, w] = build_gradient_predictor(tape, bp, rel_node, feat_rows);

    switch (hyper.grad_fusion) {
        case GradFusionMode::k1:
            return g;  // k = 1: one candidate per point
        case GradFusionMode::constant:
            return tape.scale(tape.group_sum(g, k), 1.0 / static_cast<double>(k));
        case GradFusionMode::weighted:
            break;
    }
    int wk = tape.softmax_rows(tape.reshape(w, {n, k}));
    int weights = tape.reshape(wk, {n * k, 1});
    return tape.group_sum(tape.mul_colvec(g, weights), k);
}

int build_network_scores(Tape& tape, const TapeBinding& bp, const PointCloud& current,
                         const PointCloud& original, int t, int T) {
    if (current.size() != original.size())
        throw InvalidInput("network_scores: current/original size mismatch");
    if (current.empty()) throw InvalidInput("network_scores: empty patch");
    Vec3 c = original.centroid();
    std::vector<Vec3> pts_t = centered(current, c);
    std::vector<Vec3> pts_T = centered(original, c);

    int feat_t = build_features(tape, bp, pts_t);
    int feat_T = current.points == original.points ? feat_t : build_features(tape, bp, pts_T);
    int fused = build_fused_features(tape, bp, pts_t, t, T, feat_t, feat_T);
    return build_score_head(tape, bp, pts_t, fused);
}

Tensor extract_features(const ScoreNet& net, const PointCloud& cloud) {
    Tape tape;
    TapeBinding bp = bind_params(tape, net, false);
    int node = build_features(tape, bp, cloud.points);
    return tape.value(node);
}

Tensor fuse_features(const ScoreNet& net, const PointCloud& x_t, int t, int T,
                     const Tensor& feat_t, const Tensor& feat_T) {
    Tape tape;
    TapeBinding bp = bind_params(tape, net, false);
    int node = build_fused_features(tape, bp, x_t.points, t, T, tape.constant(feat_t),
                                    tape.constant(feat_T));
    return tape.value(node);
}

std::pair<Vec3, double> predict_gradient(const ScoreNet& net, const Vec3& v, const Vec3& x_i,
                                         std::span<const double> feature) {
    if (static_cast<int>(feature.size()) != net.hyper.feature_dim)
        throw InvalidInput("predict_gradient: feature width mismatch");
    Tape tape;
    TapeBinding bp = bind_params(tape, net, false);
    Vec3 rel = v - x_i;
    int rel_node = tape.constant(Tensor({1, 3}, {rel.x, rel.y, rel.z}));
    int feat_node = tape.constant(
        Tensor({1, net.hyper.feature_dim}, std::vector<double>(feature.begin(), feature.end())));
    auto [g, w] = build_gradient_predictor(tape, bp, rel_node, feat_node);
    const Tensor& gv = tape.value(g);
    return {Vec3{gv.data[0], gv.data[1], gv.data[2]}, tape.value(w).data[0]};
}

Vec3 fuse_gradients(std::span<const Vec3> gs, std::span<const double> ws, GradFusionMode mode) {
    if (gs.empty() || gs.size() != ws.size())
        throw InvalidInput("fuse_gradients: need aligned non-empty gradients and weights");
    switch (mode) {
        case GradFusionMode::k1:
            return gs[0];
        case GradFusionMode::constant: {
            Vec3 sum;
            for (const Vec3& g : gs) sum += g;
            return sum / static_cast<double>(gs.size());
        }
        case GradFusionMode::weighted:
            break;
    }
    double mx = *std::max_element(ws.begin(), ws.end());
    double denom = 0.0;
    for (double w : ws) denom += std::exp(w - mx);
    Vec3 out;
    for (size_t i = 0; i < gs.size(); ++i) out += gs[i] * (std::exp(ws[i] - mx) / denom);
    return out;
}

std::vector<Vec3> network_scores(const ScoreNet& net, const PointCloud& x_t,
                                 const PointCloud& x_T, int t, int T) {
    Tape tape;
    TapeBinding bp = bind_params(tape, net, false);
    int node = build_network_scores(tape, bp, x_t, x_T, t, T);
    const Tensor& v = tape.value(node);
    std::vector<Vec3> out(static_cast<size_t>(v.rows()));
    for (int i = 0; i < v.rows(); ++i) out[static_cast<size_t>(i)] = {v.at(i, 0), v.at(i, 1),
                                                                      v.at(i, 2)};
    return out;
}

std::vector<Vec3> NetworkScore::scores(const PointCloud& current, const PointCloud& original,
                                       int t, int T) const {
    // Two-stage evaluation keeps tape memory bounded on large patches: fused
    // features are computed once, then the per-neighbor predictor runs on
    // row chunks with the features as constants.
    if (current.size() != original.size())
        throw InvalidInput("network_scores: current/original size mismatch");
    if (current.empty()) throw InvalidInput("network_scores: empty patch");
    const ScoreModelHyper& hyper = net_.hyper;
    int n = current.size();
    int k = hyper.grad_fusion == GradFusionMode::k1 ? 1 : hyper.fusion_k;
    if (n < k) throw InvalidInput("network_scores: patch smaller than fusion_k");

    Vec3 c = original.centroid();
    std::vector<Vec3> pts_t = centered(current, c);
    std::vector<Vec3> pts_T = centered(original, c);

    Tensor fused;
    {
        Tape tape;
        TapeBinding bp = bind_params(tape, net_, false);
        int feat_t = build_features(tape, bp, pts_t);
        int feat_T =
            current.points == original.points ? feat_t : build_features(tape, bp, pts_T);
        fused = tape.value(build_fused_features(tape, bp, pts_t, t, T, feat_t, feat_T));
    }

    std::vector<int> nbr_flat = coord_knn_flat(pts_t, k);
    std::vector<Vec3> out(static_cast<size_t>(n));

    int points_per_chunk = std::max(1, kInferenceChunk / k);
    for (int begin = 0; begin < n; begin += points_per_chunk) {
        int end = std::min(n, begin + points_per_chunk);
        int rows = (end - begin) * k;
        Tensor rel = Tensor::zeros({rows, 3});
        Tensor feat_rows = Tensor::zeros({rows, hyper.feature_dim});
        for (int i = begin; i < end; ++i) {
            for (int cc = 0; cc < k; ++cc) {
                int row = (i - begin) * k + cc;
                int j = nbr_flat[static_cast<size_t>(i * k + cc)];
                Vec3 d = pts_t[static_cast<size_t>(i)] - pts_t[static_cast<size_t>(j)];
                rel.at(row, 0) = d.x;
                rel.at(row, 1) = d.y;
                rel.at(row, 2) = d.z;
                for (int f = 0; f < hyper.feature_dim; ++f)
                    feat_rows.at(row, f) = fused.at(j, f);
            }
        }
        Tape tape;
        TapeBinding bp = bind_params(tape, net_, false);
        auto [g, w] = build_gradient_predictor(tape, bp, tape.constant(std::move(rel)),
                                               tape.constant(std::move(feat_rows)));
        int scores_node;
        switch (hyper.grad_fusion) {
            case GradFusionMode::k1:
                scores_node = g;
                break;
            case GradFusionMode::constant:
                scores_node = tape.scale(tape.group_sum(g, k), 1.0 / static_cast<double>(k));
                break;
            default: {
                int wk = tape.softmax_rows(tape.reshape(w, {end - begin, k}));
                scores_node = tape.group_sum(
                    tape.mul_colvec(g, tape.reshape(wk, {rows, 1})), k);
                break;
            }
        }
        const Tensor& v = tape.value(scores_node);
        for (int i = begin; i < end; ++i)
            out[static_cast<size_t>(i)] = {v.at(i - begin, 0), v.at(i - begin, 1),
                                           v.at(i - begin, 2)};
    }
    return out;
}

namespace {

void blob_push_i32(std::vector<uint8_t>& blob, int32_t v) {
    for (int i = 0; i < 4; ++i) blob.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

int32_t blob_read_i32(std::span<const uint8_t> blob, size_t& pos) {
    if (pos + 4 > blob.size()) throw ParseError("checkpoint: truncated hyperparameter header");
    int32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<int32_t>(blob[pos + static_cast<size_t>(i)])
                                     << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

void save_model(const std::string& path, const ScoreNet& net) {
    std::vector<uint8_t> blob;
    blob_push_i32(blob, net.hyper.feature_dim);
    blob_push_i32(blob, net.hyper.graph_layers);
    blob_push_i32(blob, net.hyper.graph_k);
    blob_push_i32(blob, net.hyper.fusion_k);
    blob_push_i32(blob, net.hyper.pe_freqs);
    blob_push_i32(blob, static_cast<int32_t>(net.hyper.fusion));
    blob_push_i32(blob, static_cast<int32_t>(net.hyper.grad_fusion));
    save_checkpoint(path, net.params, blob);
}

ScoreNet load_model(const std::string& path) {
    auto [params, blob] = load_checkpoint(path);
    ScoreNet net;
    size_t pos = 0;
    net.hyper.feature_dim = blob_read_i32(blob, pos);
    net.hyper.graph_layers = blob_read_i32(blob, pos);
    net.hyper.graph_k = blob_read_i32(blob, pos);
    net.hyper.fusion_k = blob_read_i32(blob, pos);
    net.hyper.pe_freqs = blob_read_i32(blob, pos);
    net.hyper.fusion = static_cast<FusionMode>(blob_read_i32(blob, pos));
    net.hyper.grad_fusion = static_cast<GradFusionMode>(blob_read_i32(blob, pos));
    net.params = std::move(params);
    return net;
}

}  // namespace pcdn
