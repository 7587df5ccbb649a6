// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcdenoise/rng.hpp"

namespace pcdn {

// Dense row-major tensor of 64-bit floats.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> shape_, std::vector<double> data_);

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, double value);

    int64_t numel() const;
    int rows() const { return shape.empty() ? 0 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * static_cast<size_t>(cols()) +
                                            static_cast<size_t>(c)]; }
    double at(int r, int c) const {
        return data[static_cast<size_t>(r) * static_cast<size_t>(cols()) + static_cast<size_t>(c)];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;
};

// Reverse-mode tape over 2-D tensors. Nodes are created in topological order
// by construction; backward() walks them once in reverse. Values are checked
// for NaN/Inf after every operation.
class Tape {
  public:
    // Leaves. Gradients accumulate only into nodes created with grad = true
    // (and everything downstream of them).
    int leaf(Tensor value, bool grad);
    int constant(Tensor value) { return leaf(std::move(value), false); }

    // Primitives. All inputs are node ids; shapes are validated and a
    // ShapeError carrying both shapes is thrown on mismatch.
    int matmul(int a, int b);
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);
    int mul_colvec(int a, int col);      // [m,d] * [m,1], broadcast across columns
    int add_rowvec(int a, int row);      // [m,d] + [1,d], broadcast across rows
    int relu(int a);
    int leaky_relu(int a, double slope);
    int softmax_rows(int a);             // softmax along the last axis
    int concat_cols(int a, int b);
    int gather_rows(int a, std::vector<int> indices);
    int group_max(int a, int group);     // [m,d] -> [m/group,d], max over row groups
    int group_sum(int a, int group);
    int reduce_mean(int a);              // -> [1,1]
    int scale(int a, double c);
    int mse(int a, int b);               // mean squared element difference -> [1,1]
    int reshape(int a, std::vector<int> shape);

    const Tensor& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
    const Tensor& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }

    // Reverse pass from a scalar node. Seeds d(loss)/d(loss) = 1.
    void backward(int loss_id);

    size_t size() const { return nodes_.size(); }

  private:
    enum class Op {
        leaf,
        matmul,
        add,
        sub,
        mul,
        mul_colvec,
        add_rowvec,
        relu,
        leaky_relu,
        softmax_rows,
        concat_cols,
        gather_rows,
        group_max,
        group_sum,
        reduce_mean,
        scale,
        mse,
        reshape,
    };

    struct Node {
        Op op = Op::leaf;
        int a = -1;
        int b = -1;
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::vector<int> indices;  // gather targets or group_max argmax cache
        int group = 0;
        double c = 0.0;
    };

    int push(Node node, const char* op_name);
    bool needs_grad(int a, int b = -1) const;

    std::vector<Node> nodes_;
};

// Named parameter store with Adam state.
struct ModelParams {
    struct Entry {
        std::string name;
        Tensor value;
        Tensor m;  // first moment
        Tensor v;  // second moment
    };

    std::vector<Entry> entries;
    int64_t step = 0;

    Tensor& add(const std::string& name, Tensor init);
    const Entry& at(const std::string& name) const;
    Entry& at(const std::string& name);
    bool has(const std::string& name) const;
    int64_t total_values() const;
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One Adam update with bias correction. grads align with params.entries.
void adam_step(ModelParams& params, std::span<const Tensor> grads, const AdamConfig& config);

// Binary checkpoint: little-endian, versioned header (magic, version, header
// blob, record count) followed by name/shape/values records. Adam moments and
// the step counter ride along as records with reserved '@' name suffixes.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     std::span<const uint8_t> header_blob);
std::pair<ModelParams, std::vector<uint8_t>> load_checkpoint(const std::string& path);

}  // namespace pcdn
