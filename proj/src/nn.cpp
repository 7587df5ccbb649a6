// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pcdenoise/errors.hpp"

namespace pcdn {

Tensor::Tensor(std::vector<int> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (numel() != static_cast<int64_t>(data.size()))
        throw ShapeError("Tensor: data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str());
}

Tensor Tensor::zeros(std::vector<int> shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(static_cast<size_t>(t.numel()), value);
    return t;
}

int64_t Tensor::numel() const {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
}

void require_finite(const Tensor& t, const char* op) {
    for (double v : t.data)
        if (!std::isfinite(v))
            throw NumericalError(std::string(op) + ": non-finite value in output");
}

}  // namespace

bool Tape::needs_grad(int a, int b) const {
    bool g = nodes_[static_cast<size_t>(a)].requires_grad;
    if (b >= 0) g = g || nodes_[static_cast<size_t>(b)].requires_grad;
    return g;
}

int Tape::push(Node node, const char* op_name) {
    require_finite(node.value, op_name);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Tensor value, bool grad) {
    Node n;
    n.op = Op::leaf;
    n.value = std::move(value);
    n.requires_grad = grad;
    return push(std::move(n), "leaf");
}

int Tape::matmul(int a, int b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.shape[1] != B.shape[0])
        throw ShapeError("matmul: incompatible shapes " + A.shape_str() + " vs " + B.shape_str());
    int m = A.shape[0], p = A.shape[1], q = B.shape[1];
    Node n;
    n.op = Op::matmul;
    n.a = a;
    n.b = b;
    n.requires_grad = needs_grad(a, b);
    n.value = Tensor::zeros({m, q});
    const double* pa = A.data.data();
    const double* pb = B.data.data();
    double* pc = n.value.data.data();
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < p; ++k) {
            double aik = pa[static_cast<size_t>(i) * p + k];
            if (aik == 0.0) continue;
            const double* brow = pb + static_cast<size_t>(k) * q;
            double* crow = pc + static_cast<size_t>(i) * q;
            for (int j = 0; j < q; ++j) crow[j] += aik * brow[j];
        }
    }
    return push(std::move(n), "matmul");
}

int Tape::add(int a, int b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    require_same_shape(A, B, "add");
    Node n;
    n.op = Op::add;
    n.a = a;
    n.b = b;
    n.requires_grad = needs_grad(a, b);
    n.value = A;
    for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += B.data[i];
    return push(std::move(n), "add");
}

int Tape::sub(int a, int b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    require_same_shape(A, B, "sub");
    Node n;
    n.op = Op::sub;
    n.a = a;
    n.b = b;
    n.requires_grad = needs_grad(a, b);
    n.value = A;
    for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] -= B.data[i];
    return push(std::move(n), "sub");
}

int Tape::mul(int a, int b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    require_same_shape(A, B, "mul");
    Node n;
    n.op = Op::mul;
    n.a = a;
    n.b = b;
    n.requires_grad = needs_grad(a, b);
    n.value = A;
    for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] *= B.data[i];
    return push(std::move(n), "mul");
}

int Tape::mul_colvec(int a, int col) {
    const Tensor& A = value(a);
    const Tensor& C = value(col);
    if (C.shape.size() != 2 || C.shape[1] != 1 || C.shape[0] != A.shape[0])
        throw ShapeError("mul_colvec: shape mismatch " + A.shape_str() + " vs " + C.shape_str());
    Node n;
    n.op = Op::mul_colvec;
    n.a = a;
    n.b = col;
    n.requires_grad = needs_grad(a, col);
    n.value = A;
    int d = A.cols();
    for (int i = 0; i < A.rows(); ++i) {
        double s = C.data[static_cast<size_t>(i)];
        for (int j = 0; j < d; ++j) n.value.at(i, j) *= s;
    }
    return push(std::move(n), "mul_colvec");
}

int Tape::add_rowvec(int a, int row) {
    const Tensor& A = value(a);
    const Tensor& R = value(row);
    if (R.shape.size() != 2 || R.shape[0] != 1 || R.shape[1] != A.shape[1])
        throw ShapeError("add_rowvec: shape mismatch " + A.shape_str() + " vs " + R.shape_str());
    Node n;
    n.op = Op::add_rowvec;
    n.a = a;
    n.b = row;
    n.requires_grad = needs_grad(a, row);
    n.value = A;
    int d = A.cols();
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < d; ++j) n.value.at(i, j) += R.data[static_cast<size_t>(j)];
    return push(std::move(n), "add_rowvec");
}

int Tape::relu(int a) {
    Node n;
    n.op = Op::relu;
    n.a = a;
    n.requires_grad = needs_grad(a);
    n.value = value(a);
    for (double& v : n.value.data) v = std::max(v, 0.0);
    return push(std::move(n), "relu");
}

int Tape::leaky_relu(int a, double slope) {
    Node n;
    n.op = Op::leaky_relu;
    n.a = a;
    n.c = slope;
    n.requires_grad = needs_grad(a);
    n.value = value(a);
    for (double& v : n.value.data)
        if (v < 0.0) v *= slope;
    return push(std::move(n), "leaky_relu");
}

int Tape::softmax_rows(int a) {
    const Tensor& A = value(a);
    if (A.shape.size() != 2) throw ShapeError("softmax_rows: expected 2-D, got " + A.shape_str());
    Node n;
    n.op = Op::softmax_rows;
    n.a = a;
    n.requires_grad = needs_grad(a);
    n.value = A;
    int d = A.cols();
    for (int i = 0; i < A.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < d; ++j) mx = std::max(mx, A.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < d; ++j) {
            double e = std::exp(A.at(i, j) - mx);
            n.value.at(i, j) = e;
            sum += e;
        }
        for (int j = 0; j < d; ++j) n.value.at(i, j) /= sum;
    }
    return push(std::move(n), "softmax_rows");
}

int Tape::concat_cols(int a, int b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.shape[0] != B.shape[0])
        throw ShapeError("concat_cols: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    Node n;
    n.op = Op::concat_cols;
    n.a = a;
    n.b = b;
    n.requires_grad = needs_grad(a, b);
    int m = A.rows(), da = A.cols(), db = B.cols();
    n.value = Tensor::zeros({m, da + db});
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < da; ++j) n.value.at(i, j) = A.at(i, j);
        for (int j = 0; j < db; ++j) n.value.at(i, da + j) = B.at(i, j);
    }
    return push(std::move(n), "concat_cols");
}

int Tape::gather_rows(int a, std::vector<int> indices) {
    const Tensor& A = value(a);
    if (A.shape.size() != 2) throw ShapeError("gather_rows: expected 2-D, got " + A.shape_str());
    for (int idx : indices)
        if (idx < 0 || idx >= A.rows())
            throw InvalidInput("gather_rows: index " + std::to_string(idx) + " out of range");
    Node n;
    n.op = Op::gather_rows;
    n.a = a;
    n.requires_grad = needs_grad(a);
    int d = A.cols();
    n.value = Tensor::zeros({static_cast<int>(indices.size()), d});
    for (size_t i = 0; i < indices.size(); ++i)
        for (int j = 0; j < d; ++j) n.value.at(static_cast<int>(i), j) = A.at(indices[i], j);
    n.indices = std::move(indices);
    return push(std::move(n), "gather_rows");
}

int Tape::group_max(int a, int group) {
    const Tensor& A = value(a);
    if (A.shape.size() != 2 || group < 1 || A.shape[0] % group != 0)
        throw ShapeError("group_max: rows of " + A.shape_str() + " not divisible by group " +
                         std::to_string(group));
    Node n;
    n.op = Op::group_max;
    n.a = a;
    n.requires_grad = needs_grad(a);
    n.group = group;
    int out_rows = A.rows() / group, d = A.cols();
    n.value = Tensor::zeros({out_rows, d});
    n.indices.assign(static_cast<size_t>(out_rows) * static_cast<size_t>(d), 0);
    for (int g = 0; g < out_rows; ++g) {
        for (int j = 0; j < d; ++j) {
            int best_row = g * group;
            double best = A.at(best_row, j);
            for (int r = 1; r < group; ++r) {
                double v = A.at(g * group + r, j);
                if (v > best) {  // first maximum wins on ties
                    best = v;
                    best_row = g * group + r;
                }
            }
            n.value.at(g, j) = best;
            n.indices[static_cast<size_t>(g) * static_cast<size_t>(d) + static_cast<size_t>(j)] =
                best_row;
        }
    }
    return push(std::move(n), "group_max");
}

int Tape::group_sum(int a, int group) {
    const Tensor& A = value(a);
    if (A.shape.size() != 2 || group < 1 || A.shape[0] % group != 0)
        throw ShapeError("group_sum: rows of " + A.shape_str() + " not divisible by group " +
                         std::to_string(group));
    Node n;
    n.op = Op::group_sum;
    n.a = a;
    n.requires_grad = needs_grad(a);
    n.group = group;
    int out_rows = A.rows() / group, d = A.cols();
    n.value = Tensor::zeros({out_rows, d});
    for (int g = 0; g < out_rows; ++g)
        for (int r = 0; r < group; ++r)
            for (int j = 0; j < d; ++j) n.value.at(g, j) += A.at(g * group + r, j);
    return push(std::move(n), "group_sum");
}

int Tape::reduce_mean(int a) {
    const Tensor& A = value(a);
    Node n;
    n.op = Op::reduce_mean;
    n.a = a;
    n.requires_grad = needs_grad(a);
    double sum = 0.0;
    for (double v : A.data) sum += v;
    n.value = Tensor({1, 1}, {sum / static_cast<double>(A.data.size())});
    return push(std::move(n), "reduce_mean");
}

int Tape::scale(int a, double c) {
    Node n;
    n.op = Op::scale;
    n.a = a;
    n.c = c;
    n.requires_grad = needs_grad(a);
    n.value = value(a);
    for (double& v : n.value.data) v *= c;
    return push(std::move(n), "scale");
}

int Tape::reshape(int a, std::vector<int> shape) {
    const Tensor& A = value(a);
    Node n;
    n.op = Op::reshape;
    n.a = a;
    n.requires_grad = needs_grad(a);
    n.value = Tensor(std::move(shape), A.data);
    return push(std::move(n), "reshape");
}

int Tape::mse(int a, int b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    require_same_shape(A, B, "mse");
    Node n;
    n.op = Op::mse;
    n.a = a;
    n.b = b;
    n.requires_grad = needs_grad(a, b);
    double sum = 0.0;
    for (size_t i = 0; i < A.data.size(); ++i) {
        double d = A.data[i] - B.data[i];
        sum += d * d;
    }
    n.value = Tensor({1, 1}, {sum / static_cast<double>(A.data.size())});
    return push(std::move(n), "mse");
}

void Tape::backward(int loss_id) {
    Node& loss = nodes_[static_cast<size_t>(loss_id)];
    if (loss.value.numel() != 1) throw InvalidInput("backward: loss must be scalar");

    for (Node& n : nodes_) n.grad = Tensor();
    loss.grad = Tensor({1, 1}, {1.0});

    auto ensure = [&](int id) -> Tensor& {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
        return n.grad;
    };

    for (int id = loss_id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (!n.requires_grad || n.grad.data.empty()) continue;
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::leaf:
                break;
            case Op::matmul: {
                const Tensor& A = nodes_[static_cast<size_t>(n.a)].value;
                const Tensor& B = nodes_[static_cast<size_t>(n.b)].value;
                int m = A.shape[0], p = A.shape[1], q = B.shape[1];
                if (nodes_[static_cast<size_t>(n.a)].requires_grad) {
                    Tensor& da = ensure(n.a);
                    for (int i = 0; i < m; ++i)
                        for (int k = 0; k < p; ++k) {
                            double s = 0.0;
                            const double* grow = g.data.data() + static_cast<size_t>(i) * q;
                            const double* brow = B.data.data() + static_cast<size_t>(k) * q;
                            for (int j = 0; j < q; ++j) s += grow[j] * brow[j];
                            da.data[static_cast<size_t>(i) * p + k] += s;
                        }
                }
                if (nodes_[static_cast<size_t>(n.b)].requires_grad) {
                    Tensor& db = ensure(n.b);
                    for (int i = 0; i < m; ++i)
                        for (int k = 0; k < p; ++k) {
                            double aik = A.data[static_cast<size_t>(i) * p + k];
                            if (aik == 0.0) continue;
                            const double* grow = g.data.data() + static_cast<size_t>(i) * q;
                            double* drow = db.data.data() + static_cast<size_t>(k) * q;
                            for (int j = 0; j < q; ++j) drow[j] += aik * grow[j];
                        }
                }
                break;
            }
            case Op::add: {
                if (nodes_[static_cast<size_t>(n.a)].requires_grad) {
                    Tensor& da = ensure(n.a);
                    for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
                }
                if (nodes_[static_cast<size_t>(n.b)].requires_grad) {
                    Tensor& db = ensure(n.b);
                    for (size_t i = 0; i < g.data.size(); ++i) db.data[i] += g.data[i];
                }
                break;
            }
            case Op::sub: {
                if (nodes_[static_cast<size_t>(n.a)].requires_grad) {
                    Tensor& da = ensure(n.a);
                    for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
                }
                if (nodes_[static_cast<size_t>(n.b)].requires_grad) {
                    Tensor& db = ensure(n.b);
                    for (size_t i = 0; i < g.data.size(); ++i) db.data[i] -= g.data[i];
                }
                break;
            }
            case Op::mul: {
                const Tensor& A = nodes_[static_cast<size_t>(n.a)].value;
                const Tensor& B = nodes_[static_cast<size_t>(n.b)].value;
                if (nodes_[static_cast<size_t>(n.a)].requires_grad) {
                    Tensor& da = ensure(n.a);
                    for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i] * B.data[i];
                }
                if (nodes_[static_cast<size_t>(n.b)].requires_grad) {
                    Tensor& db = ensure(n.b);
                    for (size_t i = 0; i < g.data.size(); ++i) db.data[i] += g.data[i] * A.data[i];
                }
                break;
            }
            case Op::mul_colvec: {
                const Tensor& A = nodes_[static_cast<size_t>(n.a)].value;
                const Tensor& C = nodes_[static_cast<size_t>(n.b)].value;
                int m = A.rows(), d = A.cols();
                if (nodes_[static_cast<size_t>(n.a)].requires_grad) {
                    Tensor& da = ensure(n.a);
                    for (int i = 0; i < m; ++i) {
                        double s = C.data[static_cast<size_t>(i)];
                        for (int j = 0; j < d; ++j) da.at(i, j) += g.at(i, j) * s;
                    }
                }
                if (nodes_[static_cast<size_t>(n.b)].requires_grad) {
                    Tensor& dc = ensure(n.b);
                    for (int i = 0; i < m; ++i) {
                        double s = 0.0;
                        for (int j = 0; j < d; ++j) s += g.at(i, j) * A.at(i, j);
                        dc.data[static_cast<size_t>(i)] += s;
                    }
                }
                break;
            }
            case Op::add_rowvec: {
                int m = g.rows(), d = g.cols();
                if (nodes_[static_cast<size_t>(n.a)].requires_grad) {
                    Tensor& da = ensure(n.a);
                    for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
                }
                if (nodes_[static_cast<size_t>(n.b)].requires_grad) {
                    Tensor& dr = ensure(n.b);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < d; ++j) dr.data[static_cast<size_t>(j)] += g.at(i, j);
                }
                break;
            }
            case Op::relu: {
                const Tensor& A = nodes_[static_cast<size_t>(n.a)].value;
                Tensor& da = ensure(n.a);
                for (size_t i = 0; i < g.data.size(); ++i)
                    if (A.data[i] > 0.0) da.data[i] += g.data[i];
                break;
            }
            case Op::leaky_relu: {
                const Tensor& A = nodes_[static_cast<size_t>(n.a)].value;
                Tensor& da = ensure(n.a);
                for (size_t i = 0; i < g.data.size(); ++i)
                    da.data[i] += (A.data[i] > 0.0 ? 1.0 : n.c) * g.data[i];
                break;
            }
            case Op::softmax_rows: {
                Tensor& da = ensure(n.a);
                int m = g.rows(), d = g.cols();
                for (int i = 0; i < m; ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < d; ++j) dot += g.at(i, j) * n.value.at(i, j);
                    for (int j = 0; j < d; ++j)
                        da.at(i, j) += (g.at(i, j) - dot) * n.value.at(i, j);
                }
                break;
            }
            case Op::concat_cols: {
                int m = g.rows();
                int da_cols = nodes_[static_cast<size_t>(n.a)].value.cols();
                int db_cols = nodes_[static_cast<size_t>(n.b)].value.cols();
                if (nodes_[static_cast<size_t>(n.a)].requires_grad) {
                    Tensor& da = ensure(n.a);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < da_cols; ++j) da.at(i, j) += g.at(i, j);
                }
                if (nodes_[static_cast<size_t>(n.b)].requires_grad) {
                    Tensor& db = ensure(n.b);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < db_cols; ++j) db.at(i, j) += g.at(i, da_cols + j);
                }
                break;
            }
            case Op::gather_rows: {
                Tensor& da = ensure(n.a);
                int d = g.cols();
                for (size_t i = 0; i < n.indices.size(); ++i)
                    for (int j = 0; j < d; ++j)
                        da.at(n.indices[i], j) += g.at(static_cast<int>(i), j);
                break;
            }
            case Op::group_max: {
                Tensor& da = ensure(n.a);
                int d = g.cols();
                for (int r = 0; r < g.rows(); ++r)
                    for (int j = 0; j < d; ++j)
                        da.at(n.indices[static_cast<size_t>(r) * static_cast<size_t>(d) +
                                        static_cast<size_t>(j)],
                              j) += g.at(r, j);
                break;
            }
            case Op::group_sum: {
                Tensor& da = ensure(n.a);
                int d = g.cols();
                for (int r = 0; r < g.rows(); ++r)
                    for (int k = 0; k < n.group; ++k)
                        for (int j = 0; j < d; ++j) da.at(r * n.group + k, j) += g.at(r, j);
                break;
            }
            case Op::reduce_mean: {
                Tensor& da = ensure(n.a);
                double s = g.data[0] / static_cast<double>(da.data.size());
                for (double& v : da.data) v += s;
                break;
            }
            case Op::scale: {
                Tensor& da = ensure(n.a);
                for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += n.c * g.data[i];
                break;
            }
            case Op::reshape: {
                Tensor& da = ensure(n.a);
                for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
                break;
            }
            case Op::mse: {
                const Tensor& A = nodes_[static_cast<size_t>(n.a)].value;
                const Tensor& B = nodes_[static_cast<size_t>(n.b)].value;
                double s = 2.0 * g.data[0] / static_cast<double>(A.data.size());
                if (nodes_[static_cast<size_t>(n.a)].requires_grad) {
                    Tensor& da = ensure(n.a);
                    for (size_t i = 0; i < A.data.size(); ++i)
                        da.data[i] += s * (A.data[i] - B.data[i]);
                }
                if (nodes_[static_cast<size_t>(n.b)].requires_grad) {
                    Tensor& db = ensure(n.b);
                    for (size_t i = 0; i < A.data.size(); ++i)
                        db.data[i] -= s * (A.data[i] - B.data[i]);
                }
                break;
            }
        }
    }

    // Disconnected grad-leaves keep zero gradients rather than empty ones.
    for (Node& n : nodes_)
        if (n.requires_grad && n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
}

Tensor& ModelParams::add(const std::string& name, Tensor init) {
    if (has(name)) throw InvalidInput("ModelParams: duplicate name " + name);
    if (name.find('@') != std::string::npos)
        throw InvalidInput("ModelParams: '@' is reserved in names");
    Entry e;
    e.name = name;
    e.m = Tensor::zeros(init.shape);
    e.v = Tensor::zeros(init.shape);
    e.value = std::move(init);
    entries.push_back(std::move(e));
    return entries.back().value;
}

bool ModelParams::has(const std::string& name) const {
    for (const Entry& e : entries)
        if (e.name == name) return true;
    return false;
}

const ModelParams::Entry& ModelParams::at(const std::string& name) const {
    for (const Entry& e : entries)
        if (e.name == name) return e;
    throw InvalidInput("ModelParams: unknown name " + name);
}

ModelParams::Entry& ModelParams::at(const std::string& name) {
    for (Entry& e : entries)
        if (e.name == name) return e;
    throw InvalidInput("ModelParams: unknown name " + name);
}

int64_t ModelParams::total_values() const {
    int64_t n = 0;
    for (const Entry& e : entries) n += e.value.numel();
    return n;
}

void adam_step(ModelParams& params, std::span<const Tensor> grads, const AdamConfig& config) {
    if (grads.size() != params.entries.size())
        throw ShapeError("adam_step: got " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(params.entries.size()) + " parameters");
    params.step += 1;
    double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(params.step));
    double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(params.step));
    for (size_t e = 0; e < params.entries.size(); ++e) {
        ModelParams::Entry& entry = params.entries[e];
        const Tensor& g = grads[e];
        if (!g.same_shape(entry.value))
            throw ShapeError("adam_step: gradient shape " + g.shape_str() + " vs parameter " +
                             entry.value.shape_str() + " for " + entry.name);
        for (size_t i = 0; i < g.data.size(); ++i) {
            entry.m.data[i] = config.beta1 * entry.m.data[i] + (1.0 - config.beta1) * g.data[i];
            entry.v.data[i] =
                config.beta2 * entry.v.data[i] + (1.0 - config.beta2) * g.data[i] * g.data[i];
            double mhat = entry.m.data[i] / bc1;
            double vhat = entry.v.data[i] / bc2;
            entry.value.data[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
            if (!std::isfinite(entry.value.data[i]))
                throw NumericalError("adam_step: non-finite parameter " + entry.name);
        }
    }
}

namespace {

constexpr char kMagic[8] = {'P', 'C', 'D', 'N', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void write_u64(std::ostream& os, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

void write_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& is) {
    uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_record(std::ostream& os, const std::string& name, const Tensor& t) {
    write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) write_u64(os, static_cast<uint64_t>(d));
    for (double v : t.data) write_f64(os, v);
}

std::pair<std::string, Tensor> read_record(std::istream& is) {
    uint32_t name_len = read_u32(is);
    if (!is || name_len > (1u << 20)) throw ParseError("checkpoint: bad record name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint32_t rank = read_u32(is);
    if (!is || rank > 8) throw ParseError("checkpoint: bad record rank");
    std::vector<int> shape(rank);
    int64_t count = 1;
    for (uint32_t i = 0; i < rank; ++i) {
        shape[i] = static_cast<int>(read_u64(is));
        count *= shape[i];
    }
    if (!is || count < 0 || count > (int64_t(1) << 32))
        throw ParseError("checkpoint: bad record shape");
    std::vector<double> data(static_cast<size_t>(count));
    for (double& v : data) v = read_f64(is);
    if (!is) throw ParseError("checkpoint: truncated record " + name);
    return {std::move(name), Tensor(std::move(shape), std::move(data))};
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     std::span<const uint8_t> header_blob) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 8);
    write_u32(os, kVersion);
    write_u64(os, header_blob.size());
    os.write(reinterpret_cast<const char*>(header_blob.data()),
             static_cast<std::streamsize>(header_blob.size()));
    // Each parameter contributes value/moment1/moment2 records; the Adam step
    // counter is one more record, so readers see a flat record list.
    write_u64(os, params.entries.size() * 3 + 1);
    write_record(os, "@step", Tensor({1}, {static_cast<double>(params.step)}));
    for (const ModelParams::Entry& e : params.entries) {
        write_record(os, e.name, e.value);
        write_record(os, e.name + "@m", e.m);
        write_record(os, e.name + "@v", e.v);
    }
    if (!os) throw IoError("checkpoint: write failed for " + path);
}

std::pair<ModelParams, std::vector<uint8_t>> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw ParseError("checkpoint: bad magic in " + path);
    uint32_t version = read_u32(is);
    if (version != kVersion)
        throw ParseError("checkpoint: unsupported version " + std::to_string(version));
    uint64_t blob_len = read_u64(is);
    if (!is || blob_len > (1u << 20)) throw ParseError("checkpoint: bad header length");
    std::vector<uint8_t> blob(blob_len);
    is.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob_len));
    uint64_t records = read_u64(is);
    if (!is) throw ParseError("checkpoint: truncated header");

    ModelParams params;
    for (uint64_t r = 0; r < records; ++r) {
        auto [name, tensor] = read_record(is);
        if (name == "@step") {
            params.step = static_cast<int64_t>(tensor.data.at(0));
        } else if (name.size() > 2 && name.substr(name.size() - 2) == "@m") {
            params.at(name.substr(0, name.size() - 2)).m = std::move(tensor);
        } else if (name.size() > 2 && name.substr(name.size() - 2) == "@v") {
            params.at(name.substr(0, name.size() - 2)).v = std::move(tensor);
        } else {
            ModelParams::Entry e;
            e.name = name;
            e.m = Tensor::zeros(tensor.shape);
            e.v = Tensor::zeros(tensor.shape);
            e.value = std::move(tensor);
            params.entries.push_back(std::move(e));
        }
    }
    return {std::move(params), std::move(blob)};
}

}  // namespace pcdn
