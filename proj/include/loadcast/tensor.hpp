#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace loadcast::nn {

// Dense row-major float64 matrix. Vectors are 1 x n or n x 1, scalars 1 x 1.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }
    static Matrix full(std::size_t r, std::size_t c, double v) {
        Matrix m(r, c);
        for (double& x : m.data) x = v;
        return m;
    }
    static Matrix scalar(double v) { return full(1, 1, v); }
    static Matrix row(const std::vector<double>& v) {
        Matrix m(1, v.size());
        m.data = v;
        return m;
    }
    static Matrix column(const std::vector<double>& v) {
        Matrix m(v.size(), 1);
        m.data = v;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const {
        return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
    }
};

namespace detail {
struct Node;
}

// Handle to one node of the backward graph. Copies share the node.
class Tensor {
public:
    Tensor() = default;

    const Matrix& value() const;
    Matrix& value();
    const Matrix& grad() const;
    bool requires_grad() const;
    bool defined() const { return node_ != nullptr; }
    std::size_t rows() const { return value().rows; }
    std::size_t cols() const { return value().cols; }

    // Times this node's backward rule ran during the last backward() call.
    int backward_visits() const;

    void zero_grad();

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::Node> node_;

    friend Tensor make_tensor(Matrix value, bool requires_grad);
    friend Tensor make_op(Matrix value, std::vector<Tensor> parents,
                          std::function<void(const Matrix&, std::vector<Tensor>&)> backward);
    friend struct BackwardStats;
    friend BackwardStats backward(const Tensor& loss);
    friend detail::Node* node_of(const Tensor& t);
};

Tensor constant(Matrix value);
Tensor parameter(Matrix value);

// --- element-wise ---
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);
Tensor sigmoid(const Tensor& a);
Tensor tanh_op(const Tensor& a);
Tensor exp_op(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor abs_op(const Tensor& a);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double shift);
Tensor clamp_min(const Tensor& a, double floor);

// --- broadcasts (bias-vector style only) ---
Tensor add_rowvec(const Tensor& a, const Tensor& row);   // row: 1 x C
Tensor mul_rowvec(const Tensor& a, const Tensor& row);   // row: 1 x C
Tensor sub_colvec(const Tensor& a, const Tensor& col);   // col: R x 1
Tensor mul_colvec(const Tensor& a, const Tensor& col);   // col: R x 1
Tensor div_colvec(const Tensor& a, const Tensor& col);   // col: R x 1

// --- structure ---
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
// Same row-major buffer under a new shape; rows*cols must be preserved.
Tensor reshape(const Tensor& a, std::size_t rows, std::size_t cols);
// out(r*times + i, c) = a(r, c) for i in [0, times)
Tensor repeat_rows(const Tensor& a, std::size_t times);

// --- per-sample batched forms (B samples stacked along rows) ---
// (B x m, B x n) -> (B*m x n), sample b holding v_b k_b^T
Tensor batch_outer(const Tensor& v, const Tensor& k);
// (B*m x n, B x n) -> (B x m), sample b holding C_b q_b
Tensor batch_matvec(const Tensor& c, const Tensor& q);

// --- reductions / normalizations ---
Tensor softmax_rows(const Tensor& a);
Tensor layernorm_rows(const Tensor& a, double eps = 1e-5);
Tensor row_sum(const Tensor& a);  // R x 1
Tensor row_max(const Tensor& a);  // R x 1
Tensor sum_all(const Tensor& a);  // 1 x 1
Tensor mean_absolute_error(const Tensor& prediction, const Tensor& target);  // 1 x 1

struct BackwardStats {
    std::size_t nodes_visited = 0;
};

// Reverse-mode sweep from a scalar loss; every reachable node's backward rule
// runs exactly once.
BackwardStats backward(const Tensor& loss);

}  // namespace loadcast::nn
