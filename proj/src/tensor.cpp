#include "loadcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "loadcast/errors.hpp"

namespace loadcast::nn {

namespace detail {

struct Node {
    Matrix value;
    Matrix grad;  // allocated lazily, same shape as value
    bool requires_grad = false;
    int backward_visits = 0;
    std::vector<Tensor> parents;
    // Receives this node's upstream gradient and the parents to accumulate into.
    std::function<void(const Matrix&, std::vector<Tensor>&)> backward;

    Matrix& grad_buffer() {
        if (grad.size() == 0) grad = Matrix::zeros(value.rows, value.cols);
        return grad;
    }
};

}  // namespace detail

using detail::Node;

detail::Node* node_of(const Tensor& t) { return t.node_.get(); }

const Matrix& Tensor::value() const { return node_->value; }
Matrix& Tensor::value() { return node_->value; }
const Matrix& Tensor::grad() const { return node_->grad; }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
int Tensor::backward_visits() const { return node_ ? node_->backward_visits : 0; }

void Tensor::zero_grad() {
    if (node_ && node_->grad.size() != 0) {
        std::fill(node_->grad.data.begin(), node_->grad.data.end(), 0.0);
    }
}

Tensor make_tensor(Matrix value, bool requires_grad) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor constant(Matrix value) { return make_tensor(std::move(value), false); }
Tensor parameter(Matrix value) { return make_tensor(std::move(value), true); }

Tensor make_op(Matrix value, std::vector<Tensor> parents,
               std::function<void(const Matrix&, std::vector<Tensor>&)> backward) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    for (const Tensor& p : parents) node->requires_grad |= p.requires_grad();
    if (node->requires_grad) {
        node->parents = std::move(parents);
        node->backward = std::move(backward);
    }
    return Tensor(std::move(node));
}

namespace {

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
    throw SolveError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
}

void accumulate(Tensor& t, const Matrix& g) {
    if (!t.requires_grad()) return;
    Matrix& buf = node_of(t)->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) buf.data[i] += g.data[i];
}

Matrix& grad_of(Tensor& t) { return node_of(t)->grad_buffer(); }

// Shared skeleton for elementwise binary ops.
template <typename Fwd, typename Bwd>
Tensor elementwise2(const char* name, const Tensor& a, const Tensor& b, Fwd fwd, Bwd bwd) {
    if (!a.value().same_shape(b.value())) shape_error(name, a.value(), b.value());
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data[i] = fwd(a.value().data[i], b.value().data[i]);
    }
    return make_op(std::move(out), {a, b},
                   [bwd](const Matrix& g, std::vector<Tensor>& parents) {
                       const Matrix& av = parents[0].value();
                       const Matrix& bv = parents[1].value();
                       bool need_a = parents[0].requires_grad();
                       bool need_b = parents[1].requires_grad();
                       Matrix* ga = need_a ? &grad_of(parents[0]) : nullptr;
                       Matrix* gb = need_b ? &grad_of(parents[1]) : nullptr;
                       for (std::size_t i = 0; i < g.size(); ++i) {
                           auto [da, db] = bwd(av.data[i], bv.data[i]);
                           if (ga) ga->data[i] += g.data[i] * da;
                           if (gb) gb->data[i] += g.data[i] * db;
                       }
                   });
}

template <typename Fwd, typename Bwd>
Tensor elementwise1(const Tensor& a, Fwd fwd, Bwd bwd) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = fwd(a.value().data[i]);
    // bwd maps (input, output) -> local derivative
    Matrix saved = out;
    return make_op(std::move(out), {a},
                   [bwd, saved](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       const Matrix& av = parents[0].value();
                       for (std::size_t i = 0; i < g.size(); ++i) {
                           ga.data[i] += g.data[i] * bwd(av.data[i], saved.data[i]);
                       }
                   });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return elementwise2("add", a, b, [](double x, double y) { return x + y; },
                        [](double, double) { return std::pair{1.0, 1.0}; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return elementwise2("sub", a, b, [](double x, double y) { return x - y; },
                        [](double, double) { return std::pair{1.0, -1.0}; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return elementwise2("mul", a, b, [](double x, double y) { return x * y; },
                        [](double x, double y) { return std::pair{y, x}; });
}

Tensor divide(const Tensor& a, const Tensor& b) {
    return elementwise2("divide", a, b, [](double x, double y) { return x / y; },
                        [](double x, double y) {
                            return std::pair{1.0 / y, -x / (y * y)};
                        });
}

Tensor maximum(const Tensor& a, const Tensor& b) {
    // Ties route the gradient to the first argument.
    return elementwise2("maximum", a, b,
                        [](double x, double y) { return x >= y ? x : y; },
                        [](double x, double y) {
                            return x >= y ? std::pair{1.0, 0.0} : std::pair{0.0, 1.0};
                        });
}

Tensor sigmoid(const Tensor& a) {
    return elementwise1(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh_op(const Tensor& a) {
    return elementwise1(a, [](double x) { return std::tanh(x); },
                        [](double, double y) { return 1.0 - y * y; });
}

Tensor exp_op(const Tensor& a) {
    return elementwise1(a, [](double x) { return std::exp(x); },
                        [](double, double y) { return y; });
}

Tensor relu(const Tensor& a) {
    return elementwise1(a, [](double x) { return x > 0.0 ? x : 0.0; },
                        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor abs_op(const Tensor& a) {
    return elementwise1(a, [](double x) { return std::fabs(x); },
                        [](double x, double) { return x >= 0.0 ? 1.0 : -1.0; });
}

Tensor scale(const Tensor& a, double factor) {
    return elementwise1(a, [factor](double x) { return factor * x; },
                        [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double shift) {
    return elementwise1(a, [shift](double x) { return x + shift; },
                        [](double, double) { return 1.0; });
}

Tensor clamp_min(const Tensor& a, double floor) {
    return elementwise1(a, [floor](double x) { return x < floor ? floor : x; },
                        [floor](double x, double) { return x < floor ? 0.0 : 1.0; });
}

Tensor add_rowvec(const Tensor& a, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_rowvec", a.value(), row.value());
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) out(r, c) += row.value()(0, c);
    }
    return make_op(std::move(out), {a, row},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       if (parents[0].requires_grad()) {
                           Matrix& ga = grad_of(parents[0]);
                           for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
                       }
                       if (parents[1].requires_grad()) {
                           Matrix& gb = grad_of(parents[1]);
                           for (std::size_t r = 0; r < g.rows; ++r) {
                               for (std::size_t c = 0; c < g.cols; ++c) gb(0, c) += g(r, c);
                           }
                       }
                   });
}

Tensor mul_rowvec(const Tensor& a, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) shape_error("mul_rowvec", a.value(), row.value());
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) out(r, c) *= row.value()(0, c);
    }
    return make_op(std::move(out), {a, row},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       const Matrix& av = parents[0].value();
                       const Matrix& rv = parents[1].value();
                       if (parents[0].requires_grad()) {
                           Matrix& ga = grad_of(parents[0]);
                           for (std::size_t r = 0; r < g.rows; ++r) {
                               for (std::size_t c = 0; c < g.cols; ++c) {
                                   ga(r, c) += g(r, c) * rv(0, c);
                               }
                           }
                       }
                       if (parents[1].requires_grad()) {
                           Matrix& gb = grad_of(parents[1]);
                           for (std::size_t r = 0; r < g.rows; ++r) {
                               for (std::size_t c = 0; c < g.cols; ++c) {
                                   gb(0, c) += g(r, c) * av(r, c);
                               }
                           }
                       }
                   });
}

Tensor sub_colvec(const Tensor& a, const Tensor& col) {
    if (col.cols() != 1 || col.rows() != a.rows()) shape_error("sub_colvec", a.value(), col.value());
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) out(r, c) -= col.value()(r, 0);
    }
    return make_op(std::move(out), {a, col},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       if (parents[0].requires_grad()) {
                           Matrix& ga = grad_of(parents[0]);
                           for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
                       }
                       if (parents[1].requires_grad()) {
                           Matrix& gb = grad_of(parents[1]);
                           for (std::size_t r = 0; r < g.rows; ++r) {
                               for (std::size_t c = 0; c < g.cols; ++c) gb(r, 0) -= g(r, c);
                           }
                       }
                   });
}

Tensor mul_colvec(const Tensor& a, const Tensor& col) {
    if (col.cols() != 1 || col.rows() != a.rows()) shape_error("mul_colvec", a.value(), col.value());
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) out(r, c) *= col.value()(r, 0);
    }
    return make_op(std::move(out), {a, col},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       const Matrix& av = parents[0].value();
                       const Matrix& cv = parents[1].value();
                       if (parents[0].requires_grad()) {
                           Matrix& ga = grad_of(parents[0]);
                           for (std::size_t r = 0; r < g.rows; ++r) {
                               for (std::size_t c = 0; c < g.cols; ++c) {
                                   ga(r, c) += g(r, c) * cv(r, 0);
                               }
                           }
                       }
                       if (parents[1].requires_grad()) {
                           Matrix& gb = grad_of(parents[1]);
                           for (std::size_t r = 0; r < g.rows; ++r) {
                               for (std::size_t c = 0; c < g.cols; ++c) {
                                   gb(r, 0) += g(r, c) * av(r, c);
                               }
                           }
                       }
                   });
}

Tensor div_colvec(const Tensor& a, const Tensor& col) {
    if (col.cols() != 1 || col.rows() != a.rows()) shape_error("div_colvec", a.value(), col.value());
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) out(r, c) /= col.value()(r, 0);
    }
    return make_op(std::move(out), {a, col},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       const Matrix& av = parents[0].value();
                       const Matrix& cv = parents[1].value();
                       if (parents[0].requires_grad()) {
                           Matrix& ga = grad_of(parents[0]);
                           for (std::size_t r = 0; r < g.rows; ++r) {
                               for (std::size_t c = 0; c < g.cols; ++c) {
                                   ga(r, c) += g(r, c) / cv(r, 0);
                               }
                           }
                       }
                       if (parents[1].requires_grad()) {
                           Matrix& gb = grad_of(parents[1]);
                           for (std::size_t r = 0; r < g.rows; ++r) {
                               double d = cv(r, 0);
                               for (std::size_t c = 0; c < g.cols; ++c) {
                                   gb(r, 0) -= g(r, c) * av(r, c) / (d * d);
                               }
                           }
                       }
                   });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_error("matmul", a.value(), b.value());
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    Matrix out(av.rows, bv.cols);
    // i-k-j order keeps the inner loop contiguous in both operands.
    for (std::size_t i = 0; i < av.rows; ++i) {
        for (std::size_t k = 0; k < av.cols; ++k) {
            double aik = av(i, k);
            if (aik == 0.0) continue;
            const double* brow = &bv.data[k * bv.cols];
            double* orow = &out.data[i * out.cols];
            for (std::size_t j = 0; j < bv.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return make_op(std::move(out), {a, b},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       const Matrix& av = parents[0].value();
                       const Matrix& bv = parents[1].value();
                       if (parents[0].requires_grad()) {
                           // dA = g . B^T
                           Matrix& ga = grad_of(parents[0]);
                           for (std::size_t i = 0; i < g.rows; ++i) {
                               for (std::size_t j = 0; j < bv.rows; ++j) {
                                   double s = 0.0;
                                   const double* grow = &g.data[i * g.cols];
                                   const double* brow = &bv.data[j * bv.cols];
                                   for (std::size_t k = 0; k < g.cols; ++k) s += grow[k] * brow[k];
                                   ga(i, j) += s;
                               }
                           }
                       }
                       if (parents[1].requires_grad()) {
                           // dB = A^T . g
                           Matrix& gb = grad_of(parents[1]);
                           for (std::size_t i = 0; i < av.rows; ++i) {
                               const double* arow = &av.data[i * av.cols];
                               const double* grow = &g.data[i * g.cols];
                               for (std::size_t k = 0; k < av.cols; ++k) {
                                   double aik = arow[k];
                                   if (aik == 0.0) continue;
                                   double* gbrow = &gb.data[k * gb.cols];
                                   for (std::size_t j = 0; j < g.cols; ++j) {
                                       gbrow[j] += aik * grow[j];
                                   }
                               }
                           }
                       }
                   });
}

Tensor transpose(const Tensor& a) {
    const Matrix& av = a.value();
    Matrix out(av.cols, av.rows);
    for (std::size_t r = 0; r < av.rows; ++r) {
        for (std::size_t c = 0; c < av.cols; ++c) out(c, r) = av(r, c);
    }
    return make_op(std::move(out), {a},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       for (std::size_t r = 0; r < g.rows; ++r) {
                           for (std::size_t c = 0; c < g.cols; ++c) ga(c, r) += g(r, c);
                       }
                   });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw SolveError("concat_rows: empty part list");
    std::size_t cols = parts.front().cols();
    std::size_t rows = 0;
    for (const Tensor& p : parts) {
        if (p.cols() != cols) shape_error("concat_rows", parts.front().value(), p.value());
        rows += p.rows();
    }
    Matrix out(rows, cols);
    std::size_t at = 0;
    for (const Tensor& p : parts) {
        std::copy(p.value().data.begin(), p.value().data.end(), out.data.begin() + at);
        at += p.value().size();
    }
    return make_op(std::move(out), parts,
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       std::size_t at = 0;
                       for (Tensor& p : parents) {
                           std::size_t n = p.value().size();
                           if (p.requires_grad()) {
                               Matrix& gp = grad_of(p);
                               for (std::size_t i = 0; i < n; ++i) gp.data[i] += g.data[at + i];
                           }
                           at += n;
                       }
                   });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw SolveError("concat_cols: empty part list");
    std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != rows) shape_error("concat_cols", parts.front().value(), p.value());
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::size_t col_at = 0;
    for (const Tensor& p : parts) {
        const Matrix& pv = p.value();
        for (std::size_t r = 0; r < rows; ++r) {
            std::copy(&pv.data[r * pv.cols], &pv.data[r * pv.cols] + pv.cols,
                      &out.data[r * cols + col_at]);
        }
        col_at += pv.cols;
    }
    return make_op(std::move(out), parts,
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       std::size_t col_at = 0;
                       for (Tensor& p : parents) {
                           std::size_t pc = p.value().cols;
                           if (p.requires_grad()) {
                               Matrix& gp = grad_of(p);
                               for (std::size_t r = 0; r < g.rows; ++r) {
                                   for (std::size_t c = 0; c < pc; ++c) {
                                       gp(r, c) += g(r, col_at + c);
                                   }
                               }
                           }
                           col_at += pc;
                       }
                   });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin >= end || end > a.rows()) {
        throw SolveError("slice_rows: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") outside " + a.value().shape_str());
    }
    const Matrix& av = a.value();
    Matrix out(end - begin, av.cols);
    std::copy(&av.data[begin * av.cols], &av.data[end * av.cols], out.data.begin());
    return make_op(std::move(out), {a},
                   [begin](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       std::size_t offset = begin * g.cols;
                       for (std::size_t i = 0; i < g.size(); ++i) ga.data[offset + i] += g.data[i];
                   });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin >= end || end > a.cols()) {
        throw SolveError("slice_cols: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") outside " + a.value().shape_str());
    }
    const Matrix& av = a.value();
    Matrix out(av.rows, end - begin);
    for (std::size_t r = 0; r < av.rows; ++r) {
        std::copy(&av.data[r * av.cols + begin], &av.data[r * av.cols + end],
                  &out.data[r * out.cols]);
    }
    return make_op(std::move(out), {a},
                   [begin](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       for (std::size_t r = 0; r < g.rows; ++r) {
                           for (std::size_t c = 0; c < g.cols; ++c) {
                               ga(r, begin + c) += g(r, c);
                           }
                       }
                   });
}

Tensor reshape(const Tensor& a, std::size_t rows, std::size_t cols) {
    if (rows * cols != a.value().size()) {
        throw SolveError("reshape: cannot view " + a.value().shape_str() + " as (" +
                         std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }
    Matrix out(rows, cols);
    out.data = a.value().data;
    return make_op(std::move(out), {a},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
                   });
}

Tensor repeat_rows(const Tensor& a, std::size_t times) {
    const Matrix& av = a.value();
    Matrix out(av.rows * times, av.cols);
    for (std::size_t r = 0; r < av.rows; ++r) {
        for (std::size_t i = 0; i < times; ++i) {
            std::copy(&av.data[r * av.cols], &av.data[r * av.cols] + av.cols,
                      &out.data[(r * times + i) * av.cols]);
        }
    }
    return make_op(std::move(out), {a},
                   [times](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       for (std::size_t r = 0; r < ga.rows; ++r) {
                           for (std::size_t i = 0; i < times; ++i) {
                               for (std::size_t c = 0; c < ga.cols; ++c) {
                                   ga(r, c) += g(r * times + i, c);
                               }
                           }
                       }
                   });
}

Tensor batch_outer(const Tensor& v, const Tensor& k) {
    if (v.rows() != k.rows()) shape_error("batch_outer", v.value(), k.value());
    const Matrix& vv = v.value();
    const Matrix& kv = k.value();
    const std::size_t b_count = vv.rows, m = vv.cols, n = kv.cols;
    Matrix out(b_count * m, n);
    for (std::size_t b = 0; b < b_count; ++b) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) out(b * m + i, j) = vv(b, i) * kv(b, j);
        }
    }
    return make_op(std::move(out), {v, k},
                   [m](const Matrix& g, std::vector<Tensor>& parents) {
                       const Matrix& vv = parents[0].value();
                       const Matrix& kv = parents[1].value();
                       const std::size_t b_count = vv.rows, n = kv.cols;
                       if (parents[0].requires_grad()) {
                           Matrix& gv = grad_of(parents[0]);
                           for (std::size_t b = 0; b < b_count; ++b) {
                               for (std::size_t i = 0; i < m; ++i) {
                                   double s = 0.0;
                                   for (std::size_t j = 0; j < n; ++j) s += g(b * m + i, j) * kv(b, j);
                                   gv(b, i) += s;
                               }
                           }
                       }
                       if (parents[1].requires_grad()) {
                           Matrix& gk = grad_of(parents[1]);
                           for (std::size_t b = 0; b < b_count; ++b) {
                               for (std::size_t j = 0; j < n; ++j) {
                                   double s = 0.0;
                                   for (std::size_t i = 0; i < m; ++i) s += g(b * m + i, j) * vv(b, i);
                                   gk(b, j) += s;
                               }
                           }
                       }
                   });
}

Tensor batch_matvec(const Tensor& c, const Tensor& q) {
    const Matrix& cv = c.value();
    const Matrix& qv = q.value();
    if (cv.cols != qv.cols || cv.rows % qv.rows != 0) shape_error("batch_matvec", cv, qv);
    const std::size_t b_count = qv.rows, m = cv.rows / qv.rows, n = cv.cols;
    Matrix out(b_count, m);
    for (std::size_t b = 0; b < b_count; ++b) {
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += cv(b * m + i, j) * qv(b, j);
            out(b, i) = s;
        }
    }
    return make_op(std::move(out), {c, q},
                   [m, n](const Matrix& g, std::vector<Tensor>& parents) {
                       const Matrix& cv = parents[0].value();
                       const Matrix& qv = parents[1].value();
                       const std::size_t b_count = qv.rows;
                       if (parents[0].requires_grad()) {
                           Matrix& gc = grad_of(parents[0]);
                           for (std::size_t b = 0; b < b_count; ++b) {
                               for (std::size_t i = 0; i < m; ++i) {
                                   for (std::size_t j = 0; j < n; ++j) {
                                       gc(b * m + i, j) += g(b, i) * qv(b, j);
                                   }
                               }
                           }
                       }
                       if (parents[1].requires_grad()) {
                           Matrix& gq = grad_of(parents[1]);
                           for (std::size_t b = 0; b < b_count; ++b) {
                               for (std::size_t j = 0; j < n; ++j) {
                                   double s = 0.0;
                                   for (std::size_t i = 0; i < m; ++i) s += g(b, i) * cv(b * m + i, j);
                                   gq(b, j) += s;
                               }
                           }
                       }
                   });
}

Tensor softmax_rows(const Tensor& a) {
    const Matrix& av = a.value();
    Matrix out(av.rows, av.cols);
    for (std::size_t r = 0; r < av.rows; ++r) {
        double m = av(r, 0);
        for (std::size_t c = 1; c < av.cols; ++c) m = std::max(m, av(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < av.cols; ++c) {
            double e = std::exp(av(r, c) - m);
            out(r, c) = e;
            sum += e;
        }
        for (std::size_t c = 0; c < av.cols; ++c) out(r, c) /= sum;
    }
    Matrix saved = out;
    return make_op(std::move(out), {a},
                   [saved](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       // dx = y * (g - sum(g * y)) per row
                       for (std::size_t r = 0; r < g.rows; ++r) {
                           double dot = 0.0;
                           for (std::size_t c = 0; c < g.cols; ++c) dot += g(r, c) * saved(r, c);
                           for (std::size_t c = 0; c < g.cols; ++c) {
                               ga(r, c) += saved(r, c) * (g(r, c) - dot);
                           }
                       }
                   });
}

Tensor layernorm_rows(const Tensor& a, double eps) {
    const Matrix& av = a.value();
    const std::size_t n = av.cols;
    Matrix out(av.rows, n);
    Matrix mean_inv(av.rows, 2);  // per row: mean and 1/sqrt(var + eps)
    for (std::size_t r = 0; r < av.rows; ++r) {
        double mean = 0.0;
        for (std::size_t c = 0; c < n; ++c) mean += av(r, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            double d = av(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        double inv = 1.0 / std::sqrt(var + eps);
        mean_inv(r, 0) = mean;
        mean_inv(r, 1) = inv;
        for (std::size_t c = 0; c < n; ++c) out(r, c) = (av(r, c) - mean) * inv;
    }
    Matrix saved_y = out;
    return make_op(std::move(out), {a},
                   [saved_y, mean_inv, n](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       // dx = inv * (g - mean(g) - y * mean(g * y)) per row
                       const double dn = static_cast<double>(n);
                       for (std::size_t r = 0; r < g.rows; ++r) {
                           double g_mean = 0.0, gy_mean = 0.0;
                           for (std::size_t c = 0; c < n; ++c) {
                               g_mean += g(r, c);
                               gy_mean += g(r, c) * saved_y(r, c);
                           }
                           g_mean /= dn;
                           gy_mean /= dn;
                           double inv = mean_inv(r, 1);
                           for (std::size_t c = 0; c < n; ++c) {
                               ga(r, c) += inv * (g(r, c) - g_mean - saved_y(r, c) * gy_mean);
                           }
                       }
                   });
}

Tensor row_sum(const Tensor& a) {
    const Matrix& av = a.value();
    Matrix out(av.rows, 1);
    for (std::size_t r = 0; r < av.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < av.cols; ++c) s += av(r, c);
        out(r, 0) = s;
    }
    return make_op(std::move(out), {a},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       for (std::size_t r = 0; r < ga.rows; ++r) {
                           for (std::size_t c = 0; c < ga.cols; ++c) ga(r, c) += g(r, 0);
                       }
                   });
}

Tensor row_max(const Tensor& a) {
    const Matrix& av = a.value();
    Matrix out(av.rows, 1);
    std::vector<std::size_t> argmax(av.rows, 0);
    for (std::size_t r = 0; r < av.rows; ++r) {
        double m = av(r, 0);
        for (std::size_t c = 1; c < av.cols; ++c) {
            if (av(r, c) > m) {
                m = av(r, c);
                argmax[r] = c;
            }
        }
        out(r, 0) = m;
    }
    return make_op(std::move(out), {a},
                   [argmax](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       for (std::size_t r = 0; r < ga.rows; ++r) ga(r, argmax[r]) += g(r, 0);
                   });
}

Tensor sum_all(const Tensor& a) {
    double s = 0.0;
    for (double v : a.value().data) s += v;
    return make_op(Matrix::scalar(s), {a},
                   [](const Matrix& g, std::vector<Tensor>& parents) {
                       if (!parents[0].requires_grad()) return;
                       Matrix& ga = grad_of(parents[0]);
                       for (double& v : ga.data) v += g.data[0];
                   });
}

Tensor mean_absolute_error(const Tensor& prediction, const Tensor& target) {
    if (!prediction.value().same_shape(target.value())) {
        shape_error("mean_absolute_error", prediction.value(), target.value());
    }
    const Matrix& pv = prediction.value();
    const Matrix& tv = target.value();
    double sum = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) sum += std::fabs(pv.data[i] - tv.data[i]);
    double n = static_cast<double>(pv.size());
    return make_op(Matrix::scalar(sum / n), {prediction, target},
                   [n](const Matrix& g, std::vector<Tensor>& parents) {
                       const Matrix& pv = parents[0].value();
                       const Matrix& tv = parents[1].value();
                       double scale = g.data[0] / n;
                       if (parents[0].requires_grad()) {
                           Matrix& gp = grad_of(parents[0]);
                           for (std::size_t i = 0; i < pv.size(); ++i) {
                               double d = pv.data[i] - tv.data[i];
                               gp.data[i] += scale * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
                           }
                       }
                       if (parents[1].requires_grad()) {
                           Matrix& gt = grad_of(parents[1]);
                           for (std::size_t i = 0; i < pv.size(); ++i) {
                               double d = pv.data[i] - tv.data[i];
                               gt.data[i] -= scale * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
                           }
                       }
                   });
}

BackwardStats backward(const Tensor& loss) {
    if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1) {
        throw SolveError("backward: loss must be a defined 1x1 scalar");
    }

    // Iterative post-order DFS: children (parents in graph terms) first, then
    // the node itself, giving a topological order for the reverse sweep.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    Node* root = loss.node_.get();
    stack.emplace_back(root, 0);
    seen.insert(root);
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            Node* child = node->parents[next_child].node_.get();
            ++next_child;
            if (child->requires_grad && seen.insert(child).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (Node* node : order) {
        node->backward_visits = 0;
        node->grad_buffer();  // make sure buffers exist before accumulation
    }
    root->grad_buffer().data[0] = 1.0;

    BackwardStats stats;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        ++node->backward_visits;
        ++stats.nodes_visited;
        if (node->backward) node->backward(node->grad, node->parents);
    }
    return stats;
}

}  // namespace loadcast::nn
