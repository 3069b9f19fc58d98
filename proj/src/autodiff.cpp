#include "sigood/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include "sigood/numerics.hpp"

namespace sigood::ad {

DiffValue Tape::leaf(Matrix value, std::string name) {
    return make_node(std::move(value), std::move(name), {}, nullptr);
}

DiffValue Tape::make_node(Matrix value, std::string op, std::vector<std::size_t> parents,
                          BackwardFn backward) {
    for (std::size_t p : parents) {
        if (p >= nodes_.size()) throw std::invalid_argument("make_node: parent id out of range");
    }
    Node node;
    node.value = std::move(value);
    node.op = std::move(op);
    node.parents = std::move(parents);
    node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return DiffValue{this, nodes_.size() - 1};
}

void Tape::backward(DiffValue root) {
    if (root.tape != this || root.id >= nodes_.size())
        throw std::invalid_argument("backward: root is not on this tape");
    if (nodes_[root.id].value.rows() != 1 || nodes_[root.id].value.cols() != 1)
        throw std::invalid_argument("backward: root must be 1x1, got " +
                                    nodes_[root.id].value.shape_str());
    if (swept_)
        throw std::logic_error("backward: gradients already populated; call reset_grads() first");
    accumulate_grad(root.id, Matrix(1, 1, 1.0));
    for (std::size_t id = root.id + 1; id-- > 0;) {
        Node& node = nodes_[id];
        if (!node.grad_set || !node.backward) continue;
        node.backward(*this, id);
    }
    swept_ = true;
}

void Tape::reset_grads() {
    for (Node& node : nodes_) {
        node.grad = Matrix();
        node.grad_set = false;
    }
    swept_ = false;
}

void Tape::clear() {
    nodes_.clear();
    swept_ = false;
}

Matrix Tape::grad(std::size_t id) const {
    const Node& node = nodes_[id];
    if (!node.grad_set) return Matrix(node.value.rows(), node.value.cols());
    return node.grad;
}

void Tape::accumulate_grad(std::size_t id, const Matrix& g) {
    Node& node = nodes_[id];
    if (!g.same_shape(node.value))
        throw std::invalid_argument("accumulate_grad: shape " + g.shape_str() + " vs value " +
                                    node.value.shape_str());
    if (!node.grad_set) {
        node.grad = g;
        node.grad_set = true;
    } else {
        node.grad += g;
    }
}

namespace {

void require_same_tape(DiffValue a, DiffValue b, const char* op) {
    if (a.tape != b.tape) throw std::invalid_argument(std::string(op) + ": operands on different tapes");
}

}  // namespace

DiffValue add(DiffValue a, DiffValue b) {
    require_same_tape(a, b, "add");
    if (!a.value().same_shape(b.value()))
        throw std::invalid_argument("add: " + a.value().shape_str() + " vs " + b.value().shape_str());
    Matrix out = a.value();
    out += b.value();
    std::size_t ia = a.id, ib = b.id;
    return a.tape->make_node(std::move(out), "add", {ia, ib},
                             [ia, ib](Tape& t, std::size_t self) {
                                 t.accumulate_grad(ia, t.grad(self));
                                 t.accumulate_grad(ib, t.grad(self));
                             });
}

DiffValue sub(DiffValue a, DiffValue b) {
    require_same_tape(a, b, "sub");
    if (!a.value().same_shape(b.value()))
        throw std::invalid_argument("sub: " + a.value().shape_str() + " vs " + b.value().shape_str());
    Matrix out = a.value();
    out -= b.value();
    std::size_t ia = a.id, ib = b.id;
    return a.tape->make_node(std::move(out), "sub", {ia, ib},
                             [ia, ib](Tape& t, std::size_t self) {
                                 t.accumulate_grad(ia, t.grad(self));
                                 Matrix ng = t.grad(self);
                                 ng *= -1.0;
                                 t.accumulate_grad(ib, ng);
                             });
}

DiffValue add_const(DiffValue x, const Matrix& c) {
    if (!x.value().same_shape(c))
        throw std::invalid_argument("add_const: " + x.value().shape_str() + " vs " + c.shape_str());
    Matrix out = x.value();
    out += c;
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "add_const", {ix},
                             [ix](Tape& t, std::size_t self) { t.accumulate_grad(ix, t.grad(self)); });
}

DiffValue add_scalar(DiffValue x, double c) {
    Matrix out = x.value().map([c](double v) { return v + c; });
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "add_scalar", {ix},
                             [ix](Tape& t, std::size_t self) { t.accumulate_grad(ix, t.grad(self)); });
}

DiffValue mul_scalar(DiffValue x, double c) {
    Matrix out = x.value().map([c](double v) { return v * c; });
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "mul_scalar", {ix},
                             [ix, c](Tape& t, std::size_t self) {
                                 Matrix g = t.grad(self);
                                 g *= c;
                                 t.accumulate_grad(ix, g);
                             });
}

DiffValue matmul(DiffValue a, DiffValue b) {
    require_same_tape(a, b, "matmul");
    Matrix out = sigood::matmul(a.value(), b.value());
    std::size_t ia = a.id, ib = b.id;
    return a.tape->make_node(std::move(out), "matmul", {ia, ib},
                             [ia, ib](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 t.accumulate_grad(ia, sigood::matmul(g, t.value(ib).transpose()));
                                 t.accumulate_grad(ib, sigood::matmul(t.value(ia).transpose(), g));
                             });
}

DiffValue left_matmul_const(const Matrix& a, DiffValue x) {
    Matrix out = sigood::matmul(a, x.value());
    std::size_t ix = x.id;
    Matrix at = a.transpose();
    return x.tape->make_node(std::move(out), "left_matmul_const", {ix},
                             [ix, at](Tape& t, std::size_t self) {
                                 t.accumulate_grad(ix, sigood::matmul(at, t.grad(self)));
                             });
}

DiffValue linear(DiffValue x, DiffValue w, DiffValue b) {
    require_same_tape(x, w, "linear");
    require_same_tape(x, b, "linear");
    if (b.value().rows() != 1 || b.value().cols() != w.value().cols())
        throw std::invalid_argument("linear: bias " + b.value().shape_str() + " for weight " +
                                    w.value().shape_str());
    Matrix out = add_row_broadcast(sigood::matmul(x.value(), w.value()), b.value());
    std::size_t ix = x.id, iw = w.id, ib = b.id;
    return x.tape->make_node(std::move(out), "linear", {ix, iw, ib},
                             [ix, iw, ib](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 t.accumulate_grad(ix, sigood::matmul(g, t.value(iw).transpose()));
                                 t.accumulate_grad(iw, sigood::matmul(t.value(ix).transpose(), g));
                                 t.accumulate_grad(ib, col_sums(g));
                             });
}

DiffValue relu(DiffValue x) {
    Matrix out = x.value().map([](double v) { return v > 0.0 ? v : 0.0; });
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "relu", {ix},
                             [ix](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), v.cols());
                                 for (std::size_t i = 0; i < v.size(); ++i)
                                     dx.data()[i] = v.data()[i] > 0.0 ? g.data()[i] : 0.0;
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue log(DiffValue x) {
    const Matrix& v = x.value();
    Matrix out(v.rows(), v.cols());
    for (std::size_t i = 0; i < v.rows(); ++i) {
        for (std::size_t j = 0; j < v.cols(); ++j) {
            double e = v(i, j);
            if (!(e > 0.0))
                throw std::domain_error("log: nonpositive entry " + std::to_string(e) + " at (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
            out(i, j) = std::log(e);
        }
    }
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "log", {ix},
                             [ix](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), v.cols());
                                 for (std::size_t i = 0; i < v.size(); ++i)
                                     dx.data()[i] = g.data()[i] / v.data()[i];
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue exp(DiffValue x) {
    Matrix out = x.value().map([](double v) { return std::exp(v); });
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "exp", {ix},
                             [ix](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& y = t.value(self);
                                 t.accumulate_grad(ix, sigood::hadamard(g, y));
                             });
}

DiffValue softplus(DiffValue x) {
    Matrix out = x.value().map([](double v) { return sigood::softplus(v); });
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "softplus", {ix},
                             [ix](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), v.cols());
                                 for (std::size_t i = 0; i < v.size(); ++i)
                                     dx.data()[i] = g.data()[i] * sigood::sigmoid(v.data()[i]);
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue sigmoid(DiffValue x) {
    Matrix out = x.value().map([](double v) { return sigood::sigmoid(v); });
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "sigmoid", {ix},
                             [ix](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& y = t.value(self);
                                 Matrix dx(y.rows(), y.cols());
                                 for (std::size_t i = 0; i < y.size(); ++i) {
                                     const double s = y.data()[i];
                                     dx.data()[i] = g.data()[i] * s * (1.0 - s);
                                 }
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue neg(DiffValue x) {
    Matrix out = x.value().map([](double v) { return -v; });
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "neg", {ix},
                             [ix](Tape& t, std::size_t self) {
                                 Matrix g = t.grad(self);
                                 g *= -1.0;
                                 t.accumulate_grad(ix, g);
                             });
}

DiffValue clamp(DiffValue x, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
    Matrix out = x.value().map([lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); });
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "clamp", {ix},
                             [ix, lo, hi](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), v.cols());
                                 for (std::size_t i = 0; i < v.size(); ++i) {
                                     double e = v.data()[i];
                                     dx.data()[i] = (e >= lo && e <= hi) ? g.data()[i] : 0.0;
                                 }
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue div_by_const(DiffValue x, const Matrix& denom) {
    const Matrix& v = x.value();
    if (!v.same_shape(denom))
        throw std::invalid_argument("div_by_const: " + v.shape_str() + " vs " + denom.shape_str());
    Matrix out(v.rows(), v.cols());
    for (std::size_t i = 0; i < v.size(); ++i) out.data()[i] = v.data()[i] / denom.data()[i];
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "div_by_const", {ix},
                             [ix, denom](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 Matrix dx(g.rows(), g.cols());
                                 for (std::size_t i = 0; i < g.size(); ++i)
                                     dx.data()[i] = g.data()[i] / denom.data()[i];
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue layer_norm(DiffValue x, DiffValue gamma, DiffValue lambda, double eps) {
    require_same_tape(x, gamma, "layer_norm");
    require_same_tape(x, lambda, "layer_norm");
    const Matrix& v = x.value();
    const std::size_t n = v.rows(), c = v.cols();
    if (gamma.value().rows() != 1 || gamma.value().cols() != c || lambda.value().rows() != 1 ||
        lambda.value().cols() != c)
        throw std::invalid_argument("layer_norm: scale/shift must be [1x" + std::to_string(c) + "]");
    if (c == 0) throw std::invalid_argument("layer_norm: zero columns");

    // Cache normalized rows and the per-row scale for the backward pass.
    Matrix xhat(n, c);
    std::vector<double> inv_s(n);
    Matrix out(n, c);
    const Matrix& ga = gamma.value();
    const Matrix& la = lambda.value();
    for (std::size_t i = 0; i < n; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < c; ++j) mu += v(i, j);
        mu /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            double d = v(i, j) - mu;
            var += d * d;
        }
        var /= static_cast<double>(c);
        double s = std::sqrt(var + eps);
        inv_s[i] = 1.0 / s;
        for (std::size_t j = 0; j < c; ++j) {
            xhat(i, j) = (v(i, j) - mu) * inv_s[i];
            out(i, j) = ga(0, j) * xhat(i, j) + la(0, j);
        }
    }

    std::size_t ix = x.id, ig = gamma.id, il = lambda.id;
    return x.tape->make_node(
        std::move(out), "layer_norm", {ix, ig, il},
        [ix, ig, il, xhat, inv_s, n, c](Tape& t, std::size_t self) {
            const Matrix& g = t.grad(self);
            const Matrix& ga = t.value(ig);
            Matrix dgamma(1, c);
            Matrix dlambda(1, c);
            Matrix dx(n, c);
            for (std::size_t i = 0; i < n; ++i) {
                double mean_gh = 0.0, mean_ghx = 0.0;
                for (std::size_t j = 0; j < c; ++j) {
                    double gh = g(i, j) * ga(0, j);
                    mean_gh += gh;
                    mean_ghx += gh * xhat(i, j);
                    dgamma(0, j) += g(i, j) * xhat(i, j);
                    dlambda(0, j) += g(i, j);
                }
                mean_gh /= static_cast<double>(c);
                mean_ghx /= static_cast<double>(c);
                for (std::size_t j = 0; j < c; ++j) {
                    double gh = g(i, j) * ga(0, j);
                    dx(i, j) = (gh - mean_gh - xhat(i, j) * mean_ghx) * inv_s[i];
                }
            }
            t.accumulate_grad(ix, dx);
            t.accumulate_grad(ig, dgamma);
            t.accumulate_grad(il, dlambda);
        });
}

DiffValue row_logsumexp(DiffValue x) {
    const Matrix& v = x.value();
    const std::size_t n = v.rows(), c = v.cols();
    if (c == 0) throw std::invalid_argument("row_logsumexp: zero columns");
    Matrix out(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        double m = v(i, 0);
        for (std::size_t j = 1; j < c; ++j) m = std::max(m, v(i, j));
        double acc = 0.0;
        for (std::size_t j = 0; j < c; ++j) acc += std::exp(v(i, j) - m);
        out(i, 0) = m + std::log(acc);
    }
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "row_logsumexp", {ix},
                             [ix, n, c](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& v = t.value(ix);
                                 const Matrix& y = t.value(self);
                                 Matrix dx(n, c);
                                 for (std::size_t i = 0; i < n; ++i)
                                     for (std::size_t j = 0; j < c; ++j)
                                         dx(i, j) = g(i, 0) * std::exp(v(i, j) - y(i, 0));
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue reduce_mean_subset(DiffValue x, std::vector<std::size_t> rows) {
    const Matrix& v = x.value();
    if (v.cols() != 1)
        throw std::invalid_argument("reduce_mean_subset: expected column vector, got " + v.shape_str());
    if (rows.empty()) throw std::invalid_argument("reduce_mean_subset: empty row subset");
    double acc = 0.0;
    for (std::size_t r : rows) {
        if (r >= v.rows()) throw std::invalid_argument("reduce_mean_subset: row out of range");
        acc += v(r, 0);
    }
    const double k = static_cast<double>(rows.size());
    Matrix out(1, 1, acc / k);
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "reduce_mean_subset", {ix},
                             [ix, rows, k](Tape& t, std::size_t self) {
                                 double g = t.grad(self)(0, 0);
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), 1);
                                 for (std::size_t r : rows) dx(r, 0) += g / k;
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue mean_rows(DiffValue x) {
    const Matrix& v = x.value();
    if (v.rows() == 0) throw std::invalid_argument("mean_rows: empty matrix");
    const double n = static_cast<double>(v.rows());
    Matrix out = col_sums(v);
    out *= 1.0 / n;
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "mean_rows", {ix},
                             [ix, n](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), v.cols());
                                 for (std::size_t i = 0; i < v.rows(); ++i)
                                     for (std::size_t j = 0; j < v.cols(); ++j)
                                         dx(i, j) = g(0, j) / n;
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue sum_rows(DiffValue x) {
    Matrix out = col_sums(x.value());
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "sum_rows", {ix},
                             [ix](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), v.cols());
                                 for (std::size_t i = 0; i < v.rows(); ++i)
                                     for (std::size_t j = 0; j < v.cols(); ++j) dx(i, j) = g(0, j);
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue colwise_max(DiffValue x) {
    const Matrix& v = x.value();
    if (v.rows() == 0) throw std::invalid_argument("colwise_max: empty matrix");
    const std::size_t c = v.cols();
    Matrix out(1, c);
    std::vector<std::size_t> argmax(c, 0);
    for (std::size_t j = 0; j < c; ++j) {
        double best = v(0, j);
        for (std::size_t i = 1; i < v.rows(); ++i) {
            if (v(i, j) > best) {
                best = v(i, j);
                argmax[j] = i;
            }
        }
        out(0, j) = best;
    }
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "colwise_max", {ix},
                             [ix, argmax, c](Tape& t, std::size_t self) {
                                 const Matrix& g = t.grad(self);
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), v.cols());
                                 for (std::size_t j = 0; j < c; ++j)
                                     dx(argmax[j], j) = g(0, j);
                                 t.accumulate_grad(ix, dx);
                             });
}

DiffValue entry(DiffValue x, std::size_t i, std::size_t j) {
    const Matrix& v = x.value();
    if (i >= v.rows() || j >= v.cols())
        throw std::invalid_argument("entry: (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") out of " + v.shape_str());
    Matrix out(1, 1, v(i, j));
    std::size_t ix = x.id;
    return x.tape->make_node(std::move(out), "entry", {ix},
                             [ix, i, j](Tape& t, std::size_t self) {
                                 const Matrix& v = t.value(ix);
                                 Matrix dx(v.rows(), v.cols());
                                 dx(i, j) = t.grad(self)(0, 0);
                                 t.accumulate_grad(ix, dx);
                             });
}

GradCheckResult grad_check(const BuildFn& build, const std::vector<Matrix>& leaves, double step) {
    // Analytic pass.
    Tape tape;
    std::vector<DiffValue> vals;
    vals.reserve(leaves.size());
    for (const Matrix& m : leaves) vals.push_back(tape.leaf(m));
    DiffValue root = build(tape, vals);
    tape.backward(root);
    std::vector<Matrix> analytic;
    analytic.reserve(leaves.size());
    for (const DiffValue& v : vals)
        analytic.push_back(tape.grad_set(v.id) ? v.grad() : Matrix(v.rows(), v.cols()));

    auto eval = [&build](const std::vector<Matrix>& ls) {
        Tape t;
        std::vector<DiffValue> vs;
        vs.reserve(ls.size());
        for (const Matrix& m : ls) vs.push_back(t.leaf(m));
        DiffValue r = build(t, vs);
        if (r.rows() != 1 || r.cols() != 1)
            throw std::invalid_argument("grad_check: build must return a scalar");
        return r.value()(0, 0);
    };

    GradCheckResult result;
    std::vector<Matrix> work = leaves;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        for (std::size_t i = 0; i < leaves[k].rows(); ++i) {
            for (std::size_t j = 0; j < leaves[k].cols(); ++j) {
                const double orig = work[k](i, j);
                work[k](i, j) = orig + step;
                double fp = eval(work);
                work[k](i, j) = orig - step;
                double fm = eval(work);
                work[k](i, j) = orig;
                double numeric = (fp - fm) / (2.0 * step);
                double a = analytic[k](i, j);
                double denom = std::max({std::fabs(a), std::fabs(numeric), 1.0});
                double rel = std::fabs(a - numeric) / denom;
                if (rel > result.max_rel_err) {
                    result.max_rel_err = rel;
                    result.worst = "leaf " + std::to_string(k) + " entry (" + std::to_string(i) +
                                   "," + std::to_string(j) + ")";
                }
            }
        }
    }
    return result;
}

}  // namespace sigood::ad
