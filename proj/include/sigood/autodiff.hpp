#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sigood/matrix.hpp"

namespace sigood::ad {

class Tape;

// Lightweight handle into a Tape. Copyable; never outlives its tape.
struct DiffValue {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    Matrix grad() const;
    std::size_t rows() const;
    std::size_t cols() const;
};

// Reverse-mode tape. Nodes are evaluated eagerly in creation order; the
// reverse sweep runs strictly in descending id order, so every run with the
// same inputs replays the same floating-point operations.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    DiffValue leaf(Matrix value, std::string name = "leaf");

    // Public so tests can install deliberately wrong backward functions.
    DiffValue make_node(Matrix value, std::string op, std::vector<std::size_t> parents,
                        BackwardFn backward);

    // Seeds `root` (must be 1x1) with gradient 1 and propagates backward.
    // A second call without reset_grads() is refused: grads would mix.
    void backward(DiffValue root);

    void reset_grads();
    void clear();

    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    // Zeros until backward routes a gradient here.
    Matrix grad(std::size_t id) const;
    bool grad_set(std::size_t id) const { return nodes_[id].grad_set; }
    const std::string& op(std::size_t id) const { return nodes_[id].op; }
    std::size_t size() const { return nodes_.size(); }

    // Adds `g` into the node's gradient, allocating zeros on first touch.
    void accumulate_grad(std::size_t id, const Matrix& g);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::string op;
        std::vector<std::size_t> parents;
        BackwardFn backward;
        bool grad_set = false;
    };
    std::vector<Node> nodes_;
    bool swept_ = false;
};

inline const Matrix& DiffValue::value() const { return tape->value(id); }
inline Matrix DiffValue::grad() const { return tape->grad(id); }
inline std::size_t DiffValue::rows() const { return value().rows(); }
inline std::size_t DiffValue::cols() const { return value().cols(); }

// --- differentiable operations ----------------------------------------
// Shapes follow the dense Matrix conventions; every op validates its
// operands and throws std::invalid_argument on mismatch.

DiffValue add(DiffValue a, DiffValue b);
DiffValue sub(DiffValue a, DiffValue b);
DiffValue add_const(DiffValue x, const Matrix& c);
DiffValue add_scalar(DiffValue x, double c);
DiffValue mul_scalar(DiffValue x, double c);

DiffValue matmul(DiffValue a, DiffValue b);
// y = a * x with a constant (used for neighborhood aggregation).
DiffValue left_matmul_const(const Matrix& a, DiffValue x);
// y = x * w + b, b a [1 x out] row broadcast over rows of x.
DiffValue linear(DiffValue x, DiffValue w, DiffValue b);

DiffValue relu(DiffValue x);
// Elementwise natural log; throws std::domain_error on entries <= 0.
DiffValue log(DiffValue x);
DiffValue exp(DiffValue x);
DiffValue softplus(DiffValue x);
DiffValue sigmoid(DiffValue x);
DiffValue neg(DiffValue x);
// Subgradient 1 on [lo, hi], 0 outside.
DiffValue clamp(DiffValue x, double lo, double hi);
// y[i] = x[i] / denom[i]. Division is literal so x/x is exactly 1.
DiffValue div_by_const(DiffValue x, const Matrix& denom);

// Row normalization with per-row mean/variance; gamma, lambda are [1 x c].
DiffValue layer_norm(DiffValue x, DiffValue gamma, DiffValue lambda, double eps);

// y[i,0] = log sum_j exp(x[i,j]), computed with a max shift.
DiffValue row_logsumexp(DiffValue x);

// Mean of x[r,0] over the given rows; x must be a column vector.
DiffValue reduce_mean_subset(DiffValue x, std::vector<std::size_t> rows);

DiffValue mean_rows(DiffValue x);  // [n x c] -> [1 x c]
DiffValue sum_rows(DiffValue x);   // [n x c] -> [1 x c]
// [n x c] -> [1 x c]; gradient flows to the first maximizer per column.
DiffValue colwise_max(DiffValue x);

DiffValue entry(DiffValue x, std::size_t i, std::size_t j);

// --- finite-difference gradient checking ------------------------------

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst;  // "leaf <k> entry (<i>,<j>)" of the worst mismatch
    bool ok(double tol) const { return max_rel_err <= tol; }
};

using BuildFn = std::function<DiffValue(Tape&, const std::vector<DiffValue>&)>;

// Compares tape gradients of the scalar produced by `build` against central
// finite differences over every entry of every leaf.
// Relative error uses max(|analytic|, |numeric|, 1) as denominator.
GradCheckResult grad_check(const BuildFn& build, const std::vector<Matrix>& leaves, double step);

}  // namespace sigood::ad
