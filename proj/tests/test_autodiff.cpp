#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sigood/autodiff.hpp"
#include "sigood/matrix.hpp"
#include "sigood/rng.hpp"

using sigood::Matrix;
namespace ad = sigood::ad;

namespace {

Matrix random_matrix(sigood::Rng& rng, std::size_t r, std::size_t c, double lo = -2.0,
                     double hi = 2.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

// root = sum of all entries of x, built as ones-row * x * ones-col
ad::DiffValue total(ad::Tape& tape, ad::DiffValue x) {
    ad::DiffValue row = ad::sum_rows(x);  // [1 x c]
    return ad::matmul(row, tape.leaf(Matrix(x.cols(), 1, 1.0), "ones"));
}

}  // namespace

TEST_CASE("linear forward identities") {
    ad::Tape tape;
    ad::DiffValue x = tape.leaf(Matrix::identity(2));
    ad::DiffValue w = tape.leaf(Matrix{{1, 2}, {3, 4}});
    ad::DiffValue b = tape.leaf(Matrix(1, 2, 0.0));
    ad::DiffValue y = ad::linear(x, w, b);
    CHECK(y.value() == Matrix{{1, 2}, {3, 4}});

    sigood::Rng rng(1);
    ad::Tape tape2;
    ad::DiffValue x2 = tape2.leaf(random_matrix(rng, 3, 2));
    ad::DiffValue w0 = tape2.leaf(Matrix(2, 2, 0.0));
    ad::DiffValue b2 = tape2.leaf(Matrix{{5, 6}});
    ad::DiffValue y2 = ad::linear(x2, w0, b2);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(y2.value()(i, 0) == 5.0);
        CHECK(y2.value()(i, 1) == 6.0);
    }
}

TEST_CASE("linear gradient of total w.r.t. weights equals column sums of x") {
    sigood::Rng rng(2);
    const Matrix xv = random_matrix(rng, 3, 4);
    const Matrix wv = random_matrix(rng, 4, 2);
    const Matrix bv = random_matrix(rng, 1, 2);

    ad::Tape tape;
    ad::DiffValue x = tape.leaf(xv);
    ad::DiffValue w = tape.leaf(wv);
    ad::DiffValue b = tape.leaf(bv);
    tape.backward(total(tape, ad::linear(x, w, b)));

    const Matrix colsum = col_sums(xv);
    const Matrix wg = w.grad();
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = 0; c < 2; ++c)
            CHECK(wg(a, c) == doctest::Approx(colsum(0, a)).epsilon(1e-12));
    const Matrix bg = b.grad();
    CHECK(bg(0, 0) == doctest::Approx(3.0));  // one per row
    CHECK(bg(0, 1) == doctest::Approx(3.0));

    // finite-difference confirmation
    auto build = [](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
        return total(t, ad::linear(l[0], l[1], l[2]));
    };
    const ad::GradCheckResult res = ad::grad_check(build, {xv, wv, bv}, 1e-4);
    CHECK(res.ok(1e-5));
}

TEST_CASE("relu forward and gradient mask") {
    ad::Tape tape;
    ad::DiffValue x = tape.leaf(Matrix{{-1, 2}});
    CHECK(ad::relu(x).value() == Matrix{{0, 2}});

    ad::Tape tape2;
    ad::DiffValue neg = tape2.leaf(Matrix{{-1, -2}, {-3, -4}});
    ad::DiffValue y = ad::relu(neg);
    CHECK(y.value() == Matrix(2, 2, 0.0));
    tape2.backward(total(tape2, y));
    CHECK(neg.grad() == Matrix(2, 2, 0.0));

    sigood::Rng rng(3);
    Matrix xv = random_matrix(rng, 3, 3);
    ad::Tape tape3;
    ad::DiffValue x3 = tape3.leaf(xv);
    tape3.backward(total(tape3, ad::relu(x3)));
    const Matrix g = x3.grad();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(g(i, j) == (xv(i, j) > 0.0 ? 1.0 : 0.0));
}

TEST_CASE("layer_norm pinned values") {
    {
        ad::Tape tape;
        ad::DiffValue x = tape.leaf(Matrix{{3, 3, 3}});
        ad::DiffValue gamma = tape.leaf(Matrix(1, 3, 1.0));
        ad::DiffValue lambda = tape.leaf(Matrix(1, 3, 0.0));
        ad::DiffValue y = ad::layer_norm(x, gamma, lambda, 1e-5);
        for (std::size_t j = 0; j < 3; ++j) CHECK(y.value()(0, j) == 0.0);
    }
    {
        ad::Tape tape;
        ad::DiffValue x = tape.leaf(Matrix{{0, 2}});
        ad::DiffValue gamma = tape.leaf(Matrix(1, 2, 1.0));
        ad::DiffValue lambda = tape.leaf(Matrix(1, 2, 0.0));
        ad::DiffValue y = ad::layer_norm(x, gamma, lambda, 1e-12);
        CHECK(y.value()(0, 0) == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(y.value()(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("layer_norm gradient vs finite differences") {
    sigood::Rng rng(4);
    const Matrix xv = random_matrix(rng, 4, 5);
    const Matrix gv = random_matrix(rng, 1, 5, 0.5, 1.5);
    const Matrix lv = random_matrix(rng, 1, 5, -0.5, 0.5);
    const Matrix weights = random_matrix(rng, 5, 1);
    auto build = [&](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
        ad::DiffValue y = ad::layer_norm(l[0], l[1], l[2], 1e-5);
        return ad::matmul(ad::sum_rows(y), t.leaf(weights, "w"));
    };
    CHECK(ad::grad_check(build, {xv, gv, lv}, 1e-4).ok(1e-4));
}

TEST_CASE("row_logsumexp values, stability, shift identity") {
    ad::Tape tape;
    ad::DiffValue x = tape.leaf(Matrix{{0, 0}, {1000, 1000}});
    ad::DiffValue y = ad::row_logsumexp(x);
    CHECK(y.value()(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(y.value()(1, 0) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-12));

    sigood::Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3), c = rng.uniform(-5, 5);
        ad::Tape t1, t2;
        const double base = ad::row_logsumexp(t1.leaf(Matrix{{a, b}})).value()(0, 0);
        const double shifted = ad::row_logsumexp(t2.leaf(Matrix{{a + c, b + c}})).value()(0, 0);
        CHECK(shifted - base == doctest::Approx(c).epsilon(1e-12));
        CHECK(base - std::max(a, b) >= 0.0);
        CHECK(base - std::max(a, b) <= std::log(2.0) + 1e-15);
    }

    // gradient is the row softmax
    ad::Tape t3;
    ad::DiffValue x3 = t3.leaf(Matrix{{1.0, 2.0, 0.5}});
    t3.backward(ad::row_logsumexp(x3));
    const Matrix g = x3.grad();
    double denom = std::exp(1.0) + std::exp(2.0) + std::exp(0.5);
    CHECK(g(0, 0) == doctest::Approx(std::exp(1.0) / denom).epsilon(1e-12));
    CHECK(g(0, 1) == doctest::Approx(std::exp(2.0) / denom).epsilon(1e-12));
    CHECK(g(0, 2) == doctest::Approx(std::exp(0.5) / denom).epsilon(1e-12));
}

TEST_CASE("reduce_mean_subset values and gradient placement") {
    ad::Tape tape;
    ad::DiffValue x = tape.leaf(Matrix::column_vector({1, 2, 3}));
    ad::DiffValue m = ad::reduce_mean_subset(x, {0, 2});
    CHECK(m.value()(0, 0) == 2.0);
    tape.backward(m);
    const Matrix g = x.grad();
    CHECK(g(0, 0) == 0.5);
    CHECK(g(1, 0) == 0.0);
    CHECK(g(2, 0) == 0.5);

    ad::Tape tape2;
    ad::DiffValue x2 = tape2.leaf(Matrix::column_vector({4, 8}));
    CHECK(ad::reduce_mean_subset(x2, {0, 1}).value()(0, 0) == 6.0);
    CHECK_THROWS_AS(ad::reduce_mean_subset(x2, {}), std::invalid_argument);
    CHECK_THROWS_AS(ad::reduce_mean_subset(x2, {5}), std::invalid_argument);
}

TEST_CASE("elementwise op values") {
    ad::Tape tape;
    CHECK(ad::sigmoid(tape.leaf(Matrix{{0.0}})).value()(0, 0) == 0.5);
    CHECK(ad::softplus(tape.leaf(Matrix{{0.0}})).value()(0, 0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(ad::log(tape.leaf(Matrix{{0.0}})), std::domain_error);
    CHECK_THROWS_AS(ad::log(tape.leaf(Matrix{{-1.0}})), std::domain_error);
    CHECK(ad::exp(ad::log(tape.leaf(Matrix{{2.5}}))).value()(0, 0) ==
          doctest::Approx(2.5).epsilon(1e-14));
    CHECK(ad::neg(tape.leaf(Matrix{{3.0, -4.0}})).value() == Matrix{{-3.0, 4.0}});
    CHECK(ad::add_scalar(tape.leaf(Matrix{{1.0}}), 2.5).value()(0, 0) == 3.5);
    CHECK(ad::mul_scalar(tape.leaf(Matrix{{2.0}}), -3.0).value()(0, 0) == -6.0);
}

TEST_CASE("elementwise gradients vs finite differences") {
    sigood::Rng rng(6);
    const Matrix xv = random_matrix(rng, 3, 3, 0.5, 2.0);  // positive, log-safe
    const Matrix weights = random_matrix(rng, 3, 1);
    auto weigh = [&](ad::Tape& t, ad::DiffValue y) {
        return ad::matmul(ad::sum_rows(y), t.leaf(weights, "w"));
    };
    auto check_unary = [&](auto op) {
        auto build = [&](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
            return weigh(t, op(l[0]));
        };
        CHECK(ad::grad_check(build, {xv}, 1e-4).ok(1e-4));
    };
    check_unary([](ad::DiffValue v) { return ad::log(v); });
    check_unary([](ad::DiffValue v) { return ad::exp(v); });
    check_unary([](ad::DiffValue v) { return ad::softplus(v); });
    check_unary([](ad::DiffValue v) { return ad::sigmoid(v); });
    check_unary([](ad::DiffValue v) { return ad::neg(v); });
    check_unary([](ad::DiffValue v) { return ad::mul_scalar(v, 1.7); });
    check_unary([](ad::DiffValue v) { return ad::clamp(v, 0.7, 1.8); });
    check_unary([](ad::DiffValue v) { return ad::relu(ad::add_scalar(v, -1.0)); });
}

TEST_CASE("binary and structural op gradients vs finite differences") {
    sigood::Rng rng(7);
    const Matrix av = random_matrix(rng, 3, 4);
    const Matrix bv = random_matrix(rng, 3, 4);
    const Matrix mv = random_matrix(rng, 4, 2);
    const Matrix weights2 = random_matrix(rng, 2, 1);
    const Matrix weights4 = random_matrix(rng, 4, 1);
    const Matrix denom = random_matrix(rng, 3, 4, 0.5, 2.0);
    const Matrix lmc = random_matrix(rng, 2, 3);

    auto build_matmul = [&](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
        return ad::matmul(ad::sum_rows(ad::matmul(l[0], l[1])), t.leaf(weights2, "w"));
    };
    CHECK(ad::grad_check(build_matmul, {av, mv}, 1e-4).ok(1e-4));

    auto build_addsub = [&](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
        ad::DiffValue y = ad::sub(ad::add(l[0], l[1]), ad::mul_scalar(l[0], 0.5));
        return ad::matmul(ad::sum_rows(y), t.leaf(weights4, "w"));
    };
    CHECK(ad::grad_check(build_addsub, {av, bv}, 1e-4).ok(1e-4));

    auto build_div = [&](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
        return ad::matmul(ad::sum_rows(ad::div_by_const(l[0], denom)), t.leaf(weights4, "w"));
    };
    CHECK(ad::grad_check(build_div, {av}, 1e-4).ok(1e-4));

    auto build_lmc = [&](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
        return ad::matmul(ad::sum_rows(ad::left_matmul_const(lmc, l[0])), t.leaf(weights4, "w"));
    };
    CHECK(ad::grad_check(build_lmc, {av}, 1e-4).ok(1e-4));

    auto build_means = [&](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
        ad::DiffValue y = ad::add(ad::mean_rows(l[0]), ad::sum_rows(l[0]));
        return ad::matmul(y, t.leaf(weights4, "w"));
    };
    CHECK(ad::grad_check(build_means, {av}, 1e-4).ok(1e-4));

    auto build_entry = [&](ad::Tape&, const std::vector<ad::DiffValue>& l) {
        return ad::entry(ad::add_const(l[0], bv), 1, 2);
    };
    CHECK(ad::grad_check(build_entry, {av}, 1e-4).ok(1e-4));
}

TEST_CASE("colwise_max takes first argmax on ties") {
    ad::Tape tape;
    ad::DiffValue x = tape.leaf(Matrix{{1, 5}, {3, 5}, {3, 2}});
    ad::DiffValue y = ad::colwise_max(x);
    CHECK(y.value() == Matrix{{3, 5}});
    tape.backward(ad::matmul(y, tape.leaf(Matrix(2, 1, 1.0))));
    const Matrix g = x.grad();
    CHECK(g(0, 1) == 1.0);  // first of the tied 5s
    CHECK(g(1, 1) == 0.0);
    CHECK(g(1, 0) == 1.0);  // first of the tied 3s
    CHECK(g(2, 0) == 0.0);
}

TEST_CASE("backward bookkeeping") {
    ad::Tape tape;
    ad::DiffValue x = tape.leaf(Matrix{{1, 2}, {3, 4}});
    ad::DiffValue y = tape.leaf(Matrix{{9, 9}});  // never used downstream
    ad::DiffValue s = total(tape, x);

    SUBCASE("non-scalar root rejected") {
        CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);
    }

    SUBCASE("sum root gives all-ones; unused leaf reads zeros") {
        tape.backward(s);
        CHECK(x.grad() == Matrix(2, 2, 1.0));
        CHECK(y.grad() == Matrix(1, 2, 0.0));
        CHECK_FALSE(tape.grad_set(y.id));
    }

    SUBCASE("double backward refused until reset") {
        tape.backward(s);
        CHECK_THROWS_AS(tape.backward(s), std::logic_error);
        tape.reset_grads();
        tape.backward(s);
        CHECK(x.grad() == Matrix(2, 2, 1.0));
    }
}

TEST_CASE("backward is bitwise deterministic") {
    sigood::Rng rng(8);
    const Matrix xv = random_matrix(rng, 4, 4);
    const Matrix wv = random_matrix(rng, 4, 4);
    auto run = [&]() {
        ad::Tape tape;
        ad::DiffValue x = tape.leaf(xv);
        ad::DiffValue w = tape.leaf(wv);
        ad::DiffValue y = ad::softplus(ad::matmul(ad::relu(x), w));
        tape.backward(total(tape, y));
        return std::pair<Matrix, Matrix>(x.grad(), w.grad());
    };
    auto [g1x, g1w] = run();
    auto [g2x, g2w] = run();
    CHECK(g1x == g2x);  // exact bitwise equality
    CHECK(g1w == g2w);
}

TEST_CASE("grad_check accepts quadratic, rejects planted wrong gradient") {
    sigood::Rng rng(9);
    const Matrix xv = random_matrix(rng, 3, 3);

    auto quadratic = [](ad::Tape& t, const std::vector<ad::DiffValue>& l) {
        ad::DiffValue sq = ad::matmul(l[0], l[0]);
        return total(t, sq);
    };
    CHECK(ad::grad_check(quadratic, {xv}, 1e-4).ok(1e-6));

    auto constant = [](ad::Tape& t, const std::vector<ad::DiffValue>&) {
        return t.leaf(Matrix{{1.0}}, "const");
    };
    CHECK(ad::grad_check(constant, {xv}, 1e-4).ok(1e-12));

    // negative control: forward of exp with a backward that lies (factor 2)
    auto broken = [](ad::Tape&, const std::vector<ad::DiffValue>& l) {
        ad::DiffValue x = l[0];
        std::size_t ix = x.id;
        Matrix out = x.value().map([](double v) { return std::exp(v); });
        ad::DiffValue y = x.tape->make_node(
            std::move(out), "exp-broken", {ix}, [ix](ad::Tape& t, std::size_t self) {
                const Matrix g = t.grad(self);
                const Matrix y2 = t.value(self);
                t.accumulate_grad(ix, 2.0 * sigood::hadamard(g, y2));
            });
        return ad::reduce_mean_subset(y, {0});
    };
    const ad::GradCheckResult res = ad::grad_check(broken, {Matrix::column_vector({0.3})}, 1e-4);
    CHECK_FALSE(res.ok(1e-4));
    CHECK(res.max_rel_err > 0.1);
}

TEST_CASE("ops reject cross-tape operands and shape mismatches") {
    ad::Tape t1, t2;
    ad::DiffValue a = t1.leaf(Matrix{{1, 2}});
    ad::DiffValue b = t2.leaf(Matrix{{3, 4}});
    CHECK_THROWS_AS(ad::add(a, b), std::invalid_argument);
    ad::DiffValue c = t1.leaf(Matrix{{1, 2, 3}});
    CHECK_THROWS_AS(ad::add(a, c), std::invalid_argument);
    CHECK_THROWS_AS(ad::matmul(a, c), std::invalid_argument);
    CHECK_THROWS_AS(ad::clamp(a, 2.0, 1.0), std::invalid_argument);
}
