#include "doctest.h"

#include <stdexcept>

#include "sigood/matrix.hpp"
#include "sigood/rng.hpp"

using sigood::Matrix;

TEST_CASE("construction and element access") {
    Matrix m(2, 3, 1.5);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 1.5);

    Matrix init{{1.0, 2.0}, {3.0, 4.0}};
    CHECK(init(0, 1) == 2.0);
    CHECK(init(1, 0) == 3.0);
    CHECK_THROWS_AS(init.at(2, 0), std::out_of_range);
    CHECK_THROWS_AS((Matrix{{1.0}, {2.0, 3.0}}), std::invalid_argument);
}

TEST_CASE("identity and vector builders") {
    Matrix eye = Matrix::identity(3);
    CHECK(eye(0, 0) == 1.0);
    CHECK(eye(0, 1) == 0.0);
    Matrix r = Matrix::row_vector({1, 2, 3});
    CHECK(r.rows() == 1);
    CHECK(r.cols() == 3);
    Matrix c = Matrix::column_vector({1, 2});
    CHECK(c.rows() == 2);
    CHECK(c.cols() == 1);
}

TEST_CASE("arithmetic and shape guards") {
    Matrix a{{1, 2}, {3, 4}};
    Matrix b{{10, 20}, {30, 40}};
    CHECK((a + b)(1, 1) == 44.0);
    CHECK((b - a)(0, 0) == 9.0);
    CHECK((a * 2.0)(1, 0) == 6.0);
    CHECK((2.0 * a)(1, 0) == 6.0);
    Matrix wrong(3, 2);
    CHECK_THROWS_AS(a += wrong, std::invalid_argument);
}

TEST_CASE("matmul matches hand-computed product") {
    Matrix a{{1, 2, 3}, {4, 5, 6}};
    Matrix b{{7, 8}, {9, 10}, {11, 12}};
    Matrix c = matmul(a, b);
    CHECK(c.rows() == 2);
    CHECK(c.cols() == 2);
    CHECK(c(0, 0) == 58.0);
    CHECK(c(0, 1) == 64.0);
    CHECK(c(1, 0) == 139.0);
    CHECK(c(1, 1) == 154.0);
    CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
}

TEST_CASE("matmul identity and zero-row behavior") {
    sigood::Rng rng(41);
    Matrix m(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) m(i, j) = rng.uniform(-1, 1);
    CHECK(matmul(Matrix::identity(4), m) == m);
    CHECK(matmul(m, Matrix::identity(4)) == m);

    // sparse left factor: skipped zero entries must not change the result
    Matrix sparse(3, 4, 0.0);
    sparse(0, 2) = 2.0;
    sparse(2, 0) = -1.0;
    Matrix prod = matmul(sparse, m);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(prod(0, j) == 2.0 * m(2, j));
        CHECK(prod(1, j) == 0.0);
        CHECK(prod(2, j) == -1.0 * m(0, j));
    }
}

TEST_CASE("transpose, hadamard, reductions") {
    Matrix a{{1, 2, 3}, {4, 5, 6}};
    Matrix t = a.transpose();
    CHECK(t.rows() == 3);
    CHECK(t(2, 1) == 6.0);
    CHECK(a.transpose().transpose() == a);

    Matrix h = hadamard(a, a);
    CHECK(h(1, 2) == 36.0);

    CHECK(a.sum() == 21.0);
    Matrix neg{{-7, 2}};
    CHECK(neg.max_abs() == 7.0);

    Matrix cs = col_sums(a);
    CHECK(cs.rows() == 1);
    CHECK(cs(0, 0) == 5.0);
    CHECK(cs(0, 2) == 9.0);
}

TEST_CASE("row broadcast and diff helpers") {
    Matrix m{{1, 1}, {2, 2}};
    Matrix row{{10, 20}};
    Matrix shifted = add_row_broadcast(m, row);
    CHECK(shifted(0, 1) == 21.0);
    CHECK(shifted(1, 0) == 12.0);
    CHECK_THROWS_AS(add_row_broadcast(m, Matrix{{1, 2, 3}}), std::invalid_argument);

    CHECK(sigood::max_abs_diff(m, m) == 0.0);
    Matrix m2 = m;
    m2(1, 1) = 5.0;
    CHECK(sigood::max_abs_diff(m, m2) == 3.0);
}

TEST_CASE("map applies elementwise") {
    Matrix m{{1, -2}, {-3, 4}};
    Matrix abs = m.map([](double v) { return v < 0 ? -v : v; });
    CHECK(abs(0, 1) == 2.0);
    CHECK(abs(1, 0) == 3.0);
}
