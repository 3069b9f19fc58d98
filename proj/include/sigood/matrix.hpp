#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace sigood {

// Dense row-major matrix of doubles. All reductions run in a fixed
// sequential order so results are bitwise reproducible across runs.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    static Matrix identity(std::size_t n);
    static Matrix row_vector(const std::vector<double>& values);
    static Matrix column_vector(const std::vector<double>& values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double scalar);

    friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
    friend Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
    friend Matrix operator*(Matrix lhs, double scalar) { return lhs *= scalar; }
    friend Matrix operator*(double scalar, Matrix rhs) { return rhs *= scalar; }

    // Exact bitwise comparison (no tolerance).
    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    Matrix transpose() const;

    template <typename Fn>
    Matrix map(Fn&& fn) const {
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = fn(data_[i]);
        return out;
    }

    double sum() const;
    double max_abs() const;

    std::string shape_str() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);

// out(1, j) = sum_i m(i, j)
Matrix col_sums(const Matrix& m);

// Adds row vector `row` [1 x c] to every row of `m` [n x c].
Matrix add_row_broadcast(const Matrix& m, const Matrix& row);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace sigood
