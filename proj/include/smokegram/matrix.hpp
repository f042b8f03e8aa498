#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace smokegram {

// Dense row-major matrix of doubles. Sized for small networks (widest thing
// in this project is a batch x 60 feature block), not a general tensor.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const;

    // Exact element-wise equality (bitwise for normal values).
    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// c = a * b; throws DimensionError naming both shapes if a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

// c[i] = a[i] * b[i]; shapes must match.
Matrix hadamard(const Matrix& a, const Matrix& b);

// mat[r] += row (row is 1 x cols).
void add_row_vector(Matrix& mat, const Matrix& row);

// out[0][c] = sum over rows of mat[r][c].
Matrix column_sums(const Matrix& mat);

Matrix row_of(const Matrix& m, std::size_t r);

void require_same_shape(const Matrix& a, const Matrix& b, const char* op);

} // namespace smokegram
