#include "smokegram/matrix.hpp"

#include <cmath>
#include <string>

#include "smokegram/errors.hpp"
#include "smokegram/kernels.hpp"

namespace smokegram {
namespace {

std::string shape_of(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix out(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw DimensionError("from_rows: ragged rows (" + std::to_string(row.size()) +
                                 " vs " + std::to_string(c) + ")");
        }
        std::size_t j = 0;
        for (double v : row) {
            out(i, j++) = v;
        }
        ++i;
    }
    return out;
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: incompatible shapes " + shape_of(a) + " and " +
                             shape_of(b));
    }
    Matrix c(a.rows(), b.cols());
    kernels::active().matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out(c, r) = m(r, c);
        }
    }
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix c(a.rows(), a.cols());
    kernels::active().hadamard(a.data(), b.data(), c.data(), a.size());
    return c;
}

void add_row_vector(Matrix& mat, const Matrix& row) {
    if (row.rows() != 1 || row.cols() != mat.cols()) {
        throw DimensionError("add_row_vector: want 1x" + std::to_string(mat.cols()) +
                             ", got " + shape_of(row));
    }
    kernels::active().add_row_vector(mat.data(), row.data(), mat.rows(), mat.cols());
}

Matrix column_sums(const Matrix& mat) {
    Matrix out(1, mat.cols());
    kernels::active().column_sums(mat.data(), out.data(), mat.rows(), mat.cols());
    return out;
}

Matrix row_of(const Matrix& m, std::size_t r) {
    Matrix out(1, m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        out(0, c) = m(r, c);
    }
    return out;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_of(a) +
                             " vs " + shape_of(b));
    }
}

} // namespace smokegram
