#ifndef DRESFL_MATRIX_HPP
#define DRESFL_MATRIX_HPP

#include <gmpxx.h>

#include <cstddef>
#include <vector>

#include "dresfl/errors.hpp"
#include "dresfl/field.hpp"

namespace dresfl {

// Dense row-major matrix over any numeric carrier (FieldElement, mpz_class,
// double). Desk-scale sizes only; no attempt at blocking or views.
template <typename T>
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    Matrix(std::size_t rows, std::size_t cols, const T& fill)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix& other) const {
        return same_shape(other) && data_ == other.data_;
    }

    // Rows of this matrix at the given indices, in order.
    Matrix select_rows(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            if (idx[r] >= rows_) throw DomainError("row index out of range");
            for (std::size_t c = 0; c < cols_; ++c) out(r, c) = (*this)(idx[r], c);
        }
        return out;
    }

    static Matrix vstack(const std::vector<Matrix>& blocks) {
        if (blocks.empty()) return Matrix();
        std::size_t rows = 0;
        for (const auto& b : blocks) {
            if (b.cols() != blocks.front().cols()) throw DomainError("vstack: column mismatch");
            rows += b.rows();
        }
        Matrix out(rows, blocks.front().cols());
        std::size_t at = 0;
        for (const auto& b : blocks) {
            for (std::size_t r = 0; r < b.rows(); ++r, ++at)
                for (std::size_t c = 0; c < b.cols(); ++c) out(at, c) = b(r, c);
        }
        return out;
    }

private:
    std::size_t rows_, cols_;
    std::vector<T> data_;
};

using FieldMatrix = Matrix<FieldElement>;
using IntMatrix = Matrix<mpz_class>;
using RealMatrix = Matrix<double>;

inline IntMatrix to_signed(const FieldMatrix& m) {
    IntMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c).to_signed();
    return out;
}

inline FieldMatrix from_signed(const IntMatrix& m, const FieldParams& params) {
    FieldMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(r, c) = FieldElement::from_signed(m(r, c), params);
    return out;
}

}  // namespace dresfl

#endif
