#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "errors.hpp"

namespace meda {

/// Dense real matrix, row-major doubles. The single numeric carrier used
/// throughout the library. Entries must be finite on construction from data;
/// solvers and fitters re-validate their outputs.
class Mat {
public:
    Mat() = default;

    /// Zero-initialized rows x cols.
    Mat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    /// Takes ownership of row-major data; validates size and finiteness.
    Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

    /// Literal construction, mostly for tests: Mat{{1,2},{3,4}}.
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t n);

    /// Single-column matrix from a vector.
    static Mat column(std::span<const double> v);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> mutable_data() noexcept { return data_; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    bool all_finite() const noexcept;

    /// Raises NotFinite naming `what` if any entry is NaN/Inf.
    void ensure_finite(const char* what) const;

    double frob_norm() const;
    double inf_norm() const;  // max absolute row sum
    double max_abs() const;

    bool operator==(const Mat& o) const noexcept = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& a);

Mat transpose(const Mat& a);

/// a^T b without forming the transpose; a is N x p, b is N x q.
Mat at_b(const Mat& a, const Mat& b);

/// x^T x (symmetric PSD Gram form).
Mat gram(const Mat& x);

/// Entrywise product sum, i.e. Tr(a^T b).
double dot(const Mat& a, const Mat& b);

double trace(const Mat& a);

/// Square matrix keeping only the diagonal of `a`.
Mat diag_part(const Mat& a);

/// Adds s to the diagonal in place.
void add_to_diag(Mat& a, double s);

} // namespace meda
