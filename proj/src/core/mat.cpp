#include "mat.hpp"

#include <cmath>
#include <string>

namespace meda {

namespace {

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), errc::dimension_mismatch,
            std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

} // namespace

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, errc::dimension_mismatch,
            "matrix data size " + std::to_string(data_.size()) + " != " + std::to_string(rows_ * cols_));
    ensure_finite("matrix construction");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require(r.size() == cols_, errc::dimension_mismatch, "ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
    ensure_finite("matrix construction");
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::column(std::span<const double> v) {
    Mat m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    m.ensure_finite("column construction");
    return m;
}

bool Mat::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Mat::ensure_finite(const char* what) const {
    if (!all_finite()) raise(errc::not_finite, std::string(what) + " produced a NaN/Inf entry");
}

double Mat::frob_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Mat::inf_norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (double v : row(i)) s += std::fabs(v);
        if (s > best) best = s;
    }
    return best;
}

double Mat::max_abs() const {
    double best = 0.0;
    for (double v : data_) best = std::max(best, std::fabs(v));
    return best;
}

Mat operator+(const Mat& a, const Mat& b) {
    check_same_shape(a, b, "add");
    Mat c = a;
    auto cd = c.mutable_data();
    auto bd = b.data();
    for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
    return c;
}

Mat operator-(const Mat& a, const Mat& b) {
    check_same_shape(a, b, "sub");
    Mat c = a;
    auto cd = c.mutable_data();
    auto bd = b.data();
    for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
    return c;
}

Mat operator*(const Mat& a, const Mat& b) {
    require(a.cols() == b.rows(), errc::dimension_mismatch,
            "matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " * " +
                std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    Mat c(a.rows(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            auto bl = b.row(l);
            for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
        }
    }
    return c;
}

Mat operator*(double s, const Mat& a) {
    Mat c = a;
    for (double& v : c.mutable_data()) v *= s;
    return c;
}

Mat transpose(const Mat& a) {
    Mat t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Mat at_b(const Mat& a, const Mat& b) {
    require(a.rows() == b.rows(), errc::dimension_mismatch, "at_b: row counts differ");
    Mat c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ai = a.row(i);
        auto bi = b.row(i);
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double v = ai[p];
            if (v == 0.0) continue;
            auto cp = c.row(p);
            for (std::size_t q = 0; q < b.cols(); ++q) cp[q] += v * bi[q];
        }
    }
    return c;
}

Mat gram(const Mat& x) { return at_b(x, x); }

double dot(const Mat& a, const Mat& b) {
    check_same_shape(a, b, "dot");
    double s = 0.0;
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i) s += ad[i] * bd[i];
    return s;
}

double trace(const Mat& a) {
    require(a.is_square(), errc::dimension_mismatch, "trace: matrix not square");
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
    return s;
}

Mat diag_part(const Mat& a) {
    require(a.is_square(), errc::dimension_mismatch, "diag_part: matrix not square");
    Mat d(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) d(i, i) = a(i, i);
    return d;
}

void add_to_diag(Mat& a, double s) {
    require(a.is_square(), errc::dimension_mismatch, "add_to_diag: matrix not square");
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += s;
}

} // namespace meda
