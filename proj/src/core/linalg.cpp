#include "linalg.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

namespace meda::linalg {

namespace {

struct LuFactors {
    Mat lu;
    std::vector<std::size_t> perm;
};

LuFactors lu_factor(const Mat& a) {
    const std::size_t n = a.rows();
    const double tol = 1e-12 * a.inf_norm();
    LuFactors f{a, std::vector<std::size_t>(n)};
    Mat& lu = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::fabs(lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (!(best > tol))
            raise(errc::singular_matrix,
                  "pivot " + std::to_string(best) + " below threshold at column " + std::to_string(k));
        f.perm[k] = piv;
        if (piv != k) {
            auto rk = lu.row(k);
            auto rp = lu.row(piv);
            std::swap_ranges(rk.begin(), rk.end(), rp.begin());
        }
        const double inv = 1.0 / lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = lu(i, k) * inv;
            lu(i, k) = l;
            if (l == 0.0) continue;
            auto ri = lu.row(i);
            auto rk = lu.row(k);
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
        }
    }
    return f;
}

Mat lu_solve(const LuFactors& f, const Mat& b) {
    const std::size_t n = f.lu.rows();
    Mat x = b;
    const std::size_t m = x.cols();
    for (std::size_t k = 0; k < n; ++k) {
        if (f.perm[k] != k) {
            auto rk = x.row(k);
            auto rp = x.row(f.perm[k]);
            std::swap_ranges(rk.begin(), rk.end(), rp.begin());
        }
    }
    // forward substitution with unit lower factor
    for (std::size_t k = 0; k < n; ++k) {
        auto xk = x.row(k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = f.lu(i, k);
            if (l == 0.0) continue;
            auto xi = x.row(i);
            for (std::size_t j = 0; j < m; ++j) xi[j] -= l * xk[j];
        }
    }
    // back substitution
    for (std::size_t kk = n; kk-- > 0;) {
        auto xk = x.row(kk);
        const double inv = 1.0 / f.lu(kk, kk);
        for (std::size_t j = 0; j < m; ++j) xk[j] *= inv;
        for (std::size_t i = 0; i < kk; ++i) {
            const double u = f.lu(i, kk);
            if (u == 0.0) continue;
            auto xi = x.row(i);
            for (std::size_t j = 0; j < m; ++j) xi[j] -= u * xk[j];
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Real Schur machinery
// ---------------------------------------------------------------------------

// Householder reduction to upper Hessenberg form; a = q h q^T on return.
void hessenberg_reduce(Mat& h, Mat& q) {
    const std::size_t n = h.rows();
    std::vector<double> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) scale += std::fabs(h(i, k));
        if (scale == 0.0) continue;
        double norm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = h(i, k) / scale;
            norm2 += v[i] * v[i];
        }
        double alpha = std::sqrt(norm2);
        if (v[k + 1] > 0) alpha = -alpha;
        v[k + 1] -= alpha;
        double vv = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vv += v[i] * v[i];
        if (vv == 0.0) continue;
        const double beta = 2.0 / vv;

        // left: h(k+1..n-1, k..n-1) -= beta v (v^T h)
        for (std::size_t j = k; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h(i, j);
            s *= beta;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
        }
        // right: h(0..n-1, k+1..n-1) -= beta (h v) v^T
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j];
            s *= beta;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
        }
        // accumulate q <- q P
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += q(i, j) * v[j];
            s *= beta;
            for (std::size_t j = k + 1; j < n; ++j) q(i, j) -= s * v[j];
        }
        h(k + 1, k) = alpha * scale;
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

// One implicit double-shift sweep on the active window [lo..hi].
void francis_sweep(Mat& t, Mat& q, std::size_t lo, std::size_t hi, int its) {
    const std::size_t n = t.rows();
    double h11, h12, h21, h22;
    if (its >= 10 && its % 10 == 0) {
        // exceptional shift built from the subdiagonal magnitudes
        const double s = std::fabs(t(hi, hi - 1)) + (hi >= lo + 2 ? std::fabs(t(hi - 1, hi - 2)) : 0.0);
        h11 = 0.75 * s + t(hi, hi);
        h12 = -0.4375 * s;
        h21 = s;
        h22 = t(hi, hi);
    } else {
        h11 = t(hi - 1, hi - 1);
        h12 = t(hi - 1, hi);
        h21 = t(hi, hi - 1);
        h22 = t(hi, hi);
    }
    const double shift_sum = h11 + h22;
    const double shift_prod = h11 * h22 - h12 * h21;

    double x = t(lo, lo) * t(lo, lo) + t(lo, lo + 1) * t(lo + 1, lo) - shift_sum * t(lo, lo) + shift_prod;
    double y = t(lo + 1, lo) * (t(lo, lo) + t(lo + 1, lo + 1) - shift_sum);
    double z = (lo + 2 <= hi) ? t(lo + 1, lo) * t(lo + 2, lo + 1) : 0.0;

    for (std::size_t k = lo; k <= hi - 1; ++k) {
        const std::size_t nr = std::min<std::size_t>(3, hi - k + 1);
        if (k > lo) {
            x = t(k, k - 1);
            y = t(k + 1, k - 1);
            z = (nr == 3) ? t(k + 2, k - 1) : 0.0;
        }
        const double scale = std::fabs(x) + std::fabs(y) + std::fabs(z);
        if (scale == 0.0) continue;
        double x0 = x / scale, y0 = y / scale, z0 = z / scale;
        double norm = std::sqrt(x0 * x0 + y0 * y0 + z0 * z0);
        if (x0 > 0) norm = -norm;
        if (norm == 0.0) continue;
        double v0 = x0 - norm, v1 = y0, v2 = z0;
        const double vv = v0 * v0 + v1 * v1 + v2 * v2;
        if (vv == 0.0) continue;
        const double beta = 2.0 / vv;

        const std::size_t r0 = k, r1 = k + 1, r2 = (nr == 3) ? k + 2 : k + 1;
        const std::size_t jl = (k == lo) ? k : k - 1;

        // left: rows r0..r2
        for (std::size_t j = jl; j < n; ++j) {
            double s = v0 * t(r0, j) + v1 * t(r1, j);
            if (nr == 3) s += v2 * t(r2, j);
            s *= beta;
            t(r0, j) -= s * v0;
            t(r1, j) -= s * v1;
            if (nr == 3) t(r2, j) -= s * v2;
        }
        // right: cols r0..r0+nr-1, rows up to the bulge edge
        const std::size_t ir = std::min(k + 3, hi);
        for (std::size_t i = 0; i <= ir; ++i) {
            double s = t(i, r0) * v0 + t(i, r1) * v1;
            if (nr == 3) s += t(i, r2) * v2;
            s *= beta;
            t(i, r0) -= s * v0;
            t(i, r1) -= s * v1;
            if (nr == 3) t(i, r2) -= s * v2;
        }
        // accumulate q
        for (std::size_t i = 0; i < n; ++i) {
            double s = q(i, r0) * v0 + q(i, r1) * v1;
            if (nr == 3) s += q(i, r2) * v2;
            s *= beta;
            q(i, r0) -= s * v0;
            q(i, r1) -= s * v1;
            if (nr == 3) q(i, r2) -= s * v2;
        }
        if (k > lo) {
            t(k + 1, k - 1) = 0.0;
            if (nr == 3) t(k + 2, k - 1) = 0.0;
        }
    }
}

// Splits a converged trailing 2x2 block with real eigenvalues into two 1x1
// blocks by a similarity rotation; complex pairs are left in place.
void settle_2x2(Mat& t, Mat& q, std::size_t l) {
    const std::size_t n = t.rows();
    const std::size_t m = l + 1;
    const double a = t(l, l), b = t(l, m), c = t(m, l), d = t(m, m);
    if (c == 0.0) return;
    const double half = 0.5 * (a - d);
    const double disc = half * half + b * c;
    if (disc < 0.0) return;  // complex conjugate pair stays as a 2x2 block
    const double sq = std::sqrt(disc);
    const double mid = 0.5 * (a + d);
    const double lam1 = mid + sq, lam2 = mid - sq;
    const double lam = (std::fabs(lam1 - d) >= std::fabs(lam2 - d)) ? lam1 : lam2;
    // eigenvector (lam - d, c) defines the rotation's first column
    double cs = lam - d, sn = c;
    const double r = std::hypot(cs, sn);
    if (r == 0.0) return;
    cs /= r;
    sn /= r;
    // rows l, m across the upper part; cols l, m down to row m
    for (std::size_t j = l; j < n; ++j) {
        const double tl = t(l, j), tm = t(m, j);
        t(l, j) = cs * tl + sn * tm;
        t(m, j) = -sn * tl + cs * tm;
    }
    for (std::size_t i = 0; i <= m; ++i) {
        const double til = t(i, l), tim = t(i, m);
        t(i, l) = cs * til + sn * tim;
        t(i, m) = -sn * til + cs * tim;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double qil = q(i, l), qim = q(i, m);
        q(i, l) = cs * qil + sn * qim;
        q(i, m) = -sn * qil + cs * qim;
    }
    t(m, l) = 0.0;
}

// Diagonal block partition of a quasi-upper-triangular matrix.
std::vector<std::pair<std::size_t, std::size_t>> block_partition(const Mat& t) {
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    const std::size_t n = t.rows();
    std::size_t i = 0;
    while (i < n) {
        if (i + 1 < n && t(i + 1, i) != 0.0) {
            blocks.emplace_back(i, 2);
            i += 2;
        } else {
            blocks.emplace_back(i, 1);
            i += 1;
        }
    }
    return blocks;
}

// Direct pivoted Gauss solve for the tiny (<=4x4) systems of the
// quasi-triangular back substitution.
void solve_small(double m[4][4], double rhs[4], std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(m[i][k]) > std::fabs(m[piv][k])) piv = i;
        if (m[piv][k] == 0.0)
            raise(errc::spectrum_overlap, "degenerate diagonal-block system in Sylvester back substitution");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m[k][j], m[piv][j]);
            std::swap(rhs[k], rhs[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m[i][k] / m[k][k];
            rhs[i] -= f * rhs[k];
            for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = kk + 1; j < n; ++j) rhs[kk] -= m[kk][j] * rhs[j];
        rhs[kk] /= m[kk][kk];
    }
}

// Solves r y + y s = f with r, s quasi-upper-triangular.
Mat quasi_triangular_sylvester(const Mat& r, const Mat& s, const Mat& f) {
    const auto rblocks = block_partition(r);
    const auto sblocks = block_partition(s);
    Mat y(f.rows(), f.cols());

    for (const auto& [c0, nc] : sblocks) {
        // g = f[:, c0..] - y * s[:, c0..] restricted to already-solved columns
        Mat g(f.rows(), nc);
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t c = 0; c < nc; ++c) {
                double acc = f(i, c0 + c);
                for (std::size_t j = 0; j < c0; ++j) acc -= y(i, j) * s(j, c0 + c);
                g(i, c) = acc;
            }
        for (auto it = rblocks.rbegin(); it != rblocks.rend(); ++it) {
            const auto [i0, nrow] = *it;
            double h[2][2] = {{0, 0}, {0, 0}};
            for (std::size_t ri = 0; ri < nrow; ++ri)
                for (std::size_t c = 0; c < nc; ++c) {
                    double acc = g(i0 + ri, c);
                    for (std::size_t k = i0 + nrow; k < r.rows(); ++k) acc -= r(i0 + ri, k) * y(k, c0 + c);
                    h[ri][c] = acc;
                }
            // (I (x) r_blk + s_blk^T (x) I) vec(y_blk) = vec(h), column-major vec
            const std::size_t nn = nrow * nc;
            double m[4][4] = {};
            double rhs[4] = {};
            for (std::size_t c = 0; c < nc; ++c)
                for (std::size_t ri = 0; ri < nrow; ++ri) {
                    const std::size_t row = c * nrow + ri;
                    rhs[row] = h[ri][c];
                    for (std::size_t rj = 0; rj < nrow; ++rj) m[row][c * nrow + rj] += r(i0 + ri, i0 + rj);
                    for (std::size_t cj = 0; cj < nc; ++cj) m[row][cj * nrow + ri] += s(c0 + cj, c0 + c);
                }
            solve_small(m, rhs, nn);
            for (std::size_t c = 0; c < nc; ++c)
                for (std::size_t ri = 0; ri < nrow; ++ri) y(i0 + ri, c0 + c) = rhs[c * nrow + ri];
        }
    }
    return y;
}

} // namespace

Mat solve_linear(const Mat& a, const Mat& b) {
    require(a.is_square(), errc::dimension_mismatch, "solve_linear: coefficient matrix not square");
    require(b.rows() == a.rows(), errc::dimension_mismatch, "solve_linear: rhs row count mismatch");
    a.ensure_finite("solve_linear input a");
    b.ensure_finite("solve_linear input b");
    Mat x = lu_solve(lu_factor(a), b);
    x.ensure_finite("solve_linear");
    return x;
}

SchurForm schur_decompose(const Mat& a) {
    require(a.is_square(), errc::dimension_mismatch, "schur_decompose: matrix not square");
    a.ensure_finite("schur_decompose input");
    const std::size_t n = a.rows();
    SchurForm out{Mat::identity(n), a};
    if (n <= 1) return out;

    Mat& t = out.t;
    Mat& q = out.q;
    hessenberg_reduce(t, q);

    const double eps = DBL_EPSILON;
    const double anorm = std::max(t.inf_norm(), DBL_MIN);
    const int budget = 30 * static_cast<int>(n);
    int sweeps = 0;
    int its = 0;

    std::size_t hi = n - 1;
    while (true) {
        // scan for a negligible subdiagonal entry above hi
        std::size_t lo = hi;
        while (lo > 0) {
            double ssum = std::fabs(t(lo - 1, lo - 1)) + std::fabs(t(lo, lo));
            if (ssum == 0.0) ssum = anorm;
            if (std::fabs(t(lo, lo - 1)) <= eps * ssum) {
                t(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            if (hi == 0) break;
            --hi;
            its = 0;
            continue;
        }
        if (lo + 1 == hi) {
            settle_2x2(t, q, lo);
            if (lo == 0) break;
            hi = lo - 1;
            its = 0;
            continue;
        }
        if (sweeps >= budget)
            raise(errc::convergence_failure,
                  "QR iteration budget " + std::to_string(budget) + " exhausted at block size " +
                      std::to_string(hi - lo + 1));
        ++sweeps;
        ++its;
        francis_sweep(t, q, lo, hi, its);
    }

    // quasi-triangular cleanup: exact zeros below the first subdiagonal
    for (std::size_t i = 2; i < n; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j) t(i, j) = 0.0;
    t.ensure_finite("schur_decompose");
    return out;
}

std::vector<std::complex<double>> schur_eigenvalues(const Mat& t) {
    require(t.is_square(), errc::dimension_mismatch, "schur_eigenvalues: matrix not square");
    std::vector<std::complex<double>> ev;
    const std::size_t n = t.rows();
    std::size_t i = 0;
    while (i < n) {
        if (i + 1 < n && t(i + 1, i) != 0.0) {
            const double a = t(i, i), b = t(i, i + 1), c = t(i + 1, i), d = t(i + 1, i + 1);
            const double mid = 0.5 * (a + d);
            const double half = 0.5 * (a - d);
            const double disc = half * half + b * c;
            if (disc < 0.0) {
                const double im = std::sqrt(-disc);
                ev.emplace_back(mid, im);
                ev.emplace_back(mid, -im);
            } else {
                const double sq = std::sqrt(disc);
                ev.emplace_back(mid + sq, 0.0);
                ev.emplace_back(mid - sq, 0.0);
            }
            i += 2;
        } else {
            ev.emplace_back(t(i, i), 0.0);
            i += 1;
        }
    }
    return ev;
}

Mat solve_sylvester(const Mat& a, const Mat& b, const Mat& c) {
    require(a.is_square() && b.is_square(), errc::dimension_mismatch, "solve_sylvester: a and b must be square");
    require(c.rows() == a.rows() && c.cols() == b.rows(), errc::dimension_mismatch,
            "solve_sylvester: rhs must be a.rows x b.rows");

    const SchurForm sa = schur_decompose(a);
    const SchurForm sb = schur_decompose(b);

    const auto ea = schur_eigenvalues(sa.t);
    const auto eb = schur_eigenvalues(sb.t);
    for (const auto& la : ea)
        for (const auto& lb : eb)
            if (std::abs(la + lb) < 1e-10)
                raise(errc::spectrum_overlap,
                      "eigenvalue " + std::to_string(la.real()) + "+" + std::to_string(la.imag()) +
                          "i of a collides with the spectrum of -b");

    const Mat f = at_b(sa.q, c) * sb.q;
    const Mat y = quasi_triangular_sylvester(sa.t, sb.t, f);
    Mat w = (sa.q * y) * transpose(sb.q);
    w.ensure_finite("solve_sylvester");
    return w;
}

Mat sylvester_oracle_kron(const Mat& a, const Mat& b, const Mat& c) {
    require(a.is_square() && b.is_square(), errc::dimension_mismatch, "sylvester_oracle_kron: a and b must be square");
    require(c.rows() == a.rows() && c.cols() == b.rows(), errc::dimension_mismatch,
            "sylvester_oracle_kron: rhs must be a.rows x b.rows");
    const std::size_t m = a.rows(), n = b.rows();
    require(m <= 64 && n <= 64, errc::dimension_too_large,
            "sylvester_oracle_kron: refusing dimension beyond 64 (O(d^6) cost)");

    const std::size_t nn = m * n;
    Mat k(nn, nn);
    // column-major vec: index (r, c) -> c*m + r
    for (std::size_t ccol = 0; ccol < n; ++ccol)
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t row = ccol * m + r;
            for (std::size_t rp = 0; rp < m; ++rp) k(row, ccol * m + rp) += a(r, rp);
            for (std::size_t cp = 0; cp < n; ++cp) k(row, cp * m + r) += b(cp, ccol);
        }
    Mat rhs(nn, 1);
    for (std::size_t ccol = 0; ccol < n; ++ccol)
        for (std::size_t r = 0; r < m; ++r) rhs(ccol * m + r, 0) = c(r, ccol);

    const Mat x = solve_linear(k, rhs);
    Mat w(m, n);
    for (std::size_t ccol = 0; ccol < n; ++ccol)
        for (std::size_t r = 0; r < m; ++r) w(r, ccol) = x(ccol * m + r, 0);
    return w;
}

} // namespace meda::linalg
