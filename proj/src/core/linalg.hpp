#pragma once

#include <complex>
#include <vector>

#include "mat.hpp"

namespace meda::linalg {

/// Real Schur decomposition a = q t q^T with q orthogonal and t
/// quasi-upper-triangular (diagonal blocks of size 1 or 2; 2x2 blocks carry
/// complex-conjugate eigenvalue pairs).
struct SchurForm {
    Mat q;
    Mat t;
};

/// Solves a x = b for square `a` by LU with partial pivoting (never forms an
/// inverse). Raises SingularMatrix when a pivot falls below
/// 1e-12 * ||a||_inf, DimensionMismatch on shape errors.
Mat solve_linear(const Mat& a, const Mat& b);

/// Hessenberg reduction followed by implicit double-shift QR. Budget of
/// 30 * dimension QR sweeps; raises ConvergenceFailure beyond it.
SchurForm schur_decompose(const Mat& a);

/// Eigenvalues read off the quasi-triangular factor's diagonal blocks.
std::vector<std::complex<double>> schur_eigenvalues(const Mat& t);

/// Solves a w + w b = c (all d x d) by Bartels-Stewart: Schur forms of a and
/// b, then block back-substitution with direct solves on the up-to-4x4
/// systems induced by 2x2 diagonal blocks. Raises SpectrumOverlap when an
/// eigenvalue of a and one of -b coincide within 1e-10.
Mat solve_sylvester(const Mat& a, const Mat& b, const Mat& c);

/// Test oracle: solves the Kronecker-vectorized system
/// (I (x) a + b^T (x) I) vec(w) = vec(c) densely. O(d^6); refuses d > 64.
Mat sylvester_oracle_kron(const Mat& a, const Mat& b, const Mat& c);

} // namespace meda::linalg
