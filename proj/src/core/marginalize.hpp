#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mat.hpp"
#include "types.hpp"

namespace meda::marginalize {

/// Independent per-entry feature dropout with probability p.
struct CorruptionLaw {
    double p = 0.0;

    CorruptionLaw() = default;
    explicit CorruptionLaw(double prob) : p(prob) {
        require(prob >= 0.0 && prob < 1.0, errc::invalid_argument,
                "dropout probability must lie in [0,1), got " + std::to_string(prob));
    }
};

enum class CouplingKind { mmd, class_means };

/// Instance-level coupling: symmetric N x N with zero row sums. `factors`
/// holds sign-split vectors v_k with n = sum_k v_k v_k^T; quadratic forms are
/// evaluated through them so that identical source/target point sets cancel
/// exactly.
struct CouplingMatrix {
    Mat n;
    CouplingKind kind = CouplingKind::mmd;
    std::vector<std::vector<double>> factors;
};

/// How the expectation of a coupled corrupted scatter is formed. `exact` is
/// the true expectation under entrywise dropout; `simplified` reuses the
/// plain-covariance rule on the coupled scatter, which matches `exact` only
/// for identity couplings. The config/CLI token for `simplified` is "paper".
enum class CouplingRule { exact, simplified };

CouplingRule coupling_rule_from_string(std::string_view s);
const char* to_string(CouplingRule r);

/// S = x^T x.
Mat scatter(const Mat& x);

/// E[x^T corrupted(x)] = (1-p) s for symmetric s.
Mat expected_p(const Mat& s, CorruptionLaw law);

/// E[corrupted(x)^T corrupted(x)]: (1-p)^2 s off the diagonal, (1-p) s on it.
Mat expected_q(const Mat& s, CorruptionLaw law);

/// Centroid-discrepancy coupling over source/target tags.
CouplingMatrix mmd_coupling(std::span<const Domain> tags);

/// Per-class centroid coupling; labels use -1 for unlabeled rows. Only
/// classes labeled in both domains contribute (rows of other instances are
/// zero, which keeps every row sum at zero).
CouplingMatrix class_coupling(std::span<const Domain> tags, std::span<const int> labels);

/// E[corrupted(x)^T n corrupted(x)] under `rule`.
Mat expected_coupled_q(const Mat& x, const CouplingMatrix& coupling, CorruptionLaw law, CouplingRule rule);

/// Tr(x^T n x) through the factored form; exactly zero when the source and
/// target rows are identical point sets.
double coupling_quadratic(const Mat& x, const CouplingMatrix& coupling);

/// One corrupted copy of x: entries zeroed independently with probability p,
/// mask drawn row-major; deterministic given the seed.
Mat monte_carlo_corrupt(const Mat& x, CorruptionLaw law, std::uint64_t seed);

} // namespace meda::marginalize
