#include "marginalize.hpp"

#include <cmath>
#include <map>
#include <string>

#include "rng.hpp"

namespace meda::marginalize {

namespace {

void check_symmetric(const Mat& s, const char* what) {
    require(s.is_square(), errc::invalid_argument, std::string(what) + ": matrix not square");
    const double tol = 1e-12 * std::max(1.0, s.max_abs());
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = i + 1; j < s.cols(); ++j)
            require(std::fabs(s(i, j) - s(j, i)) <= tol, errc::invalid_argument,
                    std::string(what) + ": matrix not symmetric");
}

// Builds the dense coupling from sign-split factor vectors.
Mat dense_from_factors(const std::vector<std::vector<double>>& factors, std::size_t n) {
    Mat m(n, n);
    for (const auto& v : factors)
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) m(i, j) += v[i] * v[j];
        }
    return m;
}

// x^T v with positive and negative parts of v accumulated separately, so two
// identical instance sets cancel bitwise.
std::vector<double> signed_projection(const Mat& x, const std::vector<double>& v) {
    const std::size_t d = x.cols();
    std::vector<double> pos(d, 0.0), neg(d, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        auto xi = x.row(i);
        if (vi > 0.0)
            for (std::size_t a = 0; a < d; ++a) pos[a] += vi * xi[a];
        else
            for (std::size_t a = 0; a < d; ++a) neg[a] += (-vi) * xi[a];
    }
    for (std::size_t a = 0; a < d; ++a) pos[a] -= neg[a];
    return pos;
}

// x^T n x via the factors: sum_k (x^T v_k)(x^T v_k)^T.
Mat coupled_scatter(const Mat& x, const CouplingMatrix& coupling) {
    const std::size_t d = x.cols();
    Mat s(d, d);
    if (!coupling.factors.empty()) {
        for (const auto& v : coupling.factors) {
            const auto proj = signed_projection(x, v);
            for (std::size_t a = 0; a < d; ++a) {
                if (proj[a] == 0.0) continue;
                for (std::size_t b = 0; b < d; ++b) s(a, b) += proj[a] * proj[b];
            }
        }
        return s;
    }
    return at_b(x, coupling.n * x);
}

} // namespace

CouplingRule coupling_rule_from_string(std::string_view s) {
    if (s == "exact") return CouplingRule::exact;
    if (s == "paper" || s == "simplified") return CouplingRule::simplified;
    raise(errc::invalid_argument, "unknown coupling rule '" + std::string(s) + "' (expected exact|paper)");
}

const char* to_string(CouplingRule r) {
    return r == CouplingRule::exact ? "exact" : "paper";
}

Mat scatter(const Mat& x) { return gram(x); }

Mat expected_p(const Mat& s, CorruptionLaw law) {
    check_symmetric(s, "expected_p");
    return (1.0 - law.p) * s;
}

Mat expected_q(const Mat& s, CorruptionLaw law) {
    check_symmetric(s, "expected_q");
    const double keep = 1.0 - law.p;
    Mat q = (keep * keep) * s;
    for (std::size_t i = 0; i < s.rows(); ++i) q(i, i) = keep * s(i, i);
    return q;
}

CouplingMatrix mmd_coupling(std::span<const Domain> tags) {
    const std::size_t n = tags.size();
    std::size_t ns = 0;
    for (Domain d : tags)
        if (d == Domain::source) ++ns;
    const std::size_t nt = n - ns;
    require(ns > 0 && nt > 0, errc::empty_domain,
            "mmd coupling needs at least one source and one target instance");

    std::vector<double> v(n);
    const double ws = 1.0 / static_cast<double>(ns);
    const double wt = -1.0 / static_cast<double>(nt);
    for (std::size_t i = 0; i < n; ++i) v[i] = (tags[i] == Domain::source) ? ws : wt;

    CouplingMatrix c;
    c.kind = CouplingKind::mmd;
    c.factors.push_back(std::move(v));
    c.n = dense_from_factors(c.factors, n);
    return c;
}

CouplingMatrix class_coupling(std::span<const Domain> tags, std::span<const int> labels) {
    require(tags.size() == labels.size(), errc::dimension_mismatch,
            "class coupling: tag and label counts differ");
    const std::size_t n = tags.size();

    std::map<int, std::pair<std::size_t, std::size_t>> counts;  // class -> (n_s, n_t)
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0) continue;
        auto& [cs, ct] = counts[labels[i]];
        (tags[i] == Domain::source ? cs : ct) += 1;
    }

    CouplingMatrix c;
    c.kind = CouplingKind::class_means;
    for (const auto& [cls, cnt] : counts) {
        const auto [cs, ct] = cnt;
        if (cs == 0 || ct == 0) continue;  // class must be labeled in both domains
        std::vector<double> v(n, 0.0);
        const double ws = 1.0 / static_cast<double>(cs);
        const double wt = -1.0 / static_cast<double>(ct);
        for (std::size_t i = 0; i < n; ++i)
            if (labels[i] == cls) v[i] = (tags[i] == Domain::source) ? ws : wt;
        c.factors.push_back(std::move(v));
    }
    require(!c.factors.empty(), errc::no_shared_classes,
            "class coupling: no class is labeled in both domains");
    c.n = dense_from_factors(c.factors, n);
    return c;
}

Mat expected_coupled_q(const Mat& x, const CouplingMatrix& coupling, CorruptionLaw law, CouplingRule rule) {
    require(coupling.n.rows() == x.rows(), errc::dimension_mismatch,
            "coupling dimension " + std::to_string(coupling.n.rows()) + " does not match instance count " +
                std::to_string(x.rows()));
    const Mat sm = coupled_scatter(x, coupling);
    if (rule == CouplingRule::simplified) return expected_q(sm, law);

    const double keep = 1.0 - law.p;
    Mat m = (keep * keep) * sm;
    // diagonal correction: p(1-p) * diag(x^T diag(n) x)
    const std::size_t d = x.cols();
    for (std::size_t a = 0; a < d; ++a) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) acc += coupling.n(i, i) * x(i, a) * x(i, a);
        m(a, a) += law.p * keep * acc;
    }
    return m;
}

double coupling_quadratic(const Mat& x, const CouplingMatrix& coupling) {
    require(coupling.n.rows() == x.rows(), errc::dimension_mismatch,
            "coupling dimension does not match instance count");
    double total = 0.0;
    if (!coupling.factors.empty()) {
        for (const auto& v : coupling.factors) {
            const auto proj = signed_projection(x, v);
            for (double e : proj) total += e * e;
        }
        return total;
    }
    return trace(coupled_scatter(x, coupling));
}

Mat monte_carlo_corrupt(const Mat& x, CorruptionLaw law, std::uint64_t seed) {
    Mat out = x;
    if (law.p == 0.0) return out;
    Rng rng(seed);
    for (double& v : out.mutable_data())
        if (rng.u01() < law.p) v = 0.0;
    return out;
}

} // namespace meda::marginalize
