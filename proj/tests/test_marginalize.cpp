#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/linalg.hpp"
#include "core/marginalize.hpp"
#include "core/rng.hpp"
#include "test_support.hpp"

using namespace meda;
using namespace meda::marginalize;
using testsup::random_mat;
using testsup::rel_err;

namespace {

// Sample mean of x^T corrupted(x) over `samples` draws.
Mat mc_mean_cross(const Mat& x, double p, std::uint64_t seed, int samples) {
    Mat sum(x.rows(), x.cols());
    for (int m = 0; m < samples; ++m) {
        const Mat xt = monte_carlo_corrupt(x, CorruptionLaw(p), derive_stream(seed, m));
        sum = sum + xt;
    }
    return (1.0 / samples) * at_b(x, sum);
}

// Sample mean of corrupted(x)^T corrupted(x).
Mat mc_mean_gram(const Mat& x, double p, std::uint64_t seed, int samples) {
    Mat sum(x.cols(), x.cols());
    for (int m = 0; m < samples; ++m) {
        const Mat xt = monte_carlo_corrupt(x, CorruptionLaw(p), derive_stream(seed, m));
        sum = sum + gram(xt);
    }
    return (1.0 / samples) * sum;
}

// Sample mean of corrupted(x)^T n corrupted(x), dense coupling product.
Mat mc_mean_coupled(const Mat& x, const Mat& n, double p, std::uint64_t seed, int samples) {
    Mat sum(x.cols(), x.cols());
    for (int m = 0; m < samples; ++m) {
        const Mat xt = monte_carlo_corrupt(x, CorruptionLaw(p), derive_stream(seed, m));
        sum = sum + at_b(xt, n * xt);
    }
    return (1.0 / samples) * sum;
}

std::vector<Domain> half_half(std::size_t ns, std::size_t nt) {
    std::vector<Domain> tags(ns, Domain::source);
    tags.insert(tags.end(), nt, Domain::target);
    return tags;
}

} // namespace

TEST_CASE("scatter: worked examples and PSD") {
    CHECK(scatter(Mat{{1}, {2}})(0, 0) == doctest::Approx(5.0));
    CHECK(rel_err(scatter(Mat::identity(2)), Mat::identity(2)) == 0.0);

    Rng rng(3);
    const Mat x = random_mat(rng, 50, 5);
    const Mat s = scatter(x);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(s(i, j) == s(j, i));
    const auto ev = linalg::schur_eigenvalues(linalg::schur_decompose(s).t);
    for (const auto& l : ev) CHECK(l.real() >= -1e-10);
}

TEST_CASE("expected_p: scaling rule") {
    const Mat s{{2, 1}, {1, 3}};
    CHECK(rel_err(expected_p(s, CorruptionLaw(0.0)), s) == 0.0);
    const Mat p = expected_p(s, CorruptionLaw(0.5));
    CHECK(rel_err(p, Mat{{1, 0.5}, {0.5, 1.5}}) <= 1e-15);
}

TEST_CASE("expected_q: off-diagonal squared keep rate, diagonal linear") {
    const Mat s{{2, 1}, {1, 3}};
    const Mat q = expected_q(s, CorruptionLaw(0.5));
    CHECK(rel_err(q, Mat{{1, 0.25}, {0.25, 1.5}}) <= 1e-15);
    CHECK(rel_err(expected_q(s, CorruptionLaw(0.0)), s) == 0.0);
}

TEST_CASE("expected_q: PSD whenever the input is a Gram matrix") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat x = random_mat(rng, 12, 6);
        const Mat q = expected_q(gram(x), CorruptionLaw(0.3 + 0.6 * rng.u01()));
        const auto ev = linalg::schur_eigenvalues(linalg::schur_decompose(q).t);
        for (const auto& l : ev) CHECK(l.real() >= -1e-10 * std::max(1.0, q.max_abs()));
    }
}

TEST_CASE("monte-carlo means converge to expected_p and expected_q") {
    Rng rng(29);
    const Mat x = random_mat(rng, 40, 5);
    const Mat s = scatter(x);
    for (double p : {0.3, 0.9}) {
        const Mat pm = mc_mean_cross(x, p, 1234, 20000);
        CHECK(rel_err(pm, expected_p(s, CorruptionLaw(p))) < 0.02);
        const Mat qm = mc_mean_gram(x, p, 999, 20000);
        CHECK(rel_err(qm, expected_q(s, CorruptionLaw(p))) < 0.02);
    }
}

TEST_CASE("monte-carlo error shrinks with sample count") {
    Rng rng(31);
    const Mat x = random_mat(rng, 30, 4);
    const Mat want = expected_q(scatter(x), CorruptionLaw(0.5));
    const double e2 = rel_err(mc_mean_gram(x, 0.5, 7, 100), want);
    const double e3 = rel_err(mc_mean_gram(x, 0.5, 7, 1000), want);
    const double e4 = rel_err(mc_mean_gram(x, 0.5, 7, 10000), want);
    CHECK(e2 < 0.5);
    CHECK(e3 < 0.2);
    CHECK(e4 < 0.05);
    CHECK(e4 < e2);
}

TEST_CASE("mmd_coupling: smallest case and block values") {
    const auto c = mmd_coupling(std::vector<Domain>{Domain::source, Domain::target});
    CHECK(rel_err(c.n, Mat{{1, -1}, {-1, 1}}) <= 1e-15);

    const auto tags = half_half(3, 2);
    const auto c2 = mmd_coupling(tags);
    CHECK(c2.n(0, 1) == doctest::Approx(1.0 / 9.0));
    CHECK(c2.n(3, 4) == doctest::Approx(1.0 / 4.0));
    CHECK(c2.n(0, 4) == doctest::Approx(-1.0 / 6.0));
    // symmetry and zero row sums
    for (std::size_t i = 0; i < 5; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            rs += c2.n(i, j);
            CHECK(c2.n(i, j) == c2.n(j, i));
        }
        CHECK(std::fabs(rs) <= 1e-12);
    }
}

TEST_CASE("mmd_coupling: identical point sets give exactly zero loss") {
    Rng rng(41);
    const Mat half = random_mat(rng, 6, 4);
    Mat x(12, 4);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            x(i, j) = half(i, j);
            x(i + 6, j) = half(i, j);
        }
    const auto c = mmd_coupling(half_half(6, 6));
    CHECK(coupling_quadratic(x, c) == 0.0);
}

TEST_CASE("mmd_coupling: quadratic equals squared centroid distance") {
    Rng rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t ns = 3 + rng.below(8), nt = 3 + rng.below(8), d = 4;
        const Mat x = random_mat(rng, ns + nt, d);
        const auto c = mmd_coupling(half_half(ns, nt));

        std::vector<double> mu_s(d, 0.0), mu_t(d, 0.0);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t a = 0; a < d; ++a) mu_s[a] += x(i, a) / ns;
        for (std::size_t i = ns; i < ns + nt; ++i)
            for (std::size_t a = 0; a < d; ++a) mu_t[a] += x(i, a) / nt;
        double want = 0.0;
        for (std::size_t a = 0; a < d; ++a) want += (mu_s[a] - mu_t[a]) * (mu_s[a] - mu_t[a]);

        CHECK(coupling_quadratic(x, c) == doctest::Approx(want).epsilon(1e-10));
        // dense route agrees with the factored one
        CHECK(trace(at_b(x, c.n * x)) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("mmd_coupling: needs both domains") {
    try {
        mmd_coupling(std::vector<Domain>{Domain::source, Domain::source});
        FAIL("expected EmptyDomain");
    } catch (const Error& e) {
        CHECK(e.code() == errc::empty_domain);
    }
}

TEST_CASE("class_coupling: single shared class pair") {
    const std::vector<Domain> tags{Domain::source, Domain::target};
    const std::vector<int> labels{2, 2};
    const auto c = class_coupling(tags, labels);
    CHECK(rel_err(c.n, Mat{{1, -1}, {-1, 1}}) <= 1e-15);
}

TEST_CASE("class_coupling: different-class and unlabeled rows are zero") {
    // classes 0 and 1 shared; class 2 only in source; one unlabeled row
    const std::vector<Domain> tags{Domain::source, Domain::source, Domain::source, Domain::target,
                                   Domain::target,  Domain::target};
    const std::vector<int> labels{0, 1, 2, 0, 1, -1};
    const auto c = class_coupling(tags, labels);
    // cross-class entries zero
    CHECK(c.n(0, 1) == 0.0);
    CHECK(c.n(0, 4) == 0.0);
    // class 2 is not shared: its row is all zero
    for (std::size_t j = 0; j < 6; ++j) CHECK(c.n(2, j) == 0.0);
    // unlabeled row zero
    for (std::size_t j = 0; j < 6; ++j) CHECK(c.n(5, j) == 0.0);
    // shared pairs carry the centroid weights
    CHECK(c.n(0, 3) == doctest::Approx(-1.0));
    CHECK(c.n(1, 4) == doctest::Approx(-1.0));
    // zero row sums
    for (std::size_t i = 0; i < 6; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < 6; ++j) rs += c.n(i, j);
        CHECK(std::fabs(rs) <= 1e-12);
    }
}

TEST_CASE("class_coupling: no shared class raises") {
    const std::vector<Domain> tags{Domain::source, Domain::target};
    const std::vector<int> labels{0, 1};
    try {
        class_coupling(tags, labels);
        FAIL("expected NoSharedClasses");
    } catch (const Error& e) {
        CHECK(e.code() == errc::no_shared_classes);
    }
}

TEST_CASE("class_coupling: quadratic equals summed per-class centroid distances") {
    Rng rng(47);
    const std::size_t per = 5, d = 3;
    // two classes in both domains
    std::vector<Domain> tags;
    std::vector<int> labels;
    for (int dom = 0; dom < 2; ++dom)
        for (int cls = 0; cls < 2; ++cls)
            for (std::size_t k = 0; k < per; ++k) {
                tags.push_back(dom == 0 ? Domain::source : Domain::target);
                labels.push_back(cls);
            }
    const Mat x = random_mat(rng, tags.size(), d);
    const auto c = class_coupling(tags, labels);

    double want = 0.0;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<double> mu_s(d, 0.0), mu_t(d, 0.0);
        for (std::size_t i = 0; i < tags.size(); ++i) {
            if (labels[i] != cls) continue;
            for (std::size_t a = 0; a < d; ++a)
                (tags[i] == Domain::source ? mu_s[a] : mu_t[a]) += x(i, a) / per;
        }
        for (std::size_t a = 0; a < d; ++a) want += (mu_s[a] - mu_t[a]) * (mu_s[a] - mu_t[a]);
    }
    CHECK(coupling_quadratic(x, c) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("couplings: zero row sums imply translation invariance of the quadratic") {
    Rng rng(53);
    const auto tags = half_half(7, 5);
    const auto c = mmd_coupling(tags);
    const Mat x = random_mat(rng, 12, 4);
    Mat shifted = x;
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t a = 0; a < 4; ++a) shifted(i, a) += 3.7;
    CHECK(coupling_quadratic(shifted, c) == doctest::Approx(coupling_quadratic(x, c)).epsilon(1e-9));
}

TEST_CASE("expected_coupled_q: identity coupling reduces to expected_q") {
    Rng rng(59);
    const Mat x = random_mat(rng, 15, 4);
    CouplingMatrix ident;
    ident.n = Mat::identity(15);
    const Mat via_coupled = expected_coupled_q(x, ident, CorruptionLaw(0.5), CouplingRule::exact);
    const Mat direct = expected_q(scatter(x), CorruptionLaw(0.5));
    CHECK((via_coupled - direct).max_abs() <= 1e-14 * std::max(1.0, direct.max_abs()));
}

TEST_CASE("expected_coupled_q: p = 0 collapses both rules to the coupled scatter") {
    Rng rng(61);
    const Mat x = random_mat(rng, 10, 3);
    const auto c = mmd_coupling(half_half(5, 5));
    const Mat exact = expected_coupled_q(x, c, CorruptionLaw(0.0), CouplingRule::exact);
    const Mat simpl = expected_coupled_q(x, c, CorruptionLaw(0.0), CouplingRule::simplified);
    CHECK(rel_err(exact, simpl) == 0.0);
    CHECK(rel_err(exact, at_b(x, c.n * x)) <= 1e-12);
}

TEST_CASE("expected_coupled_q: monte-carlo adjudicates exact vs simplified") {
    Rng rng(67);
    const Mat x = random_mat(rng, 20, 4);
    const auto c = mmd_coupling(half_half(10, 10));
    const double p = 0.5;
    const Mat mc = mc_mean_coupled(x, c.n, p, 4242, 30000);
    const Mat exact = expected_coupled_q(x, c, CorruptionLaw(p), CouplingRule::exact);
    const Mat simpl = expected_coupled_q(x, c, CorruptionLaw(p), CouplingRule::simplified);
    const double err_exact = (mc - exact).frob_norm() / exact.frob_norm();
    const double err_simpl = (mc - simpl).frob_norm() / exact.frob_norm();
    CHECK(err_exact < 0.03);
    CHECK(err_simpl > 10.0 * err_exact);
}

TEST_CASE("monte_carlo_corrupt: determinism and mask statistics") {
    Rng rng(71);
    Mat x(1000, 10);
    for (double& v : x.mutable_data()) v = 0.5 + rng.u01();

    CHECK(monte_carlo_corrupt(x, CorruptionLaw(0.0), 5) == x);
    CHECK(monte_carlo_corrupt(x, CorruptionLaw(0.5), 5) == monte_carlo_corrupt(x, CorruptionLaw(0.5), 5));

    const double p = 0.3;
    std::size_t zeros = 0;
    const Mat xt = monte_carlo_corrupt(x, CorruptionLaw(p), 99);
    for (double v : xt.data())
        if (v == 0.0) ++zeros;
    const double n = static_cast<double>(x.size());
    const double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(zeros / n - p) <= 3.0 * sigma);
}

TEST_CASE("corruption law validates its probability") {
    CHECK_THROWS_AS(CorruptionLaw(1.0), Error);
    CHECK_THROWS_AS(CorruptionLaw(-0.1), Error);
}
