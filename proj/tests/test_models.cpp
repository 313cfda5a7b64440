#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/classify.hpp"
#include "core/data.hpp"
#include "core/models.hpp"
#include "test_support.hpp"

using namespace meda;
using namespace meda::models;
using data::Dataset;
using data::ScenarioSplit;
using marginalize::CorruptionLaw;
using marginalize::CouplingRule;
using testsup::random_mat;
using testsup::rel_err;

namespace {

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d, int classes, const char* dom,
                       double shift) {
    Dataset ds;
    ds.class_count = classes;
    ds.features = Mat(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % classes);
        for (std::size_t j = 0; j < d; ++j)
            ds.features(i, j) = 2.0 * rng.u01() - 1.0 + 0.8 * c * (j == 0) + shift * (j == 1);
        ds.labels.push_back(c);
        ds.domains.push_back(dom);
    }
    return ds;
}

ScenarioSplit make_split(std::uint64_t seed, Scenario sc, std::size_t ns = 24, std::size_t nt = 24,
                         std::size_t d = 4, int classes = 2) {
    Rng rng(seed);
    const Dataset src = random_dataset(rng, ns, d, classes, "s", 0.0);
    const Dataset tgt = random_dataset(rng, nt, d, classes, "t", 0.7);
    return data::build_scenario(src, tgt, sc, 3, seed);
}

ModelSpec spec_for(Model m, double p = 0.5) {
    ModelSpec s;
    s.model = m;
    s.p = p;
    return s;
}

// Central finite differences of the marginalized loss; the loss is quadratic
// in each block, so these are exact up to roundoff.
Gradients fd_gradients(const ModelSpec& spec, const ScenarioSplit& split, const Mat& w, const Mat* z,
                       double h = 1e-5) {
    Gradients g;
    g.w = Mat(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = 0; j < w.cols(); ++j) {
            Mat wp = w, wm = w;
            wp(i, j) += h;
            wm(i, j) -= h;
            g.w(i, j) = (expected_total_loss(spec, split, wp, z) - expected_total_loss(spec, split, wm, z)) /
                        (2.0 * h);
        }
    if (z != nullptr && uses_class_term(spec.model)) {
        g.z = Mat(z->rows(), z->cols());
        for (std::size_t i = 0; i < z->rows(); ++i)
            for (std::size_t j = 0; j < z->cols(); ++j) {
                Mat zp = *z, zm = *z;
                zp(i, j) += h;
                zm(i, j) -= h;
                g.z(i, j) =
                    (expected_total_loss(spec, split, w, &zp) - expected_total_loss(spec, split, w, &zm)) /
                    (2.0 * h);
            }
    }
    return g;
}

double grad_scale_at_zero_w(const ModelSpec& spec, const ScenarioSplit& split, const Mat* z) {
    const Mat w0(split.x_all.cols(), split.x_all.cols());
    return std::max(1e-12, analytic_gradients(spec, split, w0, z).w.frob_norm());
}

} // namespace

TEST_CASE("fit_domain_classifier: scalar case and label antisymmetry") {
    const Mat x{{1}, {-1}};
    const std::vector<Domain> tags{Domain::source, Domain::target};
    const Mat zd = fit_domain_classifier(x, tags, 1.0);
    CHECK(zd(0, 0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));

    const std::vector<Domain> flipped{Domain::target, Domain::source};
    const Mat zd2 = fit_domain_classifier(x, flipped, 1.0);
    CHECK(zd2(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("fit_domain_classifier: separates shifted domains on most training rows") {
    Rng rng(3);
    const std::size_t n = 40, d = 5;
    Mat x(2 * n, d);
    std::vector<Domain> tags;
    for (std::size_t i = 0; i < 2 * n; ++i) {
        const bool tgt = i >= n;
        for (std::size_t j = 0; j < d; ++j) x(i, j) = 2.0 * rng.u01() - 1.0 + (tgt ? 2.0 : -2.0) * (j == 0);
        tags.push_back(tgt ? Domain::target : Domain::source);
    }
    const Mat zd = fit_domain_classifier(x, tags, 1.0);
    const Mat score = x * zd;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 2 * n; ++i) {
        const double want = tags[i] == Domain::source ? -1.0 : 1.0;
        if (score(i, 0) * want > 0) ++hits;
    }
    CHECK(hits >= 72);  // >= 90%
}

TEST_CASE("fit_domain_classifier: needs both domains") {
    try {
        fit_domain_classifier(Mat{{1}, {2}}, std::vector<Domain>{Domain::source, Domain::source}, 1.0);
        FAIL("expected EmptyDomain");
    } catch (const Error& e) {
        CHECK(e.code() == errc::empty_domain);
    }
}

TEST_CASE("fit_ridge_marginalized: scalar ridge and linearity in the labels") {
    const Mat x{{1}, {-1}};
    const Mat y{{1}, {-1}};
    const Mat z = fit_ridge_marginalized(Mat::identity(1), x, y, 0.0, 1.0);
    CHECK(z(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    Rng rng(5);
    const Mat xl = random_mat(rng, 20, 3);
    const Mat yl = data::make_label_matrix(std::vector<int>{0, 1, 0, 1, 0, 1, 0, 1, 0, 1,
                                                            0, 1, 0, 1, 0, 1, 0, 1, 0, 1},
                                           2);
    const Mat w = random_mat(rng, 3, 3);
    const Mat z1 = fit_ridge_marginalized(w, xl, yl, 0.4, 0.7);
    const Mat z2 = fit_ridge_marginalized(w, xl, 2.0 * yl, 0.4, 0.7);
    CHECK(rel_err(z2, 2.0 * z1) <= 1e-12);
}

TEST_CASE("fit_ridge_marginalized: stationary point of the explicit-corruption loss") {
    Rng rng(7);
    const std::size_t n = 40, d = 3;
    const Mat x = random_mat(rng, n, d);
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(i % 2));
    const Mat y = data::make_label_matrix(labels, 2);
    const Mat w = random_mat(rng, d, d);
    const double p = 0.5, delta = 1.0;
    const Mat z = fit_ridge_marginalized(w, x, y, p, delta);

    // accumulate the corrupted normal equations over many draws
    const int samples = 100000;
    Mat a_acc(d, d);
    Mat b_acc(d, 2);
    for (int m = 0; m < samples; ++m) {
        const Mat xw = marginalize::monte_carlo_corrupt(x, CorruptionLaw(p), derive_stream(77, m)) * w;
        a_acc = a_acc + gram(xw);
        b_acc = b_acc + at_b(xw, y);
    }
    const double inv = 1.0 / samples;
    const Mat grad = 2.0 * (inv * (a_acc * z) - inv * b_acc) + (2.0 * delta) * z;
    const Mat grad0 = -2.0 * (inv * b_acc);
    CHECK(grad.frob_norm() < 1e-2 * grad0.frob_norm());
}

TEST_CASE("S1: p=0 and vanishing omega recover the identity") {
    const ScenarioSplit split = make_split(11, Scenario::us);
    ModelSpec s = spec_for(Model::s1, 0.0);
    s.omega = 1e-10;
    const FitResult res = fit_sequential_w(s, split);
    CHECK(rel_err(res.w, Mat::identity(split.x_all.cols())) <= 1e-6);
}

TEST_CASE("S1: one-dimensional closed form") {
    // single feature, rows [1],[2] in one domain, none needed on the other:
    // assemble the split by hand
    ScenarioSplit sp;
    sp.scenario = Scenario::us;
    sp.class_count = 2;
    sp.x_all = Mat{{1}, {2}};
    sp.domain_tags = {Domain::source, Domain::source};
    sp.labels_all = {0, 1};
    sp.x_labeled = sp.x_all;
    sp.labels_labeled = {0, 1};
    sp.domains_labeled = sp.domain_tags;
    sp.y_labeled = data::make_label_matrix(sp.labels_labeled, 2);
    ModelSpec s = spec_for(Model::s1, 0.5);
    s.omega = 0.01;
    const FitResult res = fit_sequential_w(s, sp);
    CHECK(res.w(0, 0) == doctest::Approx(250.0 / 251.0).epsilon(1e-12));
}

TEST_CASE("S1M: identical source and target sets reduce to S1 under the simplified rule") {
    Rng rng(13);
    const Mat half = random_mat(rng, 12, 3);
    ScenarioSplit sp;
    sp.scenario = Scenario::us;
    sp.class_count = 2;
    sp.x_all = Mat(24, 3);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            sp.x_all(i, j) = half(i, j);
            sp.x_all(i + 12, j) = half(i, j);
        }
    for (std::size_t i = 0; i < 24; ++i) {
        sp.domain_tags.push_back(i < 12 ? Domain::source : Domain::target);
        sp.labels_all.push_back(i < 12 ? static_cast<int>(i % 2) : data::kUnlabeled);
    }
    sp.x_labeled = half;
    for (std::size_t i = 0; i < 12; ++i) {
        sp.labels_labeled.push_back(static_cast<int>(i % 2));
        sp.domains_labeled.push_back(Domain::source);
    }
    sp.y_labeled = data::make_label_matrix(sp.labels_labeled, 2);

    ModelSpec m = spec_for(Model::s1m);
    m.coupling_rule = CouplingRule::simplified;
    const Mat w_m = fit_sequential_w(m, sp).w;
    const Mat w_1 = fit_sequential_w(spec_for(Model::s1), sp).w;
    CHECK(rel_err(w_m, w_1) <= 1e-12);

    // under the exact expectation the corruption variance keeps a positive
    // diagonal even for identical sets
    const auto coup = marginalize::mmd_coupling(sp.domain_tags);
    const Mat m_exact = marginalize::expected_coupled_q(sp.x_all, coup, CorruptionLaw(0.5),
                                                        CouplingRule::exact);
    for (std::size_t j = 0; j < 3; ++j) CHECK(m_exact(j, j) > 0.0);
}

TEST_CASE("sequential solutions zero their own gradients") {
    for (Model m : {Model::s1, Model::s1m, Model::s1c, Model::s1d}) {
        CAPTURE(to_string(m));
        const Scenario sc = (m == Model::s1c) ? Scenario::ss : Scenario::us;
        const ScenarioSplit split = make_split(17, sc);
        const ModelSpec s = spec_for(m);
        const FitResult res = fit_sequential_w(s, split);
        const double scale = grad_scale_at_zero_w(s, split, nullptr);
        CHECK(analytic_gradients(s, split, res.w, nullptr).w.frob_norm() <= 1e-7 * scale);
    }
}

TEST_CASE("S1C refuses to run without shared labeled classes") {
    const ScenarioSplit split = make_split(19, Scenario::us);
    try {
        fit_sequential_w(spec_for(Model::s1c), split);
        FAIL("expected NoSharedClasses");
    } catch (const Error& e) {
        CHECK(e.code() == errc::no_shared_classes);
    }
}

TEST_CASE("analytic gradients match finite differences for all eight models") {
    Rng rng(23);
    for (Model m : {Model::s1, Model::s1m, Model::s1c, Model::s1d, Model::j12, Model::j12m,
                    Model::j12c, Model::j12d}) {
        CAPTURE(to_string(m));
        const ScenarioSplit split = make_split(29 + static_cast<int>(m), Scenario::ss);
        ModelSpec s = spec_for(m, 0.4);
        s.lambda = 0.8;
        s.gamma = 1.3;
        const std::size_t d = split.x_all.cols();
        const Mat w = random_mat(rng, d, d);
        const Mat z = random_mat(rng, d, static_cast<std::size_t>(split.class_count));
        const Mat* zp = uses_class_term(m) ? &z : nullptr;
        const Gradients got = analytic_gradients(s, split, w, zp);
        const Gradients want = fd_gradients(s, split, w, zp);
        CHECK((got.w - want.w).frob_norm() <= 1e-5 * std::max(1.0, got.w.frob_norm()));
        if (zp) CHECK((got.z - want.z).frob_norm() <= 1e-5 * std::max(1.0, got.z.frob_norm()));
    }
}

TEST_CASE("every joint w step zeroes the loss gradient in w") {
    Rng rng(31);
    for (Model m : {Model::j12, Model::j12m, Model::j12c, Model::j12d}) {
        CAPTURE(to_string(m));
        const ScenarioSplit split = make_split(37 + static_cast<int>(m), Scenario::ss);
        const ModelSpec s = spec_for(m);
        const std::size_t d = split.x_all.cols();
        const Mat z = random_mat(rng, d, static_cast<std::size_t>(split.class_count));
        const Mat w = joint_w_step(s, split, z);
        const double scale = grad_scale_at_zero_w(s, split, &z);
        CHECK(analytic_gradients(s, split, w, &z).w.frob_norm() <= 1e-7 * scale);
    }
}

TEST_CASE("joint fit: first trace entry is the fixed-identity ridge loss") {
    const ScenarioSplit split = make_split(41, Scenario::sup);
    const ModelSpec s = spec_for(Model::j12);
    const FitResult res = fit_joint(s, split);
    const Mat z0 = fit_ridge_marginalized(Mat::identity(split.x_all.cols()), split.x_labeled,
                                          split.y_labeled, s.p, s.delta);
    const double want = expected_total_loss(s, split, Mat::identity(split.x_all.cols()), &z0);
    CHECK(res.loss_trace.front() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("joint fit in the all-labeled regime matches the direct w update") {
    const ScenarioSplit split = make_split(43, Scenario::sup);
    ModelSpec s = spec_for(Model::j12);
    s.omega = 0.0;
    const Mat z0 = fit_ridge_marginalized(Mat::identity(split.x_all.cols()), split.x_labeled,
                                          split.y_labeled, s.p, s.delta);
    const Mat w_sylv = joint_w_step(s, split, z0);
    const Mat w_direct = joint_w_closed_form_all_labeled(s, split, z0);
    CHECK(rel_err(w_sylv, w_direct) <= 1e-8);
}

TEST_CASE("lambda = 0 degenerates the joint w step to the sequential solution") {
    const ScenarioSplit split = make_split(47, Scenario::ss);
    Rng rng(47);
    const Mat z = random_mat(rng, split.x_all.cols(), static_cast<std::size_t>(split.class_count));
    for (auto [jm, sm] : {std::pair{Model::j12, Model::s1}, std::pair{Model::j12m, Model::s1m},
                          std::pair{Model::j12c, Model::s1c}, std::pair{Model::j12d, Model::s1d}}) {
        CAPTURE(to_string(jm));
        ModelSpec j = spec_for(jm);
        j.lambda = 0.0;
        ModelSpec q = spec_for(sm);
        if (jm == Model::j12) j.omega = q.omega;  // same penalty on both sides
        const Mat w_joint = joint_w_step(j, split, z);
        const Mat w_seq = fit_sequential_w(q, split).w;
        CHECK(rel_err(w_joint, w_seq) <= 1e-8);
    }
}

TEST_CASE("joint fits: monotone traces and convergence on random problems") {
    for (int trial = 0; trial < 20; ++trial) {
        const Model m = std::array{Model::j12, Model::j12m, Model::j12c, Model::j12d}[trial % 4];
        CAPTURE(trial);
        CAPTURE(to_string(m));
        const ScenarioSplit split = make_split(100 + trial, Scenario::ss, 20 + trial % 3, 22, 4, 2);
        const FitResult res = fit_joint(spec_for(m), split);
        CHECK(res.converged);
        CHECK(res.iterations <= 50);
        for (std::size_t i = 1; i < res.loss_trace.size(); ++i)
            CHECK(res.loss_trace[i] <= res.loss_trace[i - 1] + 1e-8);
    }
}

TEST_CASE("expected_total_loss: perfect reconstruction at the identity") {
    const ScenarioSplit split = make_split(53, Scenario::us);
    ModelSpec s = spec_for(Model::s1, 0.0);
    s.omega = 0.0;
    s.lambda = 0.0;
    s.gamma = 0.0;
    const double loss = expected_total_loss(s, split, Mat::identity(split.x_all.cols()), nullptr);
    CHECK(std::fabs(loss) <= 1e-9 * std::max(1.0, split.x_all.frob_norm() * split.x_all.frob_norm()));
}

TEST_CASE("expected_total_loss: additive in its weighted terms") {
    const ScenarioSplit split = make_split(59, Scenario::ss);
    Rng rng(59);
    const std::size_t d = split.x_all.cols();
    const Mat w = random_mat(rng, d, d);
    const Mat z = random_mat(rng, d, static_cast<std::size_t>(split.class_count));
    for (Model m : {Model::j12m, Model::j12c, Model::j12d}) {
        CAPTURE(to_string(m));
        ModelSpec s = spec_for(m);
        s.lambda = 0.9;
        s.gamma = 1.7;
        ModelSpec only_l1 = s;
        only_l1.lambda = 0.0;
        only_l1.gamma = 0.0;
        ModelSpec with_l2 = s;
        with_l2.gamma = 0.0;
        ModelSpec with_l3 = s;
        with_l3.lambda = 0.0;
        const double l1 = expected_total_loss(only_l1, split, w, &z);
        const double l2 = (expected_total_loss(with_l2, split, w, &z) - l1) / s.lambda;
        const double l3 = (expected_total_loss(with_l3, split, w, &z) - l1) / s.gamma;
        const double total = expected_total_loss(s, split, w, &z);
        CHECK(total == doctest::Approx(l1 + s.lambda * l2 + s.gamma * l3).epsilon(1e-10));
    }
}

TEST_CASE("expected_total_loss: matches the explicit-corruption sample mean") {
    Rng rng(61);
    const ScenarioSplit split = make_split(61, Scenario::ss, 10, 12, 3, 2);
    ModelSpec s = spec_for(Model::j12d, 0.5);
    const std::size_t d = split.x_all.cols();
    const Mat w = random_mat(rng, d, d);
    const Mat z = random_mat(rng, d, static_cast<std::size_t>(split.class_count));

    const Mat zd = fit_domain_classifier(split.x_all, split.domain_tags, s.alpha);
    const CorruptionLaw law(s.p);
    const int samples = 30000;
    double acc = 0.0;
    for (int m = 0; m < samples; ++m) {
        const Mat xt = marginalize::monte_carlo_corrupt(split.x_all, law, derive_stream(9001, m));
        const Mat xlt = marginalize::monte_carlo_corrupt(split.x_labeled, law, derive_stream(9002, m));
        double term = (split.x_all - xt * w).frob_norm();
        double l1 = term * term;  // omega = 0 for the D models
        term = (split.y_labeled - xlt * w * z).frob_norm();
        const double l2 = term * term + s.delta * dot(z, z);
        Mat resid = xt * (w * zd);
        double ld = 0.0;
        for (std::size_t i = 0; i < resid.rows(); ++i) {
            const double r = 1.0 - resid(i, 0);
            ld += r * r;
        }
        acc += l1 + s.lambda * l2 + s.gamma * ld;
    }
    const double mc = acc / samples;
    const double analytic = expected_total_loss(s, split, w, &z);
    CHECK(std::fabs(mc - analytic) <= 0.01 * std::fabs(analytic));
}

TEST_CASE("monotone regularization: larger gamma never raises the achieved coupling value") {
    const ScenarioSplit split = make_split(67, Scenario::us);
    const auto coup = marginalize::mmd_coupling(split.domain_tags);
    const Mat m_mat = marginalize::expected_coupled_q(split.x_all, coup, CorruptionLaw(0.5),
                                                      CouplingRule::exact);
    double prev = 1e300;
    for (double gamma : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        ModelSpec s = spec_for(Model::s1m);
        s.gamma = gamma;
        const Mat w = fit_sequential_w(s, split).w;
        const double val = dot(w, m_mat * w);
        CHECK(val <= prev + 1e-9);
        prev = val;
    }
}

TEST_CASE("BL coincides with S1 + ridge at p = 0 and omega = 0") {
    const ScenarioSplit split = make_split(71, Scenario::sup);
    ModelSpec bl = spec_for(Model::bl, 0.0);
    const FitResult res_bl = fit(bl, split);

    ModelSpec s1 = spec_for(Model::s1, 0.0);
    s1.omega = 0.0;
    const FitResult res_s1 = fit(s1, split);
    CHECK(rel_err(res_s1.w, Mat::identity(split.x_all.cols())) <= 1e-9);
    const Mat z_s1 = fit_ridge_marginalized(res_s1.w, split.x_labeled, split.y_labeled, 0.0, s1.delta);
    CHECK(rel_err(z_s1, *res_bl.z_l) <= 1e-9);
}

TEST_CASE("gradient sanity: p = 0 with identity w has no reconstruction pull") {
    const ScenarioSplit split = make_split(73, Scenario::us);
    ModelSpec s = spec_for(Model::s1, 0.0);
    s.omega = 0.0;
    s.lambda = 0.0;
    s.gamma = 0.0;
    const Mat g = analytic_gradients(s, split, Mat::identity(split.x_all.cols()), nullptr).w;
    CHECK(g.frob_norm() <= 1e-9 * grad_scale_at_zero_w(s, split, nullptr));
}

TEST_CASE("model spec validation rejects out-of-range settings") {
    const ScenarioSplit split = make_split(81, Scenario::us);
    ModelSpec bad = spec_for(Model::s1);
    bad.p = 1.0;
    CHECK_THROWS_AS(fit(bad, split), Error);
    bad = spec_for(Model::j12);
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(fit(bad, split), Error);
    bad = spec_for(Model::s1);
    bad.omega = -1.0;
    CHECK_THROWS_AS(fit(bad, split), Error);
}

TEST_CASE("domain classifier surfaces singularity at alpha = 0 on rank-deficient data") {
    // duplicated feature column makes x^T x singular
    Mat x(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        x(i, 0) = 1.0 + i;
        x(i, 1) = 2.0 * (1.0 + i);
    }
    const std::vector<Domain> tags{Domain::source, Domain::source, Domain::target, Domain::target};
    try {
        fit_domain_classifier(x, tags, 0.0);
        FAIL("expected SingularMatrix");
    } catch (const Error& e) {
        CHECK(e.code() == errc::singular_matrix);
    }
    CHECK_NOTHROW(fit_domain_classifier(x, tags, 1.0));
}
