#include "models.hpp"

#include <cmath>
#include <string>

#include "linalg.hpp"

namespace meda::models {

using data::ScenarioSplit;
using marginalize::CorruptionLaw;
using marginalize::CouplingRule;

Model model_from_string(std::string_view s) {
    if (s == "BL" || s == "bl") return Model::bl;
    if (s == "S1" || s == "s1") return Model::s1;
    if (s == "S1M" || s == "s1m") return Model::s1m;
    if (s == "S1C" || s == "s1c") return Model::s1c;
    if (s == "S1D" || s == "s1d") return Model::s1d;
    if (s == "J12" || s == "j12") return Model::j12;
    if (s == "J12M" || s == "j12m") return Model::j12m;
    if (s == "J12C" || s == "j12c") return Model::j12c;
    if (s == "J12D" || s == "j12d") return Model::j12d;
    raise(errc::invalid_argument, "unknown model '" + std::string(s) + "'");
}

const char* to_string(Model m) {
    switch (m) {
        case Model::bl:   return "BL";
        case Model::s1:   return "S1";
        case Model::s1m:  return "S1M";
        case Model::s1c:  return "S1C";
        case Model::s1d:  return "S1D";
        case Model::j12:  return "J12";
        case Model::j12m: return "J12M";
        case Model::j12c: return "J12C";
        case Model::j12d: return "J12D";
    }
    return "?";
}

bool is_sequential(Model m) {
    return m == Model::s1 || m == Model::s1m || m == Model::s1c || m == Model::s1d;
}

bool is_joint(Model m) {
    return m == Model::j12 || m == Model::j12m || m == Model::j12c || m == Model::j12d;
}

DomainTerm domain_term(Model m) {
    switch (m) {
        case Model::s1m:
        case Model::j12m: return DomainTerm::mmd;
        case Model::s1c:
        case Model::j12c: return DomainTerm::class_means;
        case Model::s1d:
        case Model::j12d: return DomainTerm::domain_classifier;
        default:          return DomainTerm::none;
    }
}

bool uses_class_term(Model m) { return m == Model::bl || is_joint(m); }

void ModelSpec::validate() const {
    require(p >= 0.0 && p < 1.0, errc::invalid_argument, "p must lie in [0,1)");
    require(lambda >= 0.0 && gamma >= 0.0 && omega >= 0.0 && delta >= 0.0 && alpha >= 0.0,
            errc::invalid_argument, "weights must be nonnegative");
    require(max_iters >= 1, errc::invalid_argument, "max_iters must be at least 1");
    require(rel_tol > 0.0, errc::invalid_argument, "rel_tol must be positive");
}

namespace {

// The D models drop the w-norm penalty; their product-form solutions are
// stationary points of the loss only with it removed.
double effective_omega(const ModelSpec& spec) {
    return domain_term(spec.model) == DomainTerm::domain_classifier ? 0.0 : spec.omega;
}

// Q_l^{-1} rhs, falling back to a tiny trace-scaled diagonal jitter when the
// labeled statistics are numerically singular.
Mat solve_with_jitter(const Mat& a, const Mat& rhs, bool& jitter_used) {
    try {
        return linalg::solve_linear(a, rhs);
    } catch (const Error& e) {
        if (e.code() != errc::singular_matrix) throw;
        Mat damped = a;
        const double eps = 1e-10 * trace(a) / static_cast<double>(a.rows());
        add_to_diag(damped, eps);
        jitter_used = true;
        return linalg::solve_linear(damped, rhs);
    }
}

// x k^{-1} for symmetric k, realized as a transposed solve.
Mat solve_right(const Mat& k, const Mat& x) {
    return transpose(linalg::solve_linear(k, transpose(x)));
}

// Cached per-(spec, split) statistics shared by the fitters, the loss and
// the gradients.
struct ModelContext {
    Model model;
    double p, lambda, gamma, omega_eff, delta;
    double x_norm_sq = 0.0;
    Mat p_mat;  // (1-p) x^T x over all training-visible rows
    Mat q;      // dropout-marginalized scatter over the same rows
    double y_norm_sq = 0.0;
    Mat q_l;       // marginalized scatter of the labeled rows
    Mat xl_t_yl;   // x_l^T y_l
    std::optional<Mat> coupling_m;  // M or M_c
    std::optional<Mat> z_d;
    Mat xt_ones;   // x^T 1 (all-ones target labels for the domain loss)
    double n_all = 0.0;
    bool jitter_used = false;
};

ModelContext build_context(const ModelSpec& spec, const ScenarioSplit& split) {
    spec.validate();
    ModelContext ctx;
    ctx.model = spec.model;
    ctx.p = spec.p;
    ctx.lambda = spec.lambda;
    ctx.gamma = spec.gamma;
    ctx.omega_eff = effective_omega(spec);
    ctx.delta = spec.delta;

    const CorruptionLaw law(spec.p);
    const Mat s = marginalize::scatter(split.x_all);
    ctx.x_norm_sq = split.x_all.frob_norm();
    ctx.x_norm_sq *= ctx.x_norm_sq;
    ctx.p_mat = marginalize::expected_p(s, law);
    ctx.q = marginalize::expected_q(s, law);

    if (uses_class_term(spec.model)) {
        require(split.x_labeled.rows() > 0, errc::empty_training_set, "no labeled rows for the class term");
        ctx.q_l = marginalize::expected_q(marginalize::scatter(split.x_labeled), law);
        ctx.xl_t_yl = at_b(split.x_labeled, split.y_labeled);
        ctx.y_norm_sq = split.y_labeled.frob_norm();
        ctx.y_norm_sq *= ctx.y_norm_sq;
    }

    switch (domain_term(spec.model)) {
        case DomainTerm::mmd:
            ctx.coupling_m = marginalize::expected_coupled_q(
                split.x_all, marginalize::mmd_coupling(split.domain_tags), law, spec.coupling_rule);
            break;
        case DomainTerm::class_means:
            ctx.coupling_m = marginalize::expected_coupled_q(
                split.x_all, marginalize::class_coupling(split.domain_tags, split.labels_all), law,
                spec.coupling_rule);
            break;
        case DomainTerm::domain_classifier: {
            ctx.z_d = fit_domain_classifier(split.x_all, split.domain_tags, spec.alpha);
            const std::size_t n = split.x_all.rows(), d = split.x_all.cols();
            ctx.xt_ones = Mat(d, 1);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) ctx.xt_ones(j, 0) += split.x_all(i, j);
            ctx.n_all = static_cast<double>(n);
            break;
        }
        case DomainTerm::none: break;
    }
    return ctx;
}

Mat ridge_step(const ModelContext& ctx, const Mat& w) {
    Mat g = at_b(w, ctx.q_l * w);
    add_to_diag(g, ctx.delta);
    return (1.0 - ctx.p) * linalg::solve_linear(g, at_b(w, ctx.xl_t_yl));
}

double total_loss(const ModelContext& ctx, const Mat& w, const Mat* z_l) {
    require(w.rows() == ctx.q.rows() && w.cols() == ctx.q.rows(), errc::dimension_mismatch,
            "w must be d x d");
    double loss = ctx.x_norm_sq - 2.0 * dot(ctx.p_mat, w) + dot(w, ctx.q * w) +
                  ctx.omega_eff * dot(w, w);
    if (uses_class_term(ctx.model)) {
        require(z_l != nullptr, errc::dimension_mismatch, "model needs a classifier for its loss");
        require(z_l->rows() == w.cols(), errc::dimension_mismatch, "classifier row count must equal d");
        const Mat wz = w * (*z_l);
        const double l2 = ctx.y_norm_sq - 2.0 * (1.0 - ctx.p) * dot(ctx.xl_t_yl, wz) +
                          dot(wz, ctx.q_l * wz) + ctx.delta * dot(*z_l, *z_l);
        loss += ctx.lambda * l2;
    }
    switch (domain_term(ctx.model)) {
        case DomainTerm::mmd:
        case DomainTerm::class_means:
            loss += ctx.gamma * dot(w, *ctx.coupling_m * w);
            break;
        case DomainTerm::domain_classifier: {
            const Mat wzd = w * (*ctx.z_d);
            const double ld = ctx.n_all - 2.0 * (1.0 - ctx.p) * dot(ctx.xt_ones, wzd) +
                              dot(wzd, ctx.q * wzd);
            loss += ctx.gamma * ld;
            break;
        }
        case DomainTerm::none: break;
    }
    return loss;
}

Gradients loss_gradients(const ModelContext& ctx, const Mat& w, const Mat* z_l) {
    Gradients g;
    g.w = -2.0 * ctx.p_mat + 2.0 * (ctx.q * w) + (2.0 * ctx.omega_eff) * w;
    if (uses_class_term(ctx.model)) {
        require(z_l != nullptr, errc::dimension_mismatch, "model needs a classifier for its gradients");
        const Mat& z = *z_l;
        const Mat zzt = z * transpose(z);
        g.w = g.w + ctx.lambda * (-2.0 * (1.0 - ctx.p) * (ctx.xl_t_yl * transpose(z)) +
                                  2.0 * (ctx.q_l * (w * zzt)));
        Mat wqw = at_b(w, ctx.q_l * w);
        add_to_diag(wqw, ctx.delta);
        g.z = ctx.lambda * (-2.0 * (1.0 - ctx.p) * at_b(w, ctx.xl_t_yl) + 2.0 * (wqw * z));
    }
    switch (domain_term(ctx.model)) {
        case DomainTerm::mmd:
        case DomainTerm::class_means:
            g.w = g.w + (2.0 * ctx.gamma) * (*ctx.coupling_m * w);
            break;
        case DomainTerm::domain_classifier: {
            const Mat& zd = *ctx.z_d;
            const Mat zdzdt = zd * transpose(zd);
            g.w = g.w + ctx.gamma * (-2.0 * (1.0 - ctx.p) * (ctx.xt_ones * transpose(zd)) +
                                     2.0 * (ctx.q * (w * zdzdt)));
            break;
        }
        case DomainTerm::none: break;
    }
    return g;
}

Mat sequential_w(ModelContext& ctx) {
    switch (ctx.model) {
        case Model::s1:
        case Model::s1m:
        case Model::s1c: {
            Mat lhs = ctx.q;
            add_to_diag(lhs, ctx.omega_eff);
            if (ctx.coupling_m) lhs = lhs + ctx.gamma * (*ctx.coupling_m);
            return linalg::solve_linear(lhs, ctx.p_mat);
        }
        case Model::s1d: {
            const Mat& zd = *ctx.z_d;
            const Mat rhs = ctx.p_mat + (ctx.gamma * (1.0 - ctx.p)) * (ctx.xt_ones * transpose(zd));
            const Mat wt = linalg::solve_linear(ctx.q, rhs);
            Mat k = ctx.gamma * (zd * transpose(zd));
            add_to_diag(k, 1.0);
            return solve_right(k, wt);
        }
        default:
            raise(errc::invalid_argument, "sequential solve requested for a non-sequential model");
    }
}

Mat w_step(ModelContext& ctx, const Mat& z) {
    Mat base = ctx.q;
    add_to_diag(base, ctx.omega_eff);
    if (ctx.coupling_m) base = base + ctx.gamma * (*ctx.coupling_m);
    const Mat a = solve_with_jitter(ctx.q_l, base, ctx.jitter_used);

    Mat rhs = ctx.p_mat + (ctx.lambda * (1.0 - ctx.p)) * (ctx.xl_t_yl * transpose(z));
    if (ctx.z_d) rhs = rhs + (ctx.gamma * (1.0 - ctx.p)) * (ctx.xt_ones * transpose(*ctx.z_d));
    Mat c = solve_with_jitter(ctx.q_l, rhs, ctx.jitter_used);

    Mat b = ctx.lambda * (z * transpose(z));
    if (ctx.z_d) {
        Mat k = ctx.gamma * (*ctx.z_d * transpose(*ctx.z_d));
        add_to_diag(k, 1.0);
        b = solve_right(k, b);
        c = solve_right(k, c);
    }
    return linalg::solve_sylvester(a, b, c);
}

} // namespace

Mat fit_domain_classifier(const Mat& x, std::span<const Domain> tags, double alpha) {
    require(tags.size() == x.rows(), errc::length_mismatch, "domain tag count does not match rows");
    std::size_t ns = 0;
    for (Domain d : tags)
        if (d == Domain::source) ++ns;
    require(ns > 0 && ns < tags.size(), errc::empty_domain,
            "domain classifier needs instances from both domains");

    Mat y(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) y(i, 0) = tags[i] == Domain::source ? -1.0 : 1.0;
    Mat lhs = gram(x);
    add_to_diag(lhs, alpha);
    Mat zd = linalg::solve_linear(lhs, at_b(x, y));
    zd.ensure_finite("fit_domain_classifier");
    return zd;
}

Mat fit_ridge_marginalized(const Mat& w, const Mat& x_l, const Mat& y_l, double p, double delta) {
    require(x_l.rows() > 0, errc::empty_training_set, "ridge fit needs labeled rows");
    require(y_l.rows() == x_l.rows(), errc::dimension_mismatch, "label matrix rows mismatch");
    require(w.rows() == x_l.cols() && w.cols() == x_l.cols(), errc::dimension_mismatch,
            "w must be d x d");
    const CorruptionLaw law(p);
    const Mat q_l = marginalize::expected_q(marginalize::scatter(x_l), law);
    Mat g = at_b(w, q_l * w);
    add_to_diag(g, delta);
    Mat z = (1.0 - p) * linalg::solve_linear(g, at_b(w, at_b(x_l, y_l)));
    z.ensure_finite("fit_ridge_marginalized");
    return z;
}

FitResult fit_sequential_w(const ModelSpec& spec, const ScenarioSplit& split) {
    require(is_sequential(spec.model), errc::invalid_argument,
            std::string("fit_sequential_w cannot run model ") + to_string(spec.model));
    ModelContext ctx = build_context(spec, split);
    FitResult res;
    res.w = sequential_w(ctx);
    res.w.ensure_finite("fit_sequential_w");
    if (ctx.z_d) res.z_d = *ctx.z_d;
    res.loss_trace.push_back(total_loss(ctx, res.w, nullptr));
    res.iterations = 1;
    res.converged = true;
    res.jitter_used = ctx.jitter_used;
    return res;
}

FitResult fit_joint(const ModelSpec& spec, const ScenarioSplit& split) {
    require(is_joint(spec.model), errc::invalid_argument,
            std::string("fit_joint cannot run model ") + to_string(spec.model));
    ModelContext ctx = build_context(spec, split);

    FitResult res;
    res.w = Mat::identity(split.x_all.cols());
    Mat z = ridge_step(ctx, res.w);
    double loss_prev = total_loss(ctx, res.w, &z);
    res.loss_trace.push_back(loss_prev);

    constexpr double slack = 1e-8;
    for (int it = 1; it <= spec.max_iters; ++it) {
        res.w = w_step(ctx, z);
        const double loss_mid = total_loss(ctx, res.w, &z);
        if (loss_mid > loss_prev + slack)
            raise(errc::non_decreasing_loss, "w step raised the loss by " + std::to_string(loss_mid - loss_prev));
        z = ridge_step(ctx, res.w);
        const double loss_now = total_loss(ctx, res.w, &z);
        if (loss_now > loss_mid + slack)
            raise(errc::non_decreasing_loss,
                  "classifier step raised the loss by " + std::to_string(loss_now - loss_mid));
        res.loss_trace.push_back(loss_now);
        res.iterations = it;
        if (std::fabs(loss_now - loss_prev) / std::max(1.0, std::fabs(loss_prev)) < spec.rel_tol) {
            res.converged = true;
            break;
        }
        loss_prev = loss_now;
    }
    res.w.ensure_finite("fit_joint");
    res.z_l = std::move(z);
    if (ctx.z_d) res.z_d = *ctx.z_d;
    res.jitter_used = ctx.jitter_used;
    return res;
}

FitResult fit(const ModelSpec& spec, const ScenarioSplit& split) {
    if (spec.model == Model::bl) {
        spec.validate();
        FitResult res;
        res.w = Mat::identity(split.x_all.cols());
        res.z_l = fit_ridge_marginalized(res.w, split.x_labeled, split.y_labeled, spec.p, spec.delta);
        ModelContext ctx = build_context(spec, split);
        res.loss_trace.push_back(total_loss(ctx, res.w, &*res.z_l));
        res.iterations = 1;
        res.converged = true;
        return res;
    }
    return is_sequential(spec.model) ? fit_sequential_w(spec, split) : fit_joint(spec, split);
}

double expected_total_loss(const ModelSpec& spec, const ScenarioSplit& split, const Mat& w,
                           const Mat* z_l) {
    ModelContext ctx = build_context(spec, split);
    return total_loss(ctx, w, z_l);
}

Gradients analytic_gradients(const ModelSpec& spec, const ScenarioSplit& split, const Mat& w,
                             const Mat* z_l) {
    ModelContext ctx = build_context(spec, split);
    return loss_gradients(ctx, w, z_l);
}

Mat joint_w_step(const ModelSpec& spec, const ScenarioSplit& split, const Mat& z_l) {
    require(is_joint(spec.model), errc::invalid_argument, "joint w step needs a joint model");
    ModelContext ctx = build_context(spec, split);
    return w_step(ctx, z_l);
}

Mat joint_w_closed_form_all_labeled(const ModelSpec& spec, const ScenarioSplit& split, const Mat& z_l) {
    require(spec.model == Model::j12, errc::invalid_argument,
            "the direct w update applies to the plain joint model");
    require(spec.omega == 0.0, errc::invalid_argument, "the direct w update needs omega = 0");
    require(split.x_all.rows() == split.x_labeled.rows(), errc::invalid_argument,
            "the direct w update needs every training row labeled");
    ModelContext ctx = build_context(spec, split);
    const Mat rhs = ctx.p_mat + (ctx.lambda * (1.0 - ctx.p)) * (ctx.xl_t_yl * transpose(z_l));
    const Mat c0 = solve_with_jitter(ctx.q_l, rhs, ctx.jitter_used);
    Mat k = ctx.lambda * (z_l * transpose(z_l));
    add_to_diag(k, 1.0);
    return solve_right(k, c0);
}

} // namespace meda::models
