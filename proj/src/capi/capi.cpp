#include "meda/meda.h"

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "core/classify.hpp"
#include "core/data.hpp"
#include "core/harness.hpp"
#include "core/linalg.hpp"
#include "core/marginalize.hpp"
#include "core/models.hpp"

struct meda_mat {
    meda::Mat m;
};
struct meda_dataset {
    meda::data::Dataset ds;
};
struct meda_split {
    meda::data::ScenarioSplit sp;
};
struct meda_fit_result {
    meda::models::FitResult r;
};
struct meda_config {
    meda::harness::ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

meda_status map_code(meda::errc c) {
    using meda::errc;
    switch (c) {
        case errc::invalid_argument:           return MEDA_ERR_INVALID_ARGUMENT;
        case errc::dimension_mismatch:         return MEDA_ERR_DIMENSION_MISMATCH;
        case errc::length_mismatch:            return MEDA_ERR_LENGTH_MISMATCH;
        case errc::not_finite:                 return MEDA_ERR_NOT_FINITE;
        case errc::singular_matrix:            return MEDA_ERR_SINGULAR_MATRIX;
        case errc::convergence_failure:        return MEDA_ERR_CONVERGENCE_FAILURE;
        case errc::spectrum_overlap:           return MEDA_ERR_SPECTRUM_OVERLAP;
        case errc::dimension_too_large:        return MEDA_ERR_DIMENSION_TOO_LARGE;
        case errc::empty_domain:               return MEDA_ERR_EMPTY_DOMAIN;
        case errc::no_shared_classes:          return MEDA_ERR_NO_SHARED_CLASSES;
        case errc::non_decreasing_loss:        return MEDA_ERR_NON_DECREASING_LOSS;
        case errc::parse_error:                return MEDA_ERR_PARSE;
        case errc::inconsistent_width:         return MEDA_ERR_INCONSISTENT_WIDTH;
        case errc::negative_index:             return MEDA_ERR_NEGATIVE_INDEX;
        case errc::label_out_of_range:         return MEDA_ERR_LABEL_OUT_OF_RANGE;
        case errc::insufficient_target_labels: return MEDA_ERR_INSUFFICIENT_TARGET_LABELS;
        case errc::empty_training_set:         return MEDA_ERR_EMPTY_TRAINING_SET;
        case errc::empty_class:                return MEDA_ERR_EMPTY_CLASS;
        case errc::io_error:                   return MEDA_ERR_IO;
    }
    return MEDA_ERR_UNKNOWN;
}

template <class F>
meda_status guarded(F&& body) {
    try {
        body();
        return MEDA_OK;
    } catch (const meda::Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MEDA_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unidentified failure";
        return MEDA_ERR_UNKNOWN;
    }
}

meda_status fail_arg(const char* msg) {
    g_last_error = msg;
    return MEDA_ERR_INVALID_ARGUMENT;
}

std::vector<meda::Domain> domain_tags(const int* tags, std::size_t n) {
    std::vector<meda::Domain> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        meda::require(tags[i] == 0 || tags[i] == 1, meda::errc::invalid_argument,
                      "domain tags must be 0 (source) or 1 (target)");
        out.push_back(tags[i] == 0 ? meda::Domain::source : meda::Domain::target);
    }
    return out;
}

meda::marginalize::CouplingMatrix build_coupling(const meda_mat* x, const int* tags, const int* labels) {
    const std::size_t n = x->m.rows();
    const auto dt = domain_tags(tags, n);
    if (labels == nullptr) return meda::marginalize::mmd_coupling(dt);
    return meda::marginalize::class_coupling(dt, std::span<const int>(labels, n));
}

meda::models::Model model_from_int(int m) {
    meda::require(m >= MEDA_MODEL_BL && m <= MEDA_MODEL_J12D, meda::errc::invalid_argument,
                  "unknown model id " + std::to_string(m));
    return static_cast<meda::models::Model>(m);
}

meda::models::ModelSpec spec_from(const meda_model_params& p) {
    meda::models::ModelSpec s;
    s.model = model_from_int(p.model);
    s.p = p.p;
    s.lambda = p.lambda;
    s.gamma = p.gamma;
    s.omega = p.omega;
    s.delta = p.delta;
    s.alpha = p.alpha;
    s.max_iters = p.max_iters;
    s.rel_tol = p.rel_tol;
    meda::require(p.coupling_rule == 0 || p.coupling_rule == 1, meda::errc::invalid_argument,
                  "coupling_rule must be 0 (exact) or 1 (simplified)");
    s.coupling_rule = p.coupling_rule == 0 ? meda::marginalize::CouplingRule::exact
                                           : meda::marginalize::CouplingRule::simplified;
    return s;
}

meda::harness::FileFormat format_from_int(int f) {
    meda::require(f >= 0 && f <= 2, meda::errc::invalid_argument, "format must be 0, 1 or 2");
    return static_cast<meda::harness::FileFormat>(f);
}

meda::Scenario scenario_from_int(int s) {
    meda::require(s >= 0 && s <= 2, meda::errc::invalid_argument, "scenario must be 0 (us), 1 (sup) or 2 (ss)");
    return static_cast<meda::Scenario>(s);
}

std::vector<double> parse_grid(const char* csv) {
    std::vector<double> out;
    if (csv == nullptr) return out;
    std::string cur;
    const std::string s(csv);
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ',') {
            if (!cur.empty()) {
                std::size_t pos = 0;
                out.push_back(std::stod(cur, &pos));
                meda::require(pos == cur.size(), meda::errc::invalid_argument,
                              "bad grid value '" + cur + "'");
                cur.clear();
            }
        } else if (!std::isspace(static_cast<unsigned char>(s[i]))) {
            cur.push_back(s[i]);
        }
    }
    return out;
}

} // namespace

extern "C" {

const char* meda_status_name(meda_status status) {
    switch (status) {
        case MEDA_OK:                             return "ok";
        case MEDA_ERR_INVALID_ARGUMENT:           return "invalid_argument";
        case MEDA_ERR_DIMENSION_MISMATCH:         return "dimension_mismatch";
        case MEDA_ERR_LENGTH_MISMATCH:            return "length_mismatch";
        case MEDA_ERR_NOT_FINITE:                 return "not_finite";
        case MEDA_ERR_SINGULAR_MATRIX:            return "singular_matrix";
        case MEDA_ERR_CONVERGENCE_FAILURE:        return "convergence_failure";
        case MEDA_ERR_SPECTRUM_OVERLAP:           return "spectrum_overlap";
        case MEDA_ERR_DIMENSION_TOO_LARGE:        return "dimension_too_large";
        case MEDA_ERR_EMPTY_DOMAIN:               return "empty_domain";
        case MEDA_ERR_NO_SHARED_CLASSES:          return "no_shared_classes";
        case MEDA_ERR_NON_DECREASING_LOSS:        return "non_decreasing_loss";
        case MEDA_ERR_PARSE:                      return "parse_error";
        case MEDA_ERR_INCONSISTENT_WIDTH:         return "inconsistent_width";
        case MEDA_ERR_NEGATIVE_INDEX:             return "negative_index";
        case MEDA_ERR_LABEL_OUT_OF_RANGE:         return "label_out_of_range";
        case MEDA_ERR_INSUFFICIENT_TARGET_LABELS: return "insufficient_target_labels";
        case MEDA_ERR_EMPTY_TRAINING_SET:         return "empty_training_set";
        case MEDA_ERR_EMPTY_CLASS:                return "empty_class";
        case MEDA_ERR_IO:                         return "io_error";
        case MEDA_ERR_UNKNOWN:                    return "unknown";
    }
    return "unknown";
}

const char* meda_last_error(void) { return g_last_error.c_str(); }

const char* meda_version(void) { return "1.0.0"; }

void meda_string_free(char* s) { std::free(s); }

/* -------------------- matrices -------------------- */

meda_status meda_mat_create(size_t rows, size_t cols, const double* data, meda_mat** out) {
    if (!out) return fail_arg("out must not be null");
    return guarded([&] {
        if (data == nullptr) {
            *out = new meda_mat{meda::Mat(rows, cols)};
        } else {
            std::vector<double> v(data, data + rows * cols);
            *out = new meda_mat{meda::Mat(rows, cols, std::move(v))};
        }
    });
}

void meda_mat_free(meda_mat* m) { delete m; }

size_t meda_mat_rows(const meda_mat* m) { return m ? m->m.rows() : 0; }
size_t meda_mat_cols(const meda_mat* m) { return m ? m->m.cols() : 0; }

double meda_mat_get(const meda_mat* m, size_t i, size_t j) {
    if (!m || i >= m->m.rows() || j >= m->m.cols()) return 0.0;
    return m->m(i, j);
}

meda_status meda_mat_copy_data(const meda_mat* m, double* out) {
    if (!m || !out) return fail_arg("null argument");
    std::memcpy(out, m->m.data().data(), m->m.size() * sizeof(double));
    return MEDA_OK;
}

/* -------------------- linear algebra -------------------- */

meda_status meda_solve_linear(const meda_mat* a, const meda_mat* b, meda_mat** out) {
    if (!a || !b || !out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_mat{meda::linalg::solve_linear(a->m, b->m)}; });
}

meda_status meda_schur_decompose(const meda_mat* a, meda_mat** q_out, meda_mat** t_out) {
    if (!a || !q_out || !t_out) return fail_arg("null argument");
    return guarded([&] {
        auto s = meda::linalg::schur_decompose(a->m);
        *q_out = new meda_mat{std::move(s.q)};
        *t_out = new meda_mat{std::move(s.t)};
    });
}

meda_status meda_solve_sylvester(const meda_mat* a, const meda_mat* b, const meda_mat* c,
                                 meda_mat** out) {
    if (!a || !b || !c || !out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_mat{meda::linalg::solve_sylvester(a->m, b->m, c->m)}; });
}

meda_status meda_sylvester_oracle_kron(const meda_mat* a, const meda_mat* b, const meda_mat* c,
                                       meda_mat** out) {
    if (!a || !b || !c || !out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_mat{meda::linalg::sylvester_oracle_kron(a->m, b->m, c->m)}; });
}

/* -------------------- marginalization -------------------- */

meda_status meda_scatter(const meda_mat* x, meda_mat** out) {
    if (!x || !out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_mat{meda::marginalize::scatter(x->m)}; });
}

meda_status meda_expected_p(const meda_mat* s, double p, meda_mat** out) {
    if (!s || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_mat{meda::marginalize::expected_p(s->m, meda::marginalize::CorruptionLaw(p))};
    });
}

meda_status meda_expected_q(const meda_mat* s, double p, meda_mat** out) {
    if (!s || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_mat{meda::marginalize::expected_q(s->m, meda::marginalize::CorruptionLaw(p))};
    });
}

meda_status meda_mmd_coupling(const int* tags, size_t n, meda_mat** out) {
    if (!tags || !out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_mat{meda::marginalize::mmd_coupling(domain_tags(tags, n)).n}; });
}

meda_status meda_class_coupling(const int* tags, const int* labels, size_t n, meda_mat** out) {
    if (!tags || !labels || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_mat{
            meda::marginalize::class_coupling(domain_tags(tags, n), std::span<const int>(labels, n)).n};
    });
}

meda_status meda_expected_coupled_q(const meda_mat* x, const int* tags, const int* labels, double p,
                                    int rule, meda_mat** out) {
    if (!x || !tags || !out) return fail_arg("null argument");
    return guarded([&] {
        meda::require(rule == 0 || rule == 1, meda::errc::invalid_argument,
                      "rule must be 0 (exact) or 1 (simplified)");
        const auto coupling = build_coupling(x, tags, labels);
        *out = new meda_mat{meda::marginalize::expected_coupled_q(
            x->m, coupling, meda::marginalize::CorruptionLaw(p),
            rule == 0 ? meda::marginalize::CouplingRule::exact
                      : meda::marginalize::CouplingRule::simplified)};
    });
}

meda_status meda_coupling_quadratic(const meda_mat* x, const int* tags, const int* labels, double* out) {
    if (!x || !tags || !out) return fail_arg("null argument");
    return guarded([&] { *out = meda::marginalize::coupling_quadratic(x->m, build_coupling(x, tags, labels)); });
}

meda_status meda_corrupt(const meda_mat* x, double p, uint64_t seed, meda_mat** out) {
    if (!x || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_mat{
            meda::marginalize::monte_carlo_corrupt(x->m, meda::marginalize::CorruptionLaw(p), seed)};
    });
}

/* -------------------- datasets and scenarios -------------------- */

meda_status meda_dataset_load(const char* path, int format, meda_dataset** out) {
    if (!path || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_dataset{meda::harness::load_dataset(path, format_from_int(format))};
    });
}

meda_status meda_dataset_create(size_t rows, size_t cols, const double* features, const int* labels,
                                const char* domain, meda_dataset** out) {
    if (!features || !labels || !domain || !out) return fail_arg("null argument");
    return guarded([&] {
        meda::data::Dataset ds;
        std::vector<double> v(features, features + rows * cols);
        ds.features = meda::Mat(rows, cols, std::move(v));
        ds.labels.assign(labels, labels + rows);
        ds.domains.assign(rows, domain);
        for (int l : ds.labels) ds.class_count = std::max(ds.class_count, l + 1);
        *out = new meda_dataset{std::move(ds)};
    });
}

void meda_dataset_free(meda_dataset* ds) { delete ds; }

size_t meda_dataset_rows(const meda_dataset* ds) { return ds ? ds->ds.rows() : 0; }
size_t meda_dataset_dim(const meda_dataset* ds) { return ds ? ds->ds.dim() : 0; }
int meda_dataset_class_count(const meda_dataset* ds) { return ds ? ds->ds.class_count : 0; }

meda_status meda_dataset_save_dense(const meda_dataset* ds, const char* path) {
    if (!ds || !path) return fail_arg("null argument");
    return guarded([&] { meda::data::save_dense(ds->ds, path); });
}

meda_status meda_synth_shift(uint64_t seed, size_t d, int class_count, size_t n_per_class,
                             double shift_magnitude, double rotation_angle, meda_dataset** source_out,
                             meda_dataset** target_out) {
    if (!source_out || !target_out) return fail_arg("null argument");
    return guarded([&] {
        auto [src, tgt] =
            meda::data::synth_shift(seed, d, class_count, n_per_class, shift_magnitude, rotation_angle);
        *source_out = new meda_dataset{std::move(src)};
        *target_out = new meda_dataset{std::move(tgt)};
    });
}

meda_status meda_build_scenario(const meda_dataset* source, const meda_dataset* target, int scenario,
                                size_t labeled_per_class, uint64_t seed, meda_split** out) {
    if (!source || !target || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_split{meda::data::build_scenario(source->ds, target->ds,
                                                         scenario_from_int(scenario), labeled_per_class,
                                                         seed)};
    });
}

void meda_split_free(meda_split* sp) { delete sp; }

size_t meda_split_train_rows(const meda_split* sp) { return sp ? sp->sp.x_all.rows() : 0; }
size_t meda_split_labeled_rows(const meda_split* sp) { return sp ? sp->sp.x_labeled.rows() : 0; }
size_t meda_split_test_rows(const meda_split* sp) { return sp ? sp->sp.test_x.rows() : 0; }

/* -------------------- model fitting -------------------- */

void meda_model_params_init(meda_model_params* params) {
    if (!params) return;
    params->model = MEDA_MODEL_S1;
    params->p = 0.5;
    params->lambda = 1.0;
    params->gamma = 1.0;
    params->omega = 1e-2;
    params->delta = 1.0;
    params->alpha = 1.0;
    params->max_iters = 50;
    params->rel_tol = 1e-6;
    params->coupling_rule = 0;
}

meda_status meda_fit(const meda_model_params* params, const meda_split* split, meda_fit_result** out) {
    if (!params || !split || !out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_fit_result{meda::models::fit(spec_from(*params), split->sp)}; });
}

void meda_fit_result_free(meda_fit_result* res) { delete res; }

meda_status meda_fit_result_w(const meda_fit_result* res, meda_mat** out) {
    if (!res || !out) return fail_arg("null argument");
    *out = new meda_mat{res->r.w};
    return MEDA_OK;
}

meda_status meda_fit_result_classifier(const meda_fit_result* res, meda_mat** out) {
    if (!res || !out) return fail_arg("null argument");
    *out = res->r.z_l ? new meda_mat{*res->r.z_l} : nullptr;
    return MEDA_OK;
}

int meda_fit_result_iterations(const meda_fit_result* res) { return res ? res->r.iterations : 0; }
int meda_fit_result_converged(const meda_fit_result* res) { return res && res->r.converged ? 1 : 0; }

size_t meda_fit_result_trace_len(const meda_fit_result* res) {
    return res ? res->r.loss_trace.size() : 0;
}

meda_status meda_fit_result_trace(const meda_fit_result* res, double* out) {
    if (!res || !out) return fail_arg("null argument");
    std::memcpy(out, res->r.loss_trace.data(), res->r.loss_trace.size() * sizeof(double));
    return MEDA_OK;
}

meda_status meda_fit_ridge(const meda_mat* w, const meda_mat* x_l, const meda_mat* y_l, double p,
                           double delta, meda_mat** out) {
    if (!w || !x_l || !y_l || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_mat{meda::models::fit_ridge_marginalized(w->m, x_l->m, y_l->m, p, delta)};
    });
}

meda_status meda_fit_domain_classifier(const meda_mat* x, const int* tags, double alpha,
                                       meda_mat** out) {
    if (!x || !tags || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_mat{
            meda::models::fit_domain_classifier(x->m, domain_tags(tags, x->m.rows()), alpha)};
    });
}

meda_status meda_expected_loss(const meda_model_params* params, const meda_split* split,
                               const meda_mat* w, const meda_mat* z, double* out) {
    if (!params || !split || !w || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = meda::models::expected_total_loss(spec_from(*params), split->sp, w->m,
                                                 z ? &z->m : nullptr);
    });
}

meda_status meda_loss_gradients(const meda_model_params* params, const meda_split* split,
                                const meda_mat* w, const meda_mat* z, meda_mat** dw_out,
                                meda_mat** dz_out) {
    if (!params || !split || !w || !dw_out) return fail_arg("null argument");
    return guarded([&] {
        auto g = meda::models::analytic_gradients(spec_from(*params), split->sp, w->m,
                                                  z ? &z->m : nullptr);
        *dw_out = new meda_mat{std::move(g.w)};
        if (dz_out) *dz_out = g.z.empty() ? nullptr : new meda_mat{std::move(g.z)};
    });
}

/* -------------------- classifiers -------------------- */

meda_status meda_predict_linear(const meda_mat* x, const meda_mat* z, int* labels_out) {
    if (!x || !z || !labels_out) return fail_arg("null argument");
    return guarded([&] {
        const auto labels = meda::classify::predict_linear(x->m, z->m);
        std::copy(labels.begin(), labels.end(), labels_out);
    });
}

meda_status meda_nn_classify(const meda_mat* train_x, const int* train_labels, const meda_mat* test_x,
                             int* labels_out) {
    if (!train_x || !train_labels || !test_x || !labels_out) return fail_arg("null argument");
    return guarded([&] {
        const auto labels = meda::classify::nn_classify(
            train_x->m, std::span<const int>(train_labels, train_x->m.rows()), test_x->m);
        std::copy(labels.begin(), labels.end(), labels_out);
    });
}

meda_status meda_dscm_classify(const meda_mat* train_x, const int* train_labels,
                               const int* train_domains, int class_count, const meda_mat* test_x,
                               double sigma, int* labels_out) {
    if (!train_x || !train_labels || !train_domains || !test_x || !labels_out)
        return fail_arg("null argument");
    return guarded([&] {
        const std::size_t n = train_x->m.rows();
        const auto labels = meda::classify::dscm_classify(train_x->m, std::span<const int>(train_labels, n),
                                                          std::span<const int>(train_domains, n),
                                                          class_count, test_x->m, sigma);
        std::copy(labels.begin(), labels.end(), labels_out);
    });
}

meda_status meda_accuracy(const int* predicted, const int* truth, size_t n, double* out) {
    if (!predicted || !truth || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = meda::classify::accuracy(std::span<const int>(predicted, n), std::span<const int>(truth, n));
    });
}

meda_status meda_make_label_matrix(const int* labels, size_t n, int class_count, meda_mat** out) {
    if (!labels || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new meda_mat{meda::data::make_label_matrix(std::span<const int>(labels, n), class_count)};
    });
}

meda_status meda_standardize(const meda_mat* stats_from, const meda_mat* apply_to, meda_mat** out) {
    if (!stats_from || !apply_to || !out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_mat{meda::data::standardize(stats_from->m, apply_to->m)}; });
}

/* -------------------- harness -------------------- */

meda_status meda_config_create(meda_config** out) {
    if (!out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_config{}; });
}

meda_status meda_config_load(const char* path, meda_config** out) {
    if (!path || !out) return fail_arg("null argument");
    return guarded([&] { *out = new meda_config{meda::harness::load_config(path)}; });
}

meda_status meda_config_set(meda_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail_arg("null argument");
    return guarded([&] { cfg->cfg.set(key, value); });
}

void meda_config_free(meda_config* cfg) { delete cfg; }

meda_status meda_validate(const meda_config* cfg, char** report_out, int* ok_out) {
    if (!cfg || !report_out || !ok_out) return fail_arg("null argument");
    return guarded([&] {
        const auto rep = meda::harness::validate(cfg->cfg);
        std::string text;
        if (rep.violations.empty()) {
            text += "valid: no violations\n";
        } else {
            text += "violations (" + std::to_string(rep.violations.size()) + "):\n";
            for (const auto& v : rep.violations) text += "  - " + v + "\n";
        }
        text += "resolved configuration:\n" + rep.resolved_config;
        char* buf = static_cast<char*>(std::malloc(text.size() + 1));
        meda::require(buf != nullptr, meda::errc::io_error, "allocation failed");
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *report_out = buf;
        *ok_out = rep.ok() ? 1 : 0;
    });
}

meda_status meda_run(const meda_config* cfg, int* failed_cells_out) {
    if (!cfg || !failed_cells_out) return fail_arg("null argument");
    return guarded([&] {
        const auto result = meda::harness::run(cfg->cfg);
        meda::harness::emit(result, cfg->cfg, cfg->cfg.output_dir);
        *failed_cells_out = static_cast<int>(result.failures.size());
    });
}

meda_status meda_sweep(const meda_config* cfg, const char* lambda_grid, const char* gamma_grid,
                       const char* noise_grid) {
    if (!cfg) return fail_arg("null argument");
    return guarded([&] {
        const auto ls = parse_grid(lambda_grid);
        const auto gs = parse_grid(gamma_grid);
        const auto ps = parse_grid(noise_grid);
        meda::harness::sweep(cfg->cfg, ls, gs, ps);
    });
}

meda_status meda_synth_write(uint64_t seed, size_t d, int class_count, size_t n_per_class,
                             double shift_magnitude, double rotation_angle, const char* out_dir) {
    if (!out_dir) return fail_arg("null argument");
    return guarded([&] {
        auto [src, tgt] =
            meda::data::synth_shift(seed, d, class_count, n_per_class, shift_magnitude, rotation_angle);
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        meda::require(!ec, meda::errc::io_error, "cannot create directory '" + std::string(out_dir) + "'");
        meda::data::save_dense(src, std::string(out_dir) + "/source.csv");
        meda::data::save_dense(tgt, std::string(out_dir) + "/target.csv");
    });
}

} // extern "C"
