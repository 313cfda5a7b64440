#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "data.hpp"
#include "marginalize.hpp"
#include "mat.hpp"

namespace meda::models {

/// BL is the plain ridge baseline (w fixed to the identity). The s-prefixed
/// models learn the denoiser w alone in closed form; the j-prefixed ones
/// alternate between the classifier and a Sylvester solve for w. Suffixes
/// pick the domain regularizer: M = centroid discrepancy, C = per-class
/// centroid discrepancy, D = pre-trained domain classifier.
enum class Model { bl, s1, s1m, s1c, s1d, j12, j12m, j12c, j12d };

Model model_from_string(std::string_view s);
const char* to_string(Model m);

bool is_sequential(Model m);
bool is_joint(Model m);

enum class DomainTerm { none, mmd, class_means, domain_classifier };
DomainTerm domain_term(Model m);

/// Whether the model's loss carries the labeled classification term.
bool uses_class_term(Model m);

struct ModelSpec {
    Model model = Model::s1;
    double p = 0.5;          // dropout probability
    double lambda = 1.0;     // class-loss weight
    double gamma = 1.0;      // domain-loss weight
    double omega = 1e-2;     // w-norm regularizer (forced to 0 for the D models)
    double delta = 1.0;      // classifier-norm regularizer
    double alpha = 1.0;      // domain-classifier-norm regularizer
    int max_iters = 50;
    double rel_tol = 1e-6;
    marginalize::CouplingRule coupling_rule = marginalize::CouplingRule::exact;

    void validate() const;
};

struct FitResult {
    Mat w;
    std::optional<Mat> z_l;
    std::optional<Mat> z_d;
    std::vector<double> loss_trace;
    int iterations = 0;
    bool converged = false;
    bool jitter_used = false;
};

/// Ridge separator between the domains on uncorrupted data:
/// (x^T x + alpha I)^{-1} x^T y with y = -1 on source rows, +1 on target.
Mat fit_domain_classifier(const Mat& x, std::span<const Domain> tags, double alpha);

/// Dropout-marginalized ridge classifier for fixed w:
/// (1-p) (w^T Q_l w + delta I)^{-1} w^T x_l^T y_l. With w = I and p = 0 this
/// is the plain ridge fit.
Mat fit_ridge_marginalized(const Mat& w, const Mat& x_l, const Mat& y_l, double p, double delta);

/// Closed-form denoiser for the s-family; z_l is left unset (train a
/// classifier afterwards, e.g. via fit_ridge_marginalized or on x w).
FitResult fit_sequential_w(const ModelSpec& spec, const data::ScenarioSplit& split);

/// Alternating minimization for the j-family: w starts at the identity, the
/// classifier step is the marginalized ridge solution, the w step solves a
/// Sylvester equation. Stops when the relative loss change drops below
/// rel_tol or at max_iters.
FitResult fit_joint(const ModelSpec& spec, const data::ScenarioSplit& split);

/// Dispatch over all nine models (BL fixes w = I and fits the ridge).
FitResult fit(const ModelSpec& spec, const data::ScenarioSplit& split);

/// Marginalized total loss of the model's active terms at (w, z_l); z_l may
/// be null for models without the class term.
double expected_total_loss(const ModelSpec& spec, const data::ScenarioSplit& split, const Mat& w,
                           const Mat* z_l);

struct Gradients {
    Mat w;
    Mat z;  // zero-sized when the model has no class term
};

/// Analytic gradients of expected_total_loss with respect to w and z_l.
Gradients analytic_gradients(const ModelSpec& spec, const data::ScenarioSplit& split, const Mat& w,
                             const Mat* z_l);

/// One w update of the joint scheme at fixed z (exposed for validation).
Mat joint_w_step(const ModelSpec& spec, const data::ScenarioSplit& split, const Mat& z_l);

/// Direct w update available when all training rows are labeled and omega is
/// zero; equals the Sylvester step in that regime.
Mat joint_w_closed_form_all_labeled(const ModelSpec& spec, const data::ScenarioSplit& split, const Mat& z_l);

} // namespace meda::models
