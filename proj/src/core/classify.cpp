#include "classify.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace meda::classify {

std::vector<int> predict_linear(const Mat& x, const Mat& z) {
    require(x.cols() == z.rows(), errc::dimension_mismatch,
            "predict_linear: feature dimensionality " + std::to_string(x.cols()) + " vs classifier rows " +
                std::to_string(z.rows()));
    const Mat scores = x * z;
    std::vector<int> labels(x.rows());
    if (z.cols() == 1) {
        for (std::size_t i = 0; i < x.rows(); ++i) labels[i] = scores(i, 0) > 0.0 ? 1 : 0;
        return labels;
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < scores.cols(); ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

std::vector<int> nn_classify(const Mat& train_x, std::span<const int> train_labels, const Mat& test_x) {
    require(train_x.rows() > 0, errc::empty_training_set, "nn_classify: no training rows");
    require(train_labels.size() == train_x.rows(), errc::length_mismatch,
            "nn_classify: label count does not match training rows");
    require(train_x.cols() == test_x.cols(), errc::dimension_mismatch,
            "nn_classify: train/test dimensionality differs");

    std::vector<int> labels(test_x.rows());
    for (std::size_t t = 0; t < test_x.rows(); ++t) {
        auto q = test_x.row(t);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < train_x.rows(); ++i) {
            auto r = train_x.row(i);
            double d2 = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) {
                const double diff = q[j] - r[j];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                best_i = i;
            }
        }
        labels[t] = train_labels[best_i];
    }
    return labels;
}

std::vector<int> dscm_classify(const Mat& train_x, std::span<const int> train_labels,
                               std::span<const int> train_domains, int class_count, const Mat& test_x,
                               double sigma) {
    require(train_x.rows() > 0, errc::empty_training_set, "dscm_classify: no training rows");
    require(train_labels.size() == train_x.rows() && train_domains.size() == train_x.rows(),
            errc::length_mismatch, "dscm_classify: label/domain counts do not match training rows");
    require(train_x.cols() == test_x.cols(), errc::dimension_mismatch,
            "dscm_classify: train/test dimensionality differs");
    require(class_count >= 1, errc::invalid_argument, "dscm_classify: class_count must be positive");
    require(sigma > 0.0, errc::invalid_argument, "dscm_classify: sigma must be positive");

    const std::size_t d = train_x.cols();

    // per (class, domain) centroids
    std::map<std::pair<int, int>, std::pair<std::vector<double>, std::size_t>> cents;
    for (std::size_t i = 0; i < train_x.rows(); ++i) {
        const int c = train_labels[i];
        require(c >= 0 && c < class_count, errc::label_out_of_range,
                "dscm_classify: label " + std::to_string(c) + " outside [0," + std::to_string(class_count) + ")");
        auto& [sum, cnt] = cents[{c, train_domains[i]}];
        if (sum.empty()) sum.assign(d, 0.0);
        auto r = train_x.row(i);
        for (std::size_t j = 0; j < d; ++j) sum[j] += r[j];
        ++cnt;
    }
    std::vector<bool> covered(static_cast<std::size_t>(class_count), false);
    for (auto& [key, val] : cents) {
        auto& [sum, cnt] = val;
        for (double& v : sum) v /= static_cast<double>(cnt);
        covered[static_cast<std::size_t>(key.first)] = true;
    }
    for (int c = 0; c < class_count; ++c)
        require(covered[static_cast<std::size_t>(c)], errc::empty_class,
                "dscm_classify: class " + std::to_string(c) + " has no training instance in any domain");

    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    std::vector<int> labels(test_x.rows());
    for (std::size_t t = 0; t < test_x.rows(); ++t) {
        auto q = test_x.row(t);
        std::vector<double> score(static_cast<std::size_t>(class_count), 0.0);
        for (const auto& [key, val] : cents) {
            const auto& mu = val.first;
            double d2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = q[j] - mu[j];
                d2 += diff * diff;
            }
            score[static_cast<std::size_t>(key.first)] += std::exp(-d2 * inv_two_sigma2);
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < score.size(); ++c)
            if (score[c] > score[best]) best = c;
        labels[t] = static_cast<int>(best);
    }
    return labels;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    require(predicted.size() == truth.size(), errc::length_mismatch,
            "accuracy: prediction and truth lengths differ");
    require(!predicted.empty(), errc::length_mismatch, "accuracy: empty inputs");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

} // namespace meda::classify
