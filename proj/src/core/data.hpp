#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mat.hpp"
#include "types.hpp"

namespace meda::data {

inline constexpr int kUnlabeled = -1;

/// Feature matrix with per-row class ids (-1 = unlabeled) and domain tokens.
struct Dataset {
    Mat features;
    std::vector<int> labels;
    std::vector<std::string> domains;
    int class_count = 0;

    std::size_t rows() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

/// Materialized adaptation arrangement for one source/target task.
struct ScenarioSplit {
    Scenario scenario = Scenario::us;
    int class_count = 0;

    Mat x_all;                       // training-visible rows, source first
    std::vector<Domain> domain_tags; // per x_all row
    std::vector<int> labels_all;     // per x_all row; -1 where hidden/absent

    Mat x_labeled;                   // rows the classifier may train on
    Mat y_labeled;                   // N_l x C in {-1,+1}
    std::vector<int> labels_labeled; // class ids aligned with x_labeled
    std::vector<Domain> domains_labeled;

    Mat test_x;                      // held-out target rows
    std::vector<int> test_labels;    // ground truth; -1 where unknown

    std::vector<std::size_t> test_rows;           // indices into the target dataset
    std::vector<std::size_t> labeled_target_rows; // indices into the target dataset
};

/// Dense format: d comma-separated feature columns, then integer label
/// (-1 = unlabeled), then a domain token. Lines starting with '#' and blank
/// lines are skipped.
Dataset load_dense(const std::string& path);

/// Sparse format: one row per line, `label domain idx:val idx:val ...` with
/// zero-based indices; width is 1 + max index unless `dim_override` > 0.
Dataset load_sparse(const std::string& path, std::size_t dim_override = 0);

/// Dense writer; features serialized with 17 significant digits so a reload
/// is bit-exact.
void save_dense(const Dataset& ds, const std::string& path);

/// Samples `labeled_per_class` labeled target rows per class (SUP/SS),
/// assembles the training-visible matrices and the held-out test rows.
ScenarioSplit build_scenario(const Dataset& source, const Dataset& target, Scenario scenario,
                             std::size_t labeled_per_class, std::uint64_t seed);

/// N x C matrix of -1 with +1 at each row's class.
Mat make_label_matrix(std::span<const int> labels, int class_count);

struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> scale;  // 1 for features with variance below 1e-12
};

FeatureStats feature_stats(const Mat& stats_from);
Mat standardize(const FeatureStats& stats, const Mat& apply_to);
/// Convenience: stats from the first argument applied to the second.
Mat standardize(const Mat& stats_from, const Mat& apply_to);

/// Appends a constant 1.0 column.
Mat append_bias_column(const Mat& x);

/// Isotropic Gaussian class blobs; the target distribution is the source one
/// rotated by `rotation_angle` in a random 2-plane and translated by a random
/// vector of norm `shift_magnitude`. Deterministic given the seed.
std::pair<Dataset, Dataset> synth_shift(std::uint64_t seed, std::size_t d, int class_count,
                                        std::size_t n_per_class, double shift_magnitude,
                                        double rotation_angle);

} // namespace meda::data
