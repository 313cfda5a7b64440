#pragma once

#include <span>
#include <vector>

#include "mat.hpp"

namespace meda::classify {

/// Row-wise argmax of x * z scores; ties go to the lowest class index. A
/// single-column z is treated as a binary +/- score (class 1 iff positive).
std::vector<int> predict_linear(const Mat& x, const Mat& z);

/// Label of the Euclidean-nearest training row; distance ties go to the
/// lowest training index.
std::vector<int> nn_classify(const Mat& train_x, std::span<const int> train_labels, const Mat& test_x);

/// Domain-specific class means: score(c|x) sums exp(-||x - mu_{c,dom}||^2 /
/// (2 sigma^2)) over the domains where class c occurs; argmax with
/// lowest-index ties.
std::vector<int> dscm_classify(const Mat& train_x, std::span<const int> train_labels,
                               std::span<const int> train_domains, int class_count, const Mat& test_x,
                               double sigma);

/// Fraction of matching entries.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

} // namespace meda::classify
