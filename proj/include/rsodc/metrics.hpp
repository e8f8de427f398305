#ifndef RSODC_METRICS_HPP
#define RSODC_METRICS_HPP

#include "rsodc/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rsodc {

/// Entries or rows with magnitude at or below this count as zero.
inline constexpr double kZeroThreshold = 1e-12;

/// Relabels to 1..k_found in order of first appearance.
Partition canonicalize(const Partition& labels);

/// Hubert-Arabie adjusted Rand index. Two partitions that are both a single
/// cluster (or both all singletons) score 1.
double adjusted_rand_index(const Partition& a, const Partition& b);

struct VarianceRatio {
    double value = 0.0;
    double between = 0.0;
    double within = 0.0;
    std::string diagnostic;
};

/// trace(between scatter) / trace(within scatter); +inf when the within trace is 0.
VarianceRatio variance_ratio(const Matrix& points, const Partition& labels);

struct SelectionAccuracy {
    double sensitivity = 0.0;
    double specificity = 0.0;
};

/// `informative` holds 1-based row indices of B. Entry-wise counts over k - 1 columns.
SelectionAccuracy sensitivity_specificity(const Matrix& b, const std::vector<int>& informative, int k);

/// One-way ANOVA F per column of X; +inf when the within-group sum of squares is 0.
Vector anova_f_scores(const Matrix& x, const Partition& labels);

/// Column indices (0-based) sorted by F descending, ties by index.
std::vector<Index> rank_by_f(const Vector& scores);

}  // namespace rsodc

#endif
