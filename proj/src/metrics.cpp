#include "rsodc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace rsodc {

namespace {

double choose2(double m) { return 0.5 * m * (m - 1.0); }

void check_labels(const Partition& labels, Index n, const char* who)
{
    if (static_cast<Index>(labels.size()) != n)
        throw DimensionError(std::string(who) + ": label count differs from the number of rows");
    for (int l : labels)
        if (l < 1) throw ParameterError(std::string(who) + ": labels must be positive");
}

/// Group index per subject (0-based, dense) and group sizes.
std::pair<std::vector<int>, std::vector<double>> dense_groups(const Partition& labels)
{
    const Partition canon = canonicalize(labels);
    const int k = canon.empty() ? 0 : *std::max_element(canon.begin(), canon.end());
    std::vector<int> group(canon.size());
    std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < canon.size(); ++i) {
        group[i] = canon[i] - 1;
        sizes[static_cast<std::size_t>(group[i])] += 1.0;
    }
    return {group, sizes};
}

}  // namespace

Partition canonicalize(const Partition& labels)
{
    std::map<int, int> remap;
    Partition out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = remap.emplace(labels[i], static_cast<int>(remap.size()) + 1);
        out[i] = it->second;
    }
    return out;
}

double adjusted_rand_index(const Partition& a, const Partition& b)
{
    if (a.size() != b.size()) throw DimensionError("adjusted_rand_index: partitions differ in length");
    if (a.size() < 2) throw DimensionError("adjusted_rand_index: need at least two subjects");
    const Partition ca = canonicalize(a);
    const Partition cb = canonicalize(b);
    const int ka = *std::max_element(ca.begin(), ca.end());
    const int kb = *std::max_element(cb.begin(), cb.end());
    Matrix table = Matrix::Zero(ka, kb);
    for (std::size_t i = 0; i < ca.size(); ++i) table(ca[i] - 1, cb[i] - 1) += 1.0;

    double index = 0.0;
    for (Index r = 0; r < ka; ++r)
        for (Index c = 0; c < kb; ++c) index += choose2(table(r, c));
    double rows = 0.0, cols = 0.0;
    for (Index r = 0; r < ka; ++r) rows += choose2(table.row(r).sum());
    for (Index c = 0; c < kb; ++c) cols += choose2(table.col(c).sum());
    const double expected = rows * cols / choose2(static_cast<double>(a.size()));
    const double max_index = 0.5 * (rows + cols);
    // Both partitions trivial in the same way: identical, so perfect agreement.
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

VarianceRatio variance_ratio(const Matrix& points, const Partition& labels)
{
    check_labels(labels, points.rows(), "variance_ratio");
    auto [group, sizes] = dense_groups(labels);
    const Index k = static_cast<Index>(sizes.size());
    if (k < 2) throw ParameterError("variance_ratio: need at least two clusters");

    Matrix means = Matrix::Zero(k, points.cols());
    for (Index i = 0; i < points.rows(); ++i) means.row(group[static_cast<std::size_t>(i)]) += points.row(i);
    for (Index c = 0; c < k; ++c) means.row(c) /= sizes[static_cast<std::size_t>(c)];
    const Eigen::RowVectorXd grand = points.colwise().mean();

    VarianceRatio out;
    for (Index c = 0; c < k; ++c) out.between += sizes[static_cast<std::size_t>(c)] * (means.row(c) - grand).squaredNorm();
    for (Index i = 0; i < points.rows(); ++i)
        out.within += (points.row(i) - means.row(group[static_cast<std::size_t>(i)])).squaredNorm();
    if (out.within == 0.0) {
        out.value = std::numeric_limits<double>::infinity();
        out.diagnostic = "within-cluster scatter is zero";
    } else {
        out.value = out.between / out.within;
    }
    return out;
}

SelectionAccuracy sensitivity_specificity(const Matrix& b, const std::vector<int>& informative, int k)
{
    if (informative.empty()) throw ParameterError("sensitivity_specificity: informative set is empty");
    if (k < 2 || b.cols() != k - 1) throw DimensionError("sensitivity_specificity: B must have k - 1 columns");
    std::set<int> info;
    for (int j : informative) {
        if (j < 1 || j > b.rows()) throw ParameterError("sensitivity_specificity: informative index out of range");
        info.insert(j);
    }
    const double d = static_cast<double>(k - 1);
    double hits = 0.0, zeros = 0.0;
    for (Index j = 0; j < b.rows(); ++j) {
        const bool is_info = info.count(static_cast<int>(j) + 1) > 0;
        for (Index c = 0; c < b.cols(); ++c) {
            const bool nonzero = std::abs(b(j, c)) > kZeroThreshold;
            if (is_info && nonzero) hits += 1.0;
            if (!is_info && !nonzero) zeros += 1.0;
        }
    }
    SelectionAccuracy out;
    out.sensitivity = hits / (static_cast<double>(info.size()) * d);
    const double rest = static_cast<double>(b.rows()) - static_cast<double>(info.size());
    out.specificity = rest > 0 ? zeros / (rest * d) : 1.0;
    return out;
}

Vector anova_f_scores(const Matrix& x, const Partition& labels)
{
    check_labels(labels, x.rows(), "anova_f_scores");
    auto [group, sizes] = dense_groups(labels);
    const Index k = static_cast<Index>(sizes.size());
    const Index n = x.rows();
    if (k < 2) throw ParameterError("anova_f_scores: need at least two groups");
    if (n <= k) throw ParameterError("anova_f_scores: need more subjects than groups");

    Matrix means = Matrix::Zero(k, x.cols());
    for (Index i = 0; i < n; ++i) means.row(group[static_cast<std::size_t>(i)]) += x.row(i);
    for (Index c = 0; c < k; ++c) means.row(c) /= sizes[static_cast<std::size_t>(c)];
    const Eigen::RowVectorXd grand = x.colwise().mean();

    Vector between = Vector::Zero(x.cols());
    Vector within = Vector::Zero(x.cols());
    for (Index c = 0; c < k; ++c)
        between += sizes[static_cast<std::size_t>(c)] * (means.row(c) - grand).array().square().matrix().transpose();
    for (Index i = 0; i < n; ++i)
        within += (x.row(i) - means.row(group[static_cast<std::size_t>(i)])).array().square().matrix().transpose();

    Vector f(x.cols());
    const double df_between = static_cast<double>(k - 1);
    const double df_within = static_cast<double>(n - k);
    for (Index j = 0; j < x.cols(); ++j) {
        if (within(j) == 0.0 && between(j) == 0.0)
            f(j) = 0.0;  // constant column carries no signal
        else if (within(j) == 0.0)
            f(j) = std::numeric_limits<double>::infinity();
        else
            f(j) = (between(j) / df_between) / (within(j) / df_within);
    }
    return f;
}

std::vector<Index> rank_by_f(const Vector& scores)
{
    std::vector<Index> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(a) > scores(b); });
    return order;
}

}  // namespace rsodc
