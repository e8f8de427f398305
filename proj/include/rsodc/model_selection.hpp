#ifndef RSODC_MODEL_SELECTION_HPP
#define RSODC_MODEL_SELECTION_HPP

#include "rsodc/core.hpp"
#include "rsodc/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rsodc {

struct ParamCombo {
    double eta1 = 0.0;
    double gamma = 0.0;
    double rho = 0.0;
    bool operator==(const ParamCombo&) const = default;
};

inline constexpr int kRepeatsDefault = 10;

struct ParamGrid {
    std::vector<double> eta1_candidates;
    std::vector<double> gamma_candidates;
    std::vector<double> rho_candidates;
    int repeats = kRepeatsDefault;

    /// Cross product restricted to gamma < rho, ordered by (eta1, gamma, rho).
    std::vector<ParamCombo> combos() const;

    /// eta1 in {0.1, 0.5, 1, 1.5, 2, 2.5, 3}, gamma in {0.001, ..., 0.01}, rho in {0.01, ..., 0.1}.
    static ParamGrid paper_default();
};

/// 1 where row j of B has an entry above kZeroThreshold in magnitude.
std::vector<int> selection_indicator(const Matrix& b);

/**
 * Cohen's kappa of two binary vectors. Both all-zero or both all-one gives -1;
 * any other case with chance agreement 1 gives 0.
 */
double kappa(const std::vector<int>& a, const std::vector<int>& b);

struct KappaRow {
    ParamCombo combo;
    std::vector<double> kappas;  // one per repeat
    double mean = 0.0;
};

struct StabilityOptions {
    /// Everything except eta1, gamma and rho, which come from the grid.
    SolverParams base;
    double tau = kTauDefault;
    int delta = kDeltaDefault;
    unsigned threads = 1;
};

struct StabilityResult {
    ParamCombo best;
    std::vector<KappaRow> table;
    std::vector<std::string> diagnostics;
};

/// Splits rows in half `repeats` times, fits both halves per combo and keeps the
/// combo with the largest mean kappa between the two selection indicators.
StabilityResult stability_cv(const Matrix& x, int k, const ParamGrid& grid, const StabilityOptions& options,
                             std::uint64_t seed);

enum class GapReference { bounding_box, pca_box };
std::string to_string(GapReference ref);
GapReference parse_gap_reference(const std::string& name);

inline constexpr int kMcSamplesDefault = 100;
inline constexpr double kDispersionFloor = 1e-12;

struct GapCurve {
    std::vector<int> k_candidates;
    std::vector<double> gap;
    std::vector<double> se;
    std::vector<double> log_w;
    int chosen_k = 0;
};

struct GapOptions {
    int mc_samples = kMcSamplesDefault;
    GapReference reference = GapReference::bounding_box;
    int restarts = kKMeansRestartsDefault;
    unsigned threads = 1;
};

/// Gap curve over k_range with uniform reference draws; chosen_k by choose_k_one_se.
GapCurve gap_statistic(const Matrix& points, const std::vector<int>& k_range, const GapOptions& options,
                       std::uint64_t seed);

/// Smallest k with gap(k) >= gap(k+1) - se(k+1); argmax of gap when none qualifies.
int choose_k_one_se(const std::vector<int>& k_candidates, const std::vector<double>& gap,
                    const std::vector<double>& se);

struct GapSelection {
    int chosen_k = 0;
    std::vector<int> k_candidates;
    std::vector<double> gap;
    std::vector<double> se;
    std::vector<FitResult> fits;
    std::vector<std::string> diagnostics;
};

struct GapSelectionOptions {
    SolverParams base;  // k is overwritten per candidate
    double tau = kTauDefault;
    int delta = kDeltaDefault;
    GapOptions gap;
};

/// Fits RSODC at every candidate k and evaluates gap(k) on that fit's embedding.
GapSelection select_k_by_gap(const Matrix& x, const std::vector<int>& k_range, const GapSelectionOptions& options,
                             std::uint64_t seed);

}  // namespace rsodc

#endif
