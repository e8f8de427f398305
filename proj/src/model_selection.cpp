#include "rsodc/model_selection.hpp"

#include "rsodc/metrics.hpp"
#include "rsodc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rsodc {

std::vector<ParamCombo> ParamGrid::combos() const
{
    std::vector<double> e = eta1_candidates, g = gamma_candidates, r = rho_candidates;
    std::sort(e.begin(), e.end());
    std::sort(g.begin(), g.end());
    std::sort(r.begin(), r.end());
    std::vector<ParamCombo> out;
    for (double eta1 : e)
        for (double gamma : g)
            for (double rho : r)
                if (gamma < rho) out.push_back({eta1, gamma, rho});
    return out;
}

ParamGrid ParamGrid::paper_default()
{
    ParamGrid grid;
    grid.eta1_candidates = {0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    grid.gamma_candidates = {0.001, 0.003, 0.005, 0.007, 0.01};
    grid.rho_candidates = {0.01, 0.03, 0.05, 0.07, 0.1};
    grid.repeats = kRepeatsDefault;
    return grid;
}

std::vector<int> selection_indicator(const Matrix& b)
{
    std::vector<int> out(static_cast<std::size_t>(b.rows()), 0);
    for (Index j = 0; j < b.rows(); ++j)
        if (b.cols() > 0 && b.row(j).cwiseAbs().maxCoeff() > kZeroThreshold) out[static_cast<std::size_t>(j)] = 1;
    return out;
}

double kappa(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size()) throw DimensionError("kappa: vectors differ in length");
    if (a.empty()) throw DimensionError("kappa: empty vectors");
    const double n = static_cast<double>(a.size());
    double agree = 0.0, ones_a = 0.0, ones_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] != 0) == (b[i] != 0)) agree += 1.0;
        ones_a += a[i] != 0;
        ones_b += b[i] != 0;
    }
    const bool both_empty = ones_a == 0.0 && ones_b == 0.0;
    const bool both_full = ones_a == n && ones_b == n;
    if (both_empty || both_full) return -1.0;
    const double po = agree / n;
    const double pa = ones_a / n, pb = ones_b / n;
    const double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (pe >= 1.0) return 0.0;
    return (po - pe) / (1.0 - pe);
}

StabilityResult stability_cv(const Matrix& x, int k, const ParamGrid& grid, const StabilityOptions& options,
                             std::uint64_t seed)
{
    const Index n = x.rows();
    if (n < 4) throw DimensionError("stability_cv: need at least 4 subjects");
    if (grid.repeats < 1) throw ParameterError("stability_cv: repeats must be positive");
    const std::vector<ParamCombo> combos = grid.combos();
    if (combos.empty()) throw ParameterError("stability_cv: grid has no combination with gamma < rho");
    require_finite(x, "stability_cv input");

    // Splits are shared by every combo so the comparison is paired.
    const Index half = n / 2;
    std::vector<std::vector<Index>> splits(static_cast<std::size_t>(grid.repeats));
    for (int r = 0; r < grid.repeats; ++r) {
        std::vector<Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Index{0});
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        std::shuffle(perm.begin(), perm.end(), rng);
        splits[static_cast<std::size_t>(r)] = std::move(perm);
    }
    auto subset = [&](const std::vector<Index>& perm, Index from, Index count) {
        Matrix out(count, x.cols());
        for (Index i = 0; i < count; ++i) out.row(i) = x.row(perm[static_cast<std::size_t>(from + i)]);
        return out;
    };

    const std::size_t items = combos.size() * static_cast<std::size_t>(grid.repeats);
    std::vector<double> kappas(items, -1.0);
    std::vector<std::string> notes(items);
    parallel_for(items, options.threads, [&](std::size_t item) {
        const ParamCombo& combo = combos[item / static_cast<std::size_t>(grid.repeats)];
        const int r = static_cast<int>(item % static_cast<std::size_t>(grid.repeats));
        const auto& perm = splits[static_cast<std::size_t>(r)];
        std::vector<int> indicators[2];
        try {
            for (int h = 0; h < 2; ++h) {
                const Matrix part = h == 0 ? subset(perm, 0, half) : subset(perm, half, n - half);
                ProblemInstance inst{part, options.base};
                inst.params.k = k;
                inst.params.eta1 = combo.eta1;
                inst.params.gamma = combo.gamma;
                inst.params.rho = combo.rho;
                const int delta = std::min<int>(options.delta, static_cast<int>(part.rows()) - 1);
                const FusionGraph graph = build_fusion_graph(part, options.tau, delta, combo.rho);
                const FitResult fit =
                    fit_rsodc(inst, graph, derive_seed(seed, 1000 + 2 * static_cast<std::uint64_t>(r) + h));
                indicators[h] = selection_indicator(fit.B_hat);
            }
            kappas[item] = kappa(indicators[0], indicators[1]);
        } catch (const std::exception& e) {
            kappas[item] = -1.0;
            notes[item] = "split " + std::to_string(r + 1) + " failed for eta1=" + std::to_string(combo.eta1) +
                          " gamma=" + std::to_string(combo.gamma) + " rho=" + std::to_string(combo.rho) + ": " +
                          e.what();
        }
    });

    StabilityResult result;
    for (std::size_t c = 0; c < combos.size(); ++c) {
        KappaRow row;
        row.combo = combos[c];
        auto first = kappas.begin() + static_cast<std::ptrdiff_t>(c * static_cast<std::size_t>(grid.repeats));
        row.kappas.assign(first, first + grid.repeats);
        row.mean = std::accumulate(row.kappas.begin(), row.kappas.end(), 0.0) / grid.repeats;
        result.table.push_back(std::move(row));
    }
    for (auto& note : notes)
        if (!note.empty()) result.diagnostics.push_back(std::move(note));

    // Combos are already ordered by (eta1, gamma, rho), so a strict comparison keeps the parsimonious tie.
    std::size_t best = 0;
    for (std::size_t c = 1; c < result.table.size(); ++c)
        if (result.table[c].mean > result.table[best].mean) best = c;
    result.best = result.table[best].combo;
    return result;
}

std::string to_string(GapReference ref)
{
    return ref == GapReference::bounding_box ? "box" : "pca";
}

GapReference parse_gap_reference(const std::string& name)
{
    if (name == "box") return GapReference::bounding_box;
    if (name == "pca") return GapReference::pca_box;
    throw ParameterError("unknown gap reference '" + name + "' (expected box or pca)");
}

namespace {

double log_dispersion(const Matrix& points, int k, int restarts, std::uint64_t seed)
{
    const double w = kmeans(points, k, restarts, seed).centroids.inertia;
    return std::log(std::max(w, kDispersionFloor));
}

Matrix uniform_box(const Matrix& lo_hi_frame, Index rows, Rng& rng)
{
    // lo_hi_frame: 2 x d with row 0 = lower and row 1 = upper bounds.
    Matrix out(rows, lo_hi_frame.cols());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index i = 0; i < rows; ++i)
        for (Index c = 0; c < out.cols(); ++c)
            out(i, c) = lo_hi_frame(0, c) + unif(rng) * (lo_hi_frame(1, c) - lo_hi_frame(0, c));
    return out;
}

}  // namespace

GapCurve gap_statistic(const Matrix& points, const std::vector<int>& k_range, const GapOptions& options,
                       std::uint64_t seed)
{
    if (k_range.empty()) throw ParameterError("gap_statistic: empty k range");
    if (options.mc_samples < 2) throw ParameterError("gap_statistic: need at least two reference samples");
    for (int k : k_range)
        if (k < 1 || k > points.rows() - 1) throw ParameterError("gap_statistic: k must lie in [1, n - 1]");
    require_finite(points, "gap_statistic input");

    // Reference frame: raw coordinates, or the principal axes of the centered points.
    Matrix frame = points;
    Matrix rotation;
    Eigen::RowVectorXd shift = Eigen::RowVectorXd::Zero(points.cols());
    if (options.reference == GapReference::pca_box) {
        shift = points.colwise().mean();
        Eigen::JacobiSVD<Matrix> svd(points.rowwise() - shift, Eigen::ComputeThinV);
        rotation = svd.matrixV();
        frame = (points.rowwise() - shift) * rotation;
    }
    Matrix bounds(2, frame.cols());
    bounds.row(0) = frame.colwise().minCoeff();
    bounds.row(1) = frame.colwise().maxCoeff();

    GapCurve curve;
    curve.k_candidates = k_range;
    const std::size_t nk = k_range.size();
    curve.log_w.resize(nk);
    for (std::size_t i = 0; i < nk; ++i)
        curve.log_w[i] = log_dispersion(points, k_range[i], options.restarts, derive_seed(seed, 7 + i));

    const auto draws = static_cast<std::size_t>(options.mc_samples);
    std::vector<double> ref(draws * nk);
    parallel_for(draws, options.threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, 100000 + b));
        Matrix sample = uniform_box(bounds, points.rows(), rng);
        if (options.reference == GapReference::pca_box) sample = (sample * rotation.transpose()).rowwise() + shift;
        for (std::size_t i = 0; i < nk; ++i)
            ref[b * nk + i] = log_dispersion(sample, k_range[i], options.restarts, derive_seed(seed, 200000 + b * nk + i));
    });

    curve.gap.resize(nk);
    curve.se.resize(nk);
    for (std::size_t i = 0; i < nk; ++i) {
        double mean = 0.0;
        for (std::size_t b = 0; b < draws; ++b) mean += ref[b * nk + i];
        mean /= static_cast<double>(draws);
        double var = 0.0;
        for (std::size_t b = 0; b < draws; ++b) var += (ref[b * nk + i] - mean) * (ref[b * nk + i] - mean);
        var /= static_cast<double>(draws);
        curve.gap[i] = mean - curve.log_w[i];
        curve.se[i] = std::sqrt(var) * std::sqrt(1.0 + 1.0 / static_cast<double>(draws));
    }
    curve.chosen_k = choose_k_one_se(curve.k_candidates, curve.gap, curve.se);
    return curve;
}

int choose_k_one_se(const std::vector<int>& k_candidates, const std::vector<double>& gap,
                    const std::vector<double>& se)
{
    if (k_candidates.empty() || gap.size() != k_candidates.size() || se.size() != k_candidates.size())
        throw DimensionError("choose_k_one_se: k, gap and se must align and be non-empty");
    for (std::size_t i = 0; i + 1 < gap.size(); ++i)
        if (gap[i] >= gap[i + 1] - se[i + 1]) return k_candidates[i];
    const auto best = std::max_element(gap.begin(), gap.end()) - gap.begin();
    return k_candidates[static_cast<std::size_t>(best)];
}

GapSelection select_k_by_gap(const Matrix& x, const std::vector<int>& k_range, const GapSelectionOptions& options,
                             std::uint64_t seed)
{
    if (k_range.empty()) throw ParameterError("select_k_by_gap: empty k range");
    std::vector<int> ks = k_range;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    if (ks.front() < 2) throw ParameterError("select_k_by_gap: candidates must be at least 2");

    const Matrix xc = center_columns(x);
    const std::size_t nk = ks.size();
    std::vector<std::optional<FitResult>> fits(nk);
    std::vector<double> gap(nk, 0.0), se(nk, 0.0);
    std::vector<std::string> notes(nk);
    GapOptions inner = options.gap;
    inner.threads = 1;

    parallel_for(nk, options.gap.threads, [&](std::size_t i) {
        const int k = ks[i];
        try {
            ProblemInstance inst{x, options.base};
            inst.params.k = k;
            const FusionGraph graph = build_fusion_graph(xc, options.tau, options.delta, inst.params.rho);
            FitResult fit = fit_rsodc(inst, graph, derive_seed(seed, static_cast<std::uint64_t>(k)));
            const GapCurve curve =
                gap_statistic(fit.embedding, {k}, inner, derive_seed(seed, 1000 + static_cast<std::uint64_t>(k)));
            gap[i] = curve.gap.front();
            se[i] = curve.se.front();
            fits[i] = std::move(fit);
        } catch (const std::exception& e) {
            notes[i] = "k = " + std::to_string(k) + " excluded: " + e.what();
        }
    });

    GapSelection out;
    for (std::size_t i = 0; i < nk; ++i) {
        if (!fits[i]) {
            out.diagnostics.push_back(notes[i]);
            continue;
        }
        out.k_candidates.push_back(ks[i]);
        out.gap.push_back(gap[i]);
        out.se.push_back(se[i]);
        out.fits.push_back(std::move(*fits[i]));
    }
    if (out.k_candidates.empty()) throw NumericError("select_k_by_gap: every candidate k failed");
    out.chosen_k = choose_k_one_se(out.k_candidates, out.gap, out.se);
    return out;
}

}  // namespace rsodc
