#include "rsodc/cli/commands.hpp"

#include "common.hpp"
#include "rsodc/metrics.hpp"
#include "rsodc/model_selection.hpp"
#include "rsodc/parallel.hpp"
#include "rsodc/solver.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace rsodc::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

void CommonOptions::resolve()
{
    params.v_mode = parse_v_mode(v_mode);
    if (threads == 0) threads = default_thread_count();
}

Json config_json(const CommonOptions& o)
{
    const SolverParams& p = o.params;
    Json c;
    c["k"] = p.k;
    c["eta1"] = p.eta1;
    c["eta2"] = p.eta2;
    c["gamma"] = p.gamma;
    c["rho"] = p.rho;
    c["nu"] = p.nu;
    c["tau"] = o.tau;
    c["delta"] = o.delta;
    c["epsilon"] = p.epsilon;
    c["max_outer"] = p.max_outer;
    c["max_inner"] = p.max_inner;
    c["max_b_sweeps"] = p.max_b_sweeps;
    c["kmeans_restarts"] = p.kmeans_restarts;
    c["v_mode"] = to_string(p.v_mode);
    c["b_init"] = p.b_init == BInit::gaussian ? "gaussian" : "zero";
    c["threads"] = o.threads;
    return c;
}

Json manifest(const std::string& command, const CommonOptions& options, const Json& inputs,
              const std::vector<fs::path>& outputs, Clock::time_point start)
{
    Json m;
    m["command"] = command;
    m["tool_version"] = kToolVersion;
    m["seed"] = options.seed;
    m["config"] = config_json(options);
    m["inputs"] = inputs;
    Json outs = Json::array();
    for (const auto& p : outputs) outs.push_back(p.filename().string());
    m["outputs"] = outs;
    m["timings"] = {{"wall_seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
    return m;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag)
{
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        try {
            out.push_back(std::stod(item, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0) throw ParameterError(flag + ": '" + item + "' is not a number");
    }
    if (out.empty()) throw ParameterError(flag + ": empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag)
{
    std::vector<int> out;
    for (double v : parse_double_list(text, flag)) {
        if (v != static_cast<double>(static_cast<int>(v))) throw ParameterError(flag + ": expected integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
    return out;
}

fs::path prepare_out_dir(const std::string& out)
{
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory " + out + ": " + ec.message());
    return dir;
}

namespace {

Matrix load_data(const std::string& path, bool no_header)
{
    CsvTable table = read_csv(path, !no_header);
    return std::move(table.values);
}

std::vector<std::string> component_header(Index d, bool with_label)
{
    std::vector<std::string> header;
    for (Index c = 0; c < d; ++c) header.push_back("component_" + std::to_string(c + 1));
    if (with_label) header.push_back("label");
    return header;
}

Json fit_to_json(const FitResult& fit, const ObjectiveTerms& terms, const FusionGraph& graph)
{
    Json j;
    j["method"] = fit.method;
    j["converged"] = fit.converged;
    j["status"] = to_string(fit.status);
    j["outer_iters"] = fit.outer_iters;
    j["inner_iters"] = fit.inner_iters;
    j["convergence_count"] = fit.convergence_count();
    j["b_sweeps"] = fit.b_sweeps;
    j["initial_objective"] = number_to_json(fit.initial_objective);
    Json trace = Json::array();
    for (double v : fit.objective_trace) trace.push_back(number_to_json(v));
    j["objective_trace"] = trace;
    j["objective_terms"] = {{"fit", terms.fit},
                            {"ridge", terms.ridge},
                            {"group", terms.group},
                            {"fusion", terms.fusion},
                            {"total", terms.total()}};
    j["labels"] = fit.labels;
    Json active = Json::array();
    for (Index r = 0; r < fit.B_hat.rows(); ++r)
        if (fit.B_hat.row(r).cwiseAbs().maxCoeff() > kZeroThreshold) active.push_back(r + 1);
    j["active_variables"] = active;
    j["B_hat"] = matrix_to_json(fit.B_hat);
    j["Y_hat"] = matrix_to_json(fit.Y_hat);
    j["embedding"] = matrix_to_json(fit.embedding);
    j["centroids"] = matrix_to_json(fit.centroids.centroids);
    j["kmeans_inertia"] = fit.centroids.inertia;
    j["graph"] = {{"edges", graph.edge_count()}, {"omega", graph.omega}};
    j["diagnostics"] = fit.diagnostics;
    j["timings"] = {{"b_update", fit.timings.b_update},
                    {"y_update", fit.timings.y_update},
                    {"kmeans", fit.timings.kmeans},
                    {"total", fit.timings.total}};
    return j;
}

int cmd_fit(CommonOptions o, const std::string& input)
{
    const auto start = Clock::now();
    const Matrix x = load_data(input, o.no_header);
    ProblemInstance inst{x, o.params};
    inst.validate();
    const Matrix xc = center_columns(x);
    const bool sodc = o.params.gamma == 0.0;
    const FusionGraph graph = sodc ? empty_graph(x.rows(), o.params.rho > 0 ? o.params.rho : 1.0)
                                   : build_fusion_graph(xc, o.tau, o.delta, o.params.rho);
    const FitResult fit = sodc ? fit_sodc(inst, o.seed) : fit_rsodc(inst, graph, o.seed);
    const ObjectiveTerms terms = objective_terms(xc, o.params, fit.B_hat, fit.Y_hat, graph);

    const fs::path dir = prepare_out_dir(o.out);
    const fs::path fit_path = dir / "fit.json", emb_path = dir / "embedding.csv";
    const fs::path emb_svg = dir / "embedding.svg", score_svg = dir / "scoring.svg";

    std::vector<std::vector<std::string>> rows;
    for (Index i = 0; i < fit.embedding.rows(); ++i) {
        std::vector<std::string> row;
        for (Index c = 0; c < fit.embedding.cols(); ++c) row.push_back(format_double(fit.embedding(i, c)));
        row.push_back(std::to_string(fit.labels[static_cast<std::size_t>(i)]));
        rows.push_back(std::move(row));
    }
    write_csv(emb_path, component_header(fit.embedding.cols(), true), rows);
    write_text(emb_svg, svg_scatter(fit.embedding, fit.labels, "X B (" + fit.method + ")"));
    write_text(score_svg, svg_scatter(fit.Y_hat, fit.labels, "Y (" + fit.method + ")"));

    Json j = fit_to_json(fit, terms, graph);
    j["manifest"] = manifest("fit", o, {{"data", input}}, {fit_path, emb_path, emb_svg, score_svg}, start);
    write_json(fit_path, j);
    std::cout << fit.method << ": " << to_string(fit.status) << " after " << fit.outer_iters
              << " outer iterations, objective " << format_double(terms.total()) << "\n";
    return kExitOk;
}

int cmd_tune(CommonOptions o, const std::string& input, const std::string& eta1_grid, const std::string& gamma_grid,
             const std::string& rho_grid, int repeats)
{
    const auto start = Clock::now();
    const Matrix x = load_data(input, o.no_header);
    ParamGrid grid = ParamGrid::paper_default();
    if (!eta1_grid.empty()) grid.eta1_candidates = parse_double_list(eta1_grid, "--eta1-grid");
    if (!gamma_grid.empty()) grid.gamma_candidates = parse_double_list(gamma_grid, "--gamma-grid");
    if (!rho_grid.empty()) grid.rho_candidates = parse_double_list(rho_grid, "--rho-grid");
    grid.repeats = repeats;
    ProblemInstance{x, o.params}.validate();

    StabilityOptions so;
    so.base = o.params;
    so.tau = o.tau;
    so.delta = o.delta;
    so.threads = o.threads;
    const StabilityResult result = stability_cv(x, o.params.k, grid, so, o.seed);

    const fs::path dir = prepare_out_dir(o.out);
    const fs::path table_path = dir / "cv_table.csv", best_path = dir / "best_params.json";
    std::vector<std::string> header = {"eta1", "gamma", "rho", "mean_kappa"};
    for (int r = 0; r < grid.repeats; ++r) header.push_back("kappa_" + std::to_string(r + 1));
    std::vector<std::vector<std::string>> rows;
    double best_mean = 0.0;
    for (const auto& row : result.table) {
        std::vector<std::string> fields = {format_double(row.combo.eta1), format_double(row.combo.gamma),
                                           format_double(row.combo.rho), format_double(row.mean)};
        for (double k : row.kappas) fields.push_back(format_double(k));
        rows.push_back(std::move(fields));
        if (row.combo == result.best) best_mean = row.mean;
    }
    write_csv(table_path, header, rows);

    Json j;
    j["best"] = {{"eta1", result.best.eta1}, {"gamma", result.best.gamma}, {"rho", result.best.rho}};
    j["mean_kappa"] = best_mean;
    j["combos"] = result.table.size();
    j["repeats"] = grid.repeats;
    j["grid"] = {{"eta1", grid.eta1_candidates}, {"gamma", grid.gamma_candidates}, {"rho", grid.rho_candidates}};
    j["diagnostics"] = result.diagnostics;
    j["manifest"] = manifest("tune", o, {{"data", input}}, {table_path, best_path}, start);
    write_json(best_path, j);
    std::cout << "best eta1=" << result.best.eta1 << " gamma=" << result.best.gamma << " rho=" << result.best.rho
              << " (mean kappa " << best_mean << ")\n";
    return kExitOk;
}

int cmd_select_k(CommonOptions o, const std::string& input, int k_min, int k_max, int mc_samples,
                 const std::string& reference)
{
    const auto start = Clock::now();
    const Matrix x = load_data(input, o.no_header);
    if (k_min < 2 || k_max < k_min) throw ParameterError("select-k: need 2 <= k-min <= k-max");
    if (k_max > x.rows() - 1) throw ParameterError("select-k: k-max must not exceed n - 1");
    std::vector<int> ks;
    for (int k = k_min; k <= k_max; ++k) ks.push_back(k);

    GapSelectionOptions go;
    go.base = o.params;
    go.tau = o.tau;
    go.delta = o.delta;
    go.gap.mc_samples = mc_samples;
    go.gap.reference = parse_gap_reference(reference);
    go.gap.restarts = o.params.kmeans_restarts;
    go.gap.threads = o.threads;
    const GapSelection sel = select_k_by_gap(x, ks, go, o.seed);

    const fs::path dir = prepare_out_dir(o.out);
    const fs::path curve_path = dir / "gap_curve.csv", chosen_path = dir / "chosen_k.json";
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < sel.k_candidates.size(); ++i)
        rows.push_back({std::to_string(sel.k_candidates[i]), format_double(sel.gap[i]), format_double(sel.se[i])});
    write_csv(curve_path, {"k", "gap", "se"}, rows);

    Json j;
    j["chosen_k"] = sel.chosen_k;
    j["k_candidates"] = sel.k_candidates;
    j["gap"] = sel.gap;
    j["se"] = sel.se;
    Json fits = Json::array();
    for (std::size_t i = 0; i < sel.fits.size(); ++i)
        fits.push_back({{"k", sel.k_candidates[i]},
                        {"status", to_string(sel.fits[i].status)},
                        {"outer_iters", sel.fits[i].outer_iters},
                        {"objective", number_to_json(sel.fits[i].objective_trace.empty()
                                                         ? sel.fits[i].initial_objective
                                                         : sel.fits[i].objective_trace.back())}});
    j["fits"] = fits;
    j["mc_samples"] = mc_samples;
    j["reference"] = reference;
    j["diagnostics"] = sel.diagnostics;
    j["manifest"] = manifest("select-k", o, {{"data", input}}, {curve_path, chosen_path}, start);
    write_json(chosen_path, j);
    std::cout << "chosen k = " << sel.chosen_k << "\n";
    return kExitOk;
}

int cmd_evaluate(CommonOptions o, const std::string& fit_path, const std::string& truth_path,
                 const std::string& informative, const std::string& data_path)
{
    const auto start = Clock::now();
    const Json fit = read_json(fit_path);
    for (const char* key : {"labels", "B_hat", "Y_hat", "embedding"})
        if (!fit.contains(key)) throw InputError(fit_path + ": missing field '" + key + "'");
    const Partition labels = fit["labels"].get<Partition>();
    const Matrix b = json_to_matrix(fit["B_hat"]);
    const Matrix y = json_to_matrix(fit["Y_hat"]);
    const Matrix emb = json_to_matrix(fit["embedding"]);
    const auto n = static_cast<Index>(labels.size());

    const Matrix truth_table = load_data(truth_path, o.no_header);
    if (truth_table.rows() != n)
        throw InputError("truth has " + std::to_string(truth_table.rows()) + " rows but the fit has " +
                         std::to_string(n) + " subjects");
    Partition truth(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const double v = truth_table(i, truth_table.cols() - 1);
        if (v < 1 || v != static_cast<double>(static_cast<int>(v)))
            throw InputError("truth labels must be positive integers (row " + std::to_string(i + 1) + ")");
        truth[static_cast<std::size_t>(i)] = static_cast<int>(v);
    }

    Json j;
    j["ari"] = adjusted_rand_index(labels, truth);
    const Partition canon = canonicalize(labels);
    Json vr;
    if (*std::max_element(canon.begin(), canon.end()) < 2) {
        vr["embedding"] = nullptr;
        vr["scores"] = nullptr;
        vr["diagnostics"] = {"only one cluster was found"};
    } else {
        const VarianceRatio ve = variance_ratio(emb, labels);
        const VarianceRatio vy = variance_ratio(y, labels);
        vr["embedding"] = number_to_json(ve.value);
        vr["scores"] = number_to_json(vy.value);
        std::vector<std::string> notes;
        if (!ve.diagnostic.empty()) notes.push_back("embedding: " + ve.diagnostic);
        if (!vy.diagnostic.empty()) notes.push_back("scores: " + vy.diagnostic);
        vr["diagnostics"] = notes;
    }
    j["variance_ratio"] = vr;

    if (!informative.empty()) {
        const std::vector<int> info = parse_int_list(informative, "--informative");
        const SelectionAccuracy acc = sensitivity_specificity(b, info, static_cast<int>(b.cols()) + 1);
        j["selection"] = {{"informative", info}, {"sensitivity", acc.sensitivity}, {"specificity", acc.specificity}};
    }

    Json f;
    Vector scores;
    if (!data_path.empty()) {
        const Matrix x = load_data(data_path, o.no_header);
        if (x.rows() != n) throw InputError("data rows do not match the fit");
        scores = anova_f_scores(x, labels);
        f["source"] = "data";
    } else {
        scores = anova_f_scores(emb, labels);
        f["source"] = "embedding";
    }
    Json values = Json::array();
    for (Index c = 0; c < scores.size(); ++c) values.push_back(number_to_json(scores(c)));
    f["values"] = values;
    Json ranking = Json::array();
    for (Index c : rank_by_f(scores)) ranking.push_back(c + 1);
    f["ranking"] = ranking;
    j["f_scores"] = f;

    const fs::path dir = prepare_out_dir(o.out);
    const fs::path out_path = dir / "metrics.json";
    Json inputs = {{"fit", fit_path}, {"truth", truth_path}};
    if (!data_path.empty()) inputs["data"] = data_path;
    j["manifest"] = manifest("evaluate", o, inputs, {out_path}, start);
    write_json(out_path, j);
    std::cout << "ARI " << format_double(j["ari"].get<double>()) << "\n";
    return kExitOk;
}

void add_common(CLI::App* sub, CommonOptions& o)
{
    sub->add_option("--k", o.params.k, "number of clusters")->capture_default_str();
    sub->add_option("--eta1", o.params.eta1, "group-lasso weight")->capture_default_str();
    sub->add_option("--eta2", o.params.eta2, "ridge weight")->capture_default_str();
    sub->add_option("--gamma", o.params.gamma, "fusion weight (0 runs SODC)")->capture_default_str();
    sub->add_option("--rho", o.params.rho, "ADMM penalty")->capture_default_str();
    sub->add_option("--nu", o.params.nu, "B step size")->capture_default_str();
    sub->add_option("--tau", o.tau, "kernel bandwidth of the fusion weights")->capture_default_str();
    sub->add_option("--delta", o.delta, "neighbours per subject in the fusion graph")->capture_default_str();
    sub->add_option("--epsilon", o.params.epsilon, "convergence tolerance")->capture_default_str();
    sub->add_option("--max-outer", o.params.max_outer, "outer iteration cap")->capture_default_str();
    sub->add_option("--max-inner", o.params.max_inner, "inner ADMM iteration cap")->capture_default_str();
    sub->add_option("--v-mode", o.v_mode, "V update: exact or paper")
        ->check(CLI::IsMember({"paper", "exact"}))
        ->capture_default_str();
    sub->add_option("--kmeans-restarts", o.params.kmeans_restarts, "k-means restarts")->capture_default_str();
    sub->add_flag("--zero-init", "start B at zero instead of N(0, 1)")->each([&o](const std::string&) {
        o.params.b_init = BInit::zero;
    });
    sub->add_option("--seed", o.seed, "master seed")->capture_default_str();
    sub->add_option("--threads", o.threads, "worker threads (default: RSODC_THREADS or all cores)");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_flag("--no-header", o.no_header, "CSV inputs have no header row");
}

}  // namespace

int run(int argc, char** argv)
{
    CLI::App app{"Regularized sparse optimal discriminant clustering"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOptions opts;
    std::string input;

    auto* fit = app.add_subcommand("fit", "fit RSODC (or SODC when --gamma 0) and cluster the embedding");
    add_common(fit, opts);
    fit->add_option("data", input, "CSV with subjects in rows")->required();

    auto* tune = app.add_subcommand("tune", "choose eta1, gamma, rho by clustering-stability CV");
    add_common(tune, opts);
    tune->add_option("data", input, "CSV with subjects in rows")->required();
    std::string eta1_grid, gamma_grid, rho_grid;
    int repeats = kRepeatsDefault;
    tune->add_option("--eta1-grid", eta1_grid, "comma-separated eta1 candidates");
    tune->add_option("--gamma-grid", gamma_grid, "comma-separated gamma candidates");
    tune->add_option("--rho-grid", rho_grid, "comma-separated rho candidates");
    tune->add_option("--repeats", repeats, "random half splits per combination")->capture_default_str();

    auto* select = app.add_subcommand("select-k", "choose the number of clusters by the gap statistic");
    add_common(select, opts);
    select->add_option("data", input, "CSV with subjects in rows")->required();
    int k_min = 2, k_max = 9, mc_samples = kMcSamplesDefault;
    std::string reference = "box";
    select->add_option("--k-min", k_min, "smallest candidate k")->capture_default_str();
    select->add_option("--k-max", k_max, "largest candidate k")->capture_default_str();
    select->add_option("--mc-samples", mc_samples, "reference draws")->capture_default_str();
    select->add_option("--gap-reference", reference, "box or pca")
        ->check(CLI::IsMember({"box", "pca"}))
        ->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "run a scaled simulation design (1-5)");
    add_common(simulate, opts);
    SimulateOptions sim;
    simulate->add_option("--design", sim.design, "design id 1..5")->check(CLI::Range(1, 5))->capture_default_str();
    simulate->add_option("--replicates", sim.replicates, "replicates per cell")->capture_default_str();
    simulate->add_option("--n", sim.n_list, "subjects (comma list)");
    simulate->add_option("--p", sim.p_list, "variables (comma list)");
    simulate->add_option("--true-k", sim.k_list, "true clusters (comma list)");
    simulate->add_option("--theta", sim.theta_list, "centroid distance (comma list)");
    simulate->add_option("--xi", sim.xi_list, "informative covariance (comma list)");
    simulate->add_option("--eta1-grid", sim.eta1_grid, "eta1 values (design 2)");
    simulate->add_option("--gamma-grid", sim.gamma_grid, "gamma values (design 2)");
    simulate->add_option("--rho-grid", sim.rho_grid, "rho values (design 2)");
    simulate->add_option("--tau-grid", sim.tau_grid, "tau values (design 4)");
    simulate->add_option("--delta-grid", sim.delta_grid, "delta values (design 4)");
    simulate->add_option("--mc-samples", sim.mc_samples, "gap reference draws (design 3)")->capture_default_str();
    simulate->add_flag("--cv", sim.cv, "tune parameters by stability CV per replicate (design 1)");
    simulate->add_option("--cv-repeats", sim.cv_repeats, "splits per combination with --cv")->capture_default_str();
    simulate->add_flag("--save-data", sim.save_data, "write each generated dataset and its labels");

    auto* evaluate = app.add_subcommand("evaluate", "score a fit against true labels");
    add_common(evaluate, opts);
    std::string fit_json, truth_csv, informative, data_csv;
    evaluate->add_option("--fit", fit_json, "fit.json from the fit command")->required();
    evaluate->add_option("--truth", truth_csv, "CSV whose last column holds the true labels")->required();
    evaluate->add_option("--informative", informative, "comma-separated 1-based informative variables");
    evaluate->add_option("--data", data_csv, "original data for the F-scores (default: the embedding)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        opts.resolve();
        if (fit->parsed()) return cmd_fit(opts, input);
        if (tune->parsed()) return cmd_tune(opts, input, eta1_grid, gamma_grid, rho_grid, repeats);
        if (select->parsed()) return cmd_select_k(opts, input, k_min, k_max, mc_samples, reference);
        if (simulate->parsed()) return cmd_simulate(opts, sim);
        if (evaluate->parsed()) return cmd_evaluate(opts, fit_json, truth_csv, informative, data_csv);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DimensionError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ParameterError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace rsodc::cli
