#include "common.hpp"
#include "rsodc/cli/commands.hpp"
#include "rsodc/datagen.hpp"
#include "rsodc/metrics.hpp"
#include "rsodc/model_selection.hpp"
#include "rsodc/parallel.hpp"
#include "rsodc/solver.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>

namespace rsodc::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

/// One data-generating cell of a design.
struct Cell {
    SimulationConfig data;
    std::string key;  // human-readable factor summary
};

/// Everything recorded for one replicate of one method in one cell.
struct Record {
    std::size_t cell = 0;
    int replicate = 0;
    std::string method;
    std::string setting;  // tuning setting within the cell (design 2 combos, design 4 tau/delta)
    bool ok = false;
    std::string error;
    double ari = 0.0;
    double seconds = 0.0;
    int outer_iters = 0;
    int convergence_count = 0;
    std::string status;
    double sensitivity = 0.0;
    double specificity = 0.0;
    int chosen_k = 0;
};

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

template <class T>
std::vector<T> list_or(const std::string& text, const std::string& flag, std::vector<T> fallback)
{
    if (text.empty()) return fallback;
    std::vector<T> out;
    if constexpr (std::is_same_v<T, int>)
        out = parse_int_list(text, flag);
    else
        out = parse_double_list(text, flag);
    return out;
}

std::vector<Cell> build_cells(const SimulateOptions& sim)
{
    // Design 1 sweeps factors; the others fix the Simulation 2 cell unless overridden.
    const bool sweep = sim.design == 1;
    const auto ns = list_or<int>(sim.n_list, "--n", {60});
    const auto ps = list_or<int>(sim.p_list, "--p", sweep ? std::vector<int>{20, 50} : std::vector<int>{20});
    const auto ks = list_or<int>(sim.k_list, "--true-k", sim.design == 3 ? std::vector<int>{2, 3} : std::vector<int>{3});
    const auto thetas =
        list_or<double>(sim.theta_list, "--theta", sweep ? std::vector<double>{1.4, 2.0, 2.2} : std::vector<double>{2.2});
    const auto xis = list_or<double>(sim.xi_list, "--xi", sweep ? std::vector<double>{0.0, 0.5} : std::vector<double>{0.5});

    std::vector<Cell> cells;
    for (int n : ns)
        for (int p : ps)
            for (int k : ks)
                for (double theta : thetas)
                    for (double xi : xis) {
                        Cell c;
                        c.data.n = n;
                        c.data.p = p;
                        c.data.k = k;
                        c.data.theta = theta;
                        c.data.xi = xi;
                        c.data.validate();
                        c.key = "n=" + std::to_string(n) + " p=" + std::to_string(p) + " k=" + std::to_string(k) +
                                " theta=" + format_double(theta) + " xi=" + format_double(xi);
                        cells.push_back(std::move(c));
                    }
    return cells;
}

Dataset make_data(const Cell& cell, std::uint64_t master, std::size_t cell_index, int replicate)
{
    SimulationConfig cfg = cell.data;
    cfg.seed = derive_seed(master, cell_index * 1000003ULL + static_cast<std::uint64_t>(replicate));
    return generate(cfg);
}

FitResult fit_with(const Matrix& x, SolverParams params, int k, double tau, int delta, std::uint64_t seed)
{
    params.k = k;
    ProblemInstance inst{x, params};
    if (params.gamma == 0.0) return fit_sodc(inst, seed);
    const int d = std::min<int>(delta, static_cast<int>(x.rows()) - 1);
    return fit_rsodc(inst, build_fusion_graph(center_columns(x), tau, d, params.rho), seed);
}

void fill_fit(Record& rec, const FitResult& fit, const Partition& truth)
{
    rec.ok = true;
    rec.ari = adjusted_rand_index(fit.labels, truth);
    rec.seconds = fit.timings.total;
    rec.outer_iters = fit.outer_iters;
    rec.convergence_count = fit.convergence_count();
    rec.status = to_string(fit.status);
}

void save_dataset(const fs::path& dir, std::size_t cell, int replicate, const Dataset& ds)
{
    const fs::path data_dir = dir / "data";
    fs::create_directories(data_dir);
    const std::string stem = "cell" + std::to_string(cell + 1) + "_rep" + std::to_string(replicate + 1);
    std::vector<std::string> header;
    for (Index c = 0; c < ds.X.cols(); ++c) header.push_back("x" + std::to_string(c + 1));
    std::vector<std::vector<std::string>> rows, truth;
    for (Index i = 0; i < ds.X.rows(); ++i) {
        std::vector<std::string> row;
        for (Index c = 0; c < ds.X.cols(); ++c) row.push_back(format_double(ds.X(i, c)));
        rows.push_back(std::move(row));
        truth.push_back({std::to_string(ds.labels[static_cast<std::size_t>(i)])});
    }
    write_csv(data_dir / (stem + ".csv"), header, rows);
    write_csv(data_dir / (stem + "_truth.csv"), {"label"}, truth);
}

/// Work items expand to records; each item writes only its own slots.
struct Plan {
    std::vector<Record> records;
    std::vector<std::function<void(Record&)>> jobs;
};

}  // namespace

int cmd_simulate(const CommonOptions& common, const SimulateOptions& sim)
{
    const auto start = Clock::now();
    if (sim.replicates < 1) throw ParameterError("simulate: replicates must be positive");
    const std::vector<Cell> cells = build_cells(sim);
    const fs::path dir = prepare_out_dir(common.out);
    const SolverParams base = common.params;
    const std::uint64_t master = common.seed;

    Plan plan;
    auto add = [&](std::size_t cell, int rep, std::string method, std::string setting, std::function<void(Record&)> job) {
        Record rec;
        rec.cell = cell;
        rec.replicate = rep;
        rec.method = std::move(method);
        rec.setting = std::move(setting);
        plan.records.push_back(std::move(rec));
        plan.jobs.push_back(std::move(job));
    };

    // Settings swept inside a cell.
    ParamGrid grid = ParamGrid::paper_default();
    if (!sim.eta1_grid.empty()) grid.eta1_candidates = parse_double_list(sim.eta1_grid, "--eta1-grid");
    if (!sim.gamma_grid.empty()) grid.gamma_candidates = parse_double_list(sim.gamma_grid, "--gamma-grid");
    if (!sim.rho_grid.empty()) grid.rho_candidates = parse_double_list(sim.rho_grid, "--rho-grid");
    const auto taus = list_or<double>(sim.tau_grid, "--tau-grid", {0.001, 0.005, 0.01, 0.05, 0.1});
    const auto deltas = list_or<int>(sim.delta_grid, "--delta-grid", {5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55});

    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        for (int r = 0; r < sim.replicates; ++r) {
            const std::uint64_t fit_seed = derive_seed(master ^ 0x5eedULL, c * 1000003ULL + static_cast<std::uint64_t>(r));
            auto data = [&, c, r] { return make_data(cell, master, c, r); };
            switch (sim.design) {
            case 1:
                for (const char* method : {"rsodc", "sodc", "tandem"}) {
                    const std::string m = method;
                    add(c, r, m, "", [&, data, m, fit_seed, cell](Record& rec) {
                        const Dataset ds = data();
                        const int k = cell.data.k;
                        if (m == "tandem") {
                            fill_fit(rec, tandem_baseline(ds.X, k, fit_seed, base.kmeans_restarts), ds.labels);
                            return;
                        }
                        SolverParams prm = base;
                        if (m == "sodc") prm.gamma = 0.0;
                        if (sim.cv) {
                            ParamGrid g = ParamGrid::paper_default();
                            if (m == "sodc") {
                                g.eta1_candidates = {0.1, 0.3, 0.5, 0.7, 1, 1.5, 2, 2.5, 3, 3.5, 4};
                                g.gamma_candidates = {0.0};
                                g.rho_candidates = {base.rho};
                            }
                            g.repeats = sim.cv_repeats;
                            StabilityOptions so;
                            so.base = prm;
                            so.tau = common.tau;
                            so.delta = common.delta;
                            const StabilityResult cv = stability_cv(ds.X, k, g, so, derive_seed(fit_seed, 9));
                            prm.eta1 = cv.best.eta1;
                            prm.gamma = cv.best.gamma;
                            prm.rho = cv.best.rho;
                            rec.setting = "eta1=" + format_double(prm.eta1) + " gamma=" + format_double(prm.gamma) +
                                          " rho=" + format_double(prm.rho);
                        }
                        fill_fit(rec, fit_with(ds.X, prm, k, common.tau, common.delta, fit_seed), ds.labels);
                    });
                }
                break;
            case 2:
                for (const ParamCombo& combo : grid.combos()) {
                    const std::string setting = format_double(combo.eta1) + "," + format_double(combo.gamma) + "," +
                                                format_double(combo.rho);
                    add(c, r, "rsodc", setting, [&, data, combo, fit_seed, cell](Record& rec) {
                        const Dataset ds = data();
                        SolverParams prm = base;
                        prm.eta1 = combo.eta1;
                        prm.gamma = combo.gamma;
                        prm.rho = combo.rho;
                        fill_fit(rec, fit_with(ds.X, prm, cell.data.k, common.tau, common.delta, fit_seed), ds.labels);
                    });
                }
                break;
            case 3:
                add(c, r, "rsodc", "", [&, data, fit_seed](Record& rec) {
                    const Dataset ds = data();
                    GapSelectionOptions go;
                    go.base = base;
                    go.tau = common.tau;
                    go.delta = common.delta;
                    go.gap.mc_samples = sim.mc_samples;
                    go.gap.restarts = base.kmeans_restarts;
                    const auto t0 = Clock::now();
                    const GapSelection sel = select_k_by_gap(ds.X, {2, 3, 4, 5, 6, 7, 8, 9}, go, fit_seed);
                    rec.ok = true;
                    rec.chosen_k = sel.chosen_k;
                    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
                    rec.status = "done";
                });
                break;
            case 4:
                for (int delta : deltas)
                    for (double tau : taus) {
                        const std::string setting = format_double(tau) + "," + std::to_string(delta);
                        add(c, r, "rsodc", setting, [&, data, tau, delta, fit_seed, cell](Record& rec) {
                            const Dataset ds = data();
                            const FitResult fit = fit_with(ds.X, base, cell.data.k, tau, delta, fit_seed);
                            fill_fit(rec, fit, ds.labels);
                            std::vector<int> info(static_cast<std::size_t>(cell.data.q));
                            std::iota(info.begin(), info.end(), 1);
                            const SelectionAccuracy acc = sensitivity_specificity(fit.B_hat, info, cell.data.k);
                            rec.sensitivity = acc.sensitivity;
                            rec.specificity = acc.specificity;
                        });
                    }
                break;
            case 5:
                // One dataset per cell; replicates differ only in the random start of B.
                add(c, r, "rsodc", "", [&, c, fit_seed, cell](Record& rec) {
                    const Dataset ds = make_data(cell, master, c, 0);
                    SolverParams prm = base;
                    prm.b_init = BInit::gaussian;
                    fill_fit(rec, fit_with(ds.X, prm, cell.data.k, common.tau, common.delta, fit_seed), ds.labels);
                });
                break;
            default: throw ParameterError("simulate: design must be 1..5");
            }
        }
    }

    if (sim.save_data) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            for (int r = 0; r < (sim.design == 5 ? 1 : sim.replicates); ++r)
                save_dataset(dir, c, r, make_data(cells[c], master, c, r));
    }

    parallel_for(plan.jobs.size(), common.threads, [&](std::size_t i) {
        try {
            plan.jobs[i](plan.records[i]);
        } catch (const std::exception& e) {
            plan.records[i].ok = false;
            plan.records[i].error = e.what();
        }
    });

    // Per-replicate table.
    const fs::path rep_path = dir / "replicates.csv", table_path = dir / "table.csv", summary_path = dir / "summary.json";
    std::vector<std::vector<std::string>> rows;
    for (const Record& rec : plan.records)
        rows.push_back({std::to_string(rec.cell + 1), cells[rec.cell].key, std::to_string(rec.replicate + 1), rec.method,
                        rec.setting, rec.ok ? "ok" : "failed", format_double(rec.ari), format_double(rec.seconds),
                        std::to_string(rec.outer_iters), std::to_string(rec.convergence_count), rec.status,
                        format_double(rec.sensitivity), format_double(rec.specificity), std::to_string(rec.chosen_k),
                        "\"" + rec.error + "\""});
    write_csv(rep_path,
              {"cell", "factors", "replicate", "method", "setting", "outcome", "ari", "seconds", "outer_iters",
               "convergence_count", "status", "sensitivity", "specificity", "chosen_k", "error"},
              rows);

    // Aggregate by (cell, method, setting) in first-seen order.
    std::vector<std::tuple<std::size_t, std::string, std::string>> groups;
    std::map<std::tuple<std::size_t, std::string, std::string>, std::vector<const Record*>> members;
    for (const Record& rec : plan.records) {
        const auto key = std::make_tuple(rec.cell, rec.method, rec.setting);
        if (!members.count(key)) groups.push_back(key);
        members[key].push_back(&rec);
    }
    // Design 1 with --cv stores the selected setting per replicate; aggregate those by method only.
    if (sim.design == 1 && sim.cv) {
        groups.clear();
        std::map<std::tuple<std::size_t, std::string, std::string>, std::vector<const Record*>> merged;
        for (const Record& rec : plan.records) {
            const auto key = std::make_tuple(rec.cell, rec.method, std::string());
            if (!merged.count(key)) groups.push_back(key);
            merged[key].push_back(&rec);
        }
        members = std::move(merged);
    }

    Json summary;
    summary["design"] = sim.design;
    summary["replicates"] = sim.replicates;
    Json cells_json = Json::array();
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> table_header;
    switch (sim.design) {
    case 2: table_header = {"factors", "eta1", "gamma", "rho", "median_ari", "mean_ari", "n_ok", "n_failed"}; break;
    case 3: table_header = {"factors", "true_k", "k", "count"}; break;
    case 4:
        table_header = {"factors", "tau", "delta", "median_ari", "median_seconds", "median_convergence_count",
                        "median_sensitivity", "median_specificity", "n_ok", "n_failed"};
        break;
    default:
        table_header = {"factors", "method", "median_ari", "mean_ari", "median_seconds", "median_convergence_count",
                        "n_ok", "n_failed"};
    }

    for (const auto& key : groups) {
        const auto& recs = members[key];
        std::vector<double> ari, secs, conv, sens, spec;
        int failed = 0;
        std::map<int, int> chosen;
        for (const Record* rec : recs) {
            if (!rec->ok) {
                ++failed;
                continue;
            }
            ari.push_back(rec->ari);
            secs.push_back(rec->seconds);
            conv.push_back(rec->convergence_count);
            sens.push_back(rec->sensitivity);
            spec.push_back(rec->specificity);
            if (rec->chosen_k > 0) ++chosen[rec->chosen_k];
        }
        const auto& [cell, method, setting] = key;
        const int ok = static_cast<int>(ari.size());
        Json entry;
        entry["factors"] = cells[cell].key;
        entry["method"] = method;
        entry["setting"] = setting;
        entry["n_ok"] = ok;
        entry["n_failed"] = failed;
        const std::string& factors = cells[cell].key;
        if (sim.design == 3) {
            Json counts = Json::object();
            for (int k = 2; k <= 9; ++k) {
                counts[std::to_string(k)] = chosen.count(k) ? chosen[k] : 0;
                table.push_back({factors, std::to_string(cells[cell].data.k), std::to_string(k),
                                 std::to_string(chosen.count(k) ? chosen[k] : 0)});
            }
            entry["chosen_k_counts"] = counts;
            entry["median_seconds"] = median(secs);
        } else {
            entry["median_ari"] = median(ari);
            entry["mean_ari"] = mean(ari);
            entry["median_seconds"] = median(secs);
            entry["median_convergence_count"] = median(conv);
            if (sim.design == 4) {
                entry["median_sensitivity"] = median(sens);
                entry["median_specificity"] = median(spec);
                const auto comma = setting.find(',');
                table.push_back({factors, setting.substr(0, comma), setting.substr(comma + 1), format_double(median(ari)),
                                 format_double(median(secs)), format_double(median(conv)), format_double(median(sens)),
                                 format_double(median(spec)), std::to_string(ok), std::to_string(failed)});
            } else if (sim.design == 2) {
                std::vector<std::string> parts;
                std::string rest = setting;
                for (std::size_t pos; (pos = rest.find(',')) != std::string::npos; rest = rest.substr(pos + 1))
                    parts.push_back(rest.substr(0, pos));
                parts.push_back(rest);
                table.push_back({factors, parts[0], parts[1], parts[2], format_double(median(ari)), format_double(mean(ari)),
                                 std::to_string(ok), std::to_string(failed)});
            } else {
                if (sim.design == 5) {
                    entry["min_ari"] = ari.empty() ? 0.0 : *std::min_element(ari.begin(), ari.end());
                    entry["max_ari"] = ari.empty() ? 0.0 : *std::max_element(ari.begin(), ari.end());
                }
                table.push_back({factors, method, format_double(median(ari)), format_double(mean(ari)),
                                 format_double(median(secs)), format_double(median(conv)), std::to_string(ok),
                                 std::to_string(failed)});
            }
        }
        cells_json.push_back(std::move(entry));
    }
    write_csv(table_path, table_header, table);
    summary["cells"] = cells_json;
    int failures = 0;
    for (const Record& rec : plan.records) failures += rec.ok ? 0 : 1;
    summary["failed_items"] = failures;
    summary["manifest"] = manifest("simulate", common, {{"design", sim.design}}, {rep_path, table_path, summary_path}, start);
    write_json(summary_path, summary);
    std::cout << "design " << sim.design << ": " << plan.records.size() << " runs, " << failures << " failed\n";
    return kExitOk;
}

}  // namespace rsodc::cli
