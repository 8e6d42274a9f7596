// Command-line front end: solve single problems, run benchmark suites and
// turn recorded costs into performance-profile CSV data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "mpr2/harness.hpp"

namespace {

using namespace mpr2;

int status_exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::FirstOrder: return 0;
        case RunStatus::PrecisionFailure: return 2;
        case RunStatus::MaxIter: return 3;
        case RunStatus::Stalled: return 5;
    }
    return 1;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

FormatStack stack_from_names(const std::string& csv) {
    std::vector<FpFormat> fmts;
    for (const auto& name : split(csv, ',')) {
        if (name == "half") fmts.push_back(FpFormat::binary16());
        else if (name == "single") fmts.push_back(FpFormat::binary32());
        else if (name == "double") fmts.push_back(FpFormat::binary64());
        else if (name == "bfloat16") fmts.push_back(FpFormat::bfloat16());
        else throw InvalidConfig("unknown format name: " + name);
    }
    return FormatStack(fmts);
}

struct CommonOpts {
    std::string mode = "mpr2_guaranteed";
    double eps = 0x1p-26;
    long max_iter = 10000;
    double sigma0 = 1.0;
    double sigma_min = 0x1p-20;
    double eta0 = 0.05, eta1 = 0.1, eta2 = 0.7;
    double gamma1 = 0.5, gamma2 = 2.0, gamma3 = 2.0;
    double kappa_mu = 0.2;
    std::string gamma_formula = "nu";
    double relax_a = 1.0;
    bool rho_correction = false;
    bool allow_published_params = false;
    std::string formats = "half,single,double";
    std::string trace;
};

void add_common(CLI::App* app, CommonOpts& o) {
    app->add_option("--mode", o.mode, "r2 | mpr2_guaranteed | mpr2_relaxed");
    app->add_option("--eps", o.eps, "first-order tolerance");
    app->add_option("--max-iter", o.max_iter, "iteration limit");
    app->add_option("--sigma0", o.sigma0, "initial regularization (power of two)");
    app->add_option("--sigma-min", o.sigma_min, "minimal regularization (power of two)");
    app->add_option("--eta0", o.eta0);
    app->add_option("--eta1", o.eta1);
    app->add_option("--eta2", o.eta2);
    app->add_option("--gamma1", o.gamma1);
    app->add_option("--gamma2", o.gamma2);
    app->add_option("--gamma3", o.gamma3);
    app->add_option("--kappa-mu", o.kappa_mu);
    app->add_option("--gamma-formula", o.gamma_formula,
                    "nu | nu_over_1mnu | nu_over_1mnu2");
    app->add_option("--relax-a", o.relax_a, "mu-condition relaxation factor in (0,1]");
    app->add_flag("--rho-correction", o.rho_correction,
                  "tighten step-3 conditions for finite-precision rho");
    app->add_flag("--allow-published-params", o.allow_published_params,
                  "accept the published gamma2 = 1 for replication runs");
    app->add_option("--formats", o.formats, "comma list, lowest precision first");
    app->add_option("--trace", o.trace, "JSONL iteration trace path");
    app->set_config("--config", "", "flat key=value configuration file");
}

SolverConfig to_config(const CommonOpts& o) {
    SolverConfig cfg;
    cfg.mode = solver_mode_from_name(o.mode);
    cfg.stack = stack_from_names(o.formats);
    cfg.gamma_formula = gamma_formula_from_name(o.gamma_formula);
    cfg.eps = o.eps;
    cfg.max_iter = o.max_iter;
    cfg.sigma0 = o.sigma0;
    cfg.sigma_min = o.sigma_min;
    cfg.eta0 = o.eta0;
    cfg.eta1 = o.eta1;
    cfg.eta2 = o.eta2;
    cfg.gamma1 = o.gamma1;
    cfg.gamma2 = o.gamma2;
    cfg.gamma3 = o.gamma3;
    cfg.kappa_mu = o.kappa_mu;
    cfg.relax_a = o.relax_a;
    cfg.rho_correction = o.rho_correction;
    cfg.allow_published_params = o.allow_published_params;
    cfg.trace_path = o.trace;
    return cfg;
}

// "name" or "name:n"
std::pair<std::string, int> parse_problem_ref(const std::string& ref, int default_n) {
    auto pos = ref.find(':');
    if (pos == std::string::npos) return {ref, default_n};
    return {ref.substr(0, pos), std::stoi(ref.substr(pos + 1))};
}

int cmd_solve(const std::string& problem_ref, int n_flag, const CommonOpts& opts) {
    SolverConfig cfg = to_config(opts);
    auto [name, n] = parse_problem_ref(problem_ref, n_flag);
    Problem p = get_problem(name, n);
    RunReport rep = run_mpr2(p, cfg);

    std::printf("problem           %s (n = %d)\n", p.name.c_str(), p.n);
    std::printf("status            %s\n", run_status_name(rep.status).c_str());
    std::printf("iterations        %ld (%ld successful)\n", rep.iterations,
                rep.successful_iterations);
    std::printf("final f           %.17g\n", rep.f_final);
    std::printf("final fl(||g||)   %.17g\n", rep.gnorm_final);
    const FormatStack& stack =
        cfg.mode == SolverMode::R2 ? cfg.stack.finest_only() : cfg.stack;
    for (FormatIndex pi = 1; pi <= stack.size(); ++pi) {
        const auto& c = rep.counters.at(pi);
        std::printf("%-8s evals    obj %ld (%ld ok)  grad %ld (%ld ok)\n",
                    stack[pi].name.c_str(), c.obj, c.obj_success, c.grad,
                    c.grad_success);
    }
    EffortCost effort = effort_cost(rep.counters, stack, EffortModel{});
    std::printf("effort (vs all-64-bit units)  obj time %.1f energy %.1f | "
                "grad time %.1f energy %.1f\n",
                effort.obj_time, effort.obj_energy, effort.grad_time,
                effort.grad_energy);
    if (rep.invariant_violations != 0) {
        std::printf("invariant violations: %ld\n", rep.invariant_violations);
        for (const auto& note : rep.invariant_notes)
            std::printf("  %s\n", note.c_str());
    }
    for (const auto& w : rep.warnings) std::printf("warning: %s\n", w.c_str());
    return status_exit_code(rep.status);
}

int cmd_bench(const std::string& suite, const std::string& modes,
              const std::string& out_dir, const CommonOpts& opts) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::pair<std::string, int>> selection;
    if (suite == "default" || suite.empty()) {
        selection = default_suite();
    } else {
        for (const auto& ref : split(suite, ','))
            selection.push_back(parse_problem_ref(ref, 2));
    }

    EffortModel model;
    std::vector<SuiteReport> reports;
    std::vector<FormatStack> stacks;
    for (const auto& mode_name : split(modes, ',')) {
        CommonOpts o = opts;
        o.mode = mode_name;
        SolverConfig cfg = to_config(o);
        std::string label = mode_name;
        if (cfg.mode == SolverMode::Mpr2Relaxed && cfg.relax_a != 1.0) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%s_a%g", mode_name.c_str(), cfg.relax_a);
            label = buf;
        }
        std::printf("running %-24s over %zu problems...\n", label.c_str(),
                    selection.size());
        SuiteReport rep = run_suite(cfg, selection, label);
        emit_report(rep, ReportFormat::Json, out_dir);
        emit_report(rep, ReportFormat::Csv, out_dir);
        emit_report(rep, ReportFormat::TextTable, out_dir);
        stacks.push_back(cfg.mode == SolverMode::R2 ? cfg.stack.finest_only()
                                                    : cfg.stack);
        reports.push_back(std::move(rep));
    }

    emit_costs_csv(reports, stacks, model, out_dir + "/costs.csv");

    // effort comparison against the r2 baseline when present
    for (std::size_t b = 0; b < reports.size(); ++b) {
        if (reports[b].mode != SolverMode::R2) continue;
        std::ofstream cmp(out_dir + "/comparison.txt");
        for (std::size_t i = 0; i < reports.size(); ++i) {
            if (i == b) continue;
            try {
                EffortRatios r = compare_efforts(reports[i], stacks[i], reports[b], model);
                char buf[256];
                std::snprintf(buf, sizeof(buf),
                              "%s vs %s: obj time %.3f energy %.3f | grad time %.3f "
                              "energy %.3f | common solved %ld\n",
                              reports[i].solver_label.c_str(),
                              reports[b].solver_label.c_str(), r.obj_time,
                              r.obj_energy, r.grad_time, r.grad_energy,
                              r.common_solved);
                cmp << buf;
                std::printf("%s", buf);
            } catch (const EmptyIntersection&) {
                cmp << reports[i].solver_label << ": no commonly solved problems\n";
            }
        }
        break;
    }
    std::printf("reports written to %s\n", out_dir.c_str());
    return 0;
}

int cmd_profile(const std::string& in_dir, const std::string& out_csv) {
    std::ifstream in(in_dir + "/costs.csv");
    if (!in) throw IoError("cannot read " + in_dir + "/costs.csv");
    std::string line;
    std::getline(in, line);  // header
    // metric -> problem -> solver -> cost
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> table;
    std::vector<std::string> solver_order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != 4) throw IoError("malformed costs.csv line: " + line);
        double cost = cols[3] == "inf" ? std::numeric_limits<double>::infinity()
                                       : std::stod(cols[3]);
        table[cols[2]][cols[0]][cols[1]] = cost;
        if (std::find(solver_order.begin(), solver_order.end(), cols[1]) ==
            solver_order.end())
            solver_order.push_back(cols[1]);
    }

    std::ofstream out(out_csv);
    if (!out) throw IoError("cannot write " + out_csv);
    out << "metric,tau,solver,fraction\n";
    for (const auto& [metric, problems] : table) {
        std::vector<std::vector<double>> costs;
        for (const auto& [prob, by_solver] : problems) {
            std::vector<double> row;
            for (const auto& s : solver_order) {
                auto it = by_solver.find(s);
                row.push_back(it == by_solver.end()
                                  ? std::numeric_limits<double>::infinity()
                                  : it->second);
            }
            costs.push_back(std::move(row));
        }
        ProfileData prof = performance_profile(solver_order, costs);
        std::string body = profile_to_csv(prof, metric);
        out << body.substr(body.find('\n') + 1);  // strip the repeated header
    }
    std::printf("profile written to %s\n", out_csv.c_str());
    return 0;
}

int cmd_problems() {
    for (const auto& info : problem_registry())
        std::printf("%-18s n: %-22s %s\n", info.name.c_str(), info.dims.c_str(),
                    info.formula.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-precision quadratic-regularization solver"};
    app.require_subcommand(1);

    CommonOpts solve_opts;
    std::string solve_problem;
    int solve_n = 2;
    CLI::App* solve = app.add_subcommand("solve", "run one problem");
    solve->add_option("problem", solve_problem, "problem name or name:n")->required();
    solve->add_option("--n", solve_n, "problem dimension (when not given as name:n)");
    add_common(solve, solve_opts);

    CommonOpts bench_opts;
    std::string bench_suite = "default";
    std::string bench_modes = "r2,mpr2_guaranteed,mpr2_relaxed";
    std::string bench_out = "bench_out";
    CLI::App* bench = app.add_subcommand("bench", "run a suite and write reports");
    bench->add_option("--suite", bench_suite, "'default' or comma list of name:n");
    bench->add_option("--modes", bench_modes, "comma list of solver modes");
    bench->add_option("--out", bench_out, "output directory");
    add_common(bench, bench_opts);

    std::string profile_in, profile_out = "profile.csv";
    CLI::App* profile =
        app.add_subcommand("profile", "performance profiles from bench costs");
    profile->add_option("--in", profile_in, "bench output directory")->required();
    profile->add_option("--out", profile_out, "profile CSV path");

    CLI::App* problems = app.add_subcommand("problems", "list the problem registry");

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return cmd_solve(solve_problem, solve_n, solve_opts);
        if (bench->parsed()) return cmd_bench(bench_suite, bench_modes, bench_out, bench_opts);
        if (profile->parsed()) return cmd_profile(profile_in, profile_out);
        if (problems->parsed()) return cmd_problems();
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 4;
    } catch (const InvalidConfig& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 4;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
