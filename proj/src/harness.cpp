#include "mpr2/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace mpr2 {

using nlohmann::json;

long SuiteReport::count_status(RunStatus s) const {
    long c = 0;
    for (const auto& r : results)
        if (r.status == s) ++c;
    return c;
}

EvalCounters SuiteReport::totals() const {
    EvalCounters t(static_cast<int>(format_names.size()));
    for (const auto& r : results) {
        for (std::size_t i = 0; i < r.counters.per_format.size(); ++i) {
            t.per_format[i].obj += r.counters.per_format[i].obj;
            t.per_format[i].obj_success += r.counters.per_format[i].obj_success;
            t.per_format[i].grad += r.counters.per_format[i].grad;
            t.per_format[i].grad_success += r.counters.per_format[i].grad_success;
        }
    }
    return t;
}

EffortCost effort_cost(const EvalCounters& counters, const FormatStack& stack,
                       const EffortModel& model) {
    EffortCost c;
    for (FormatIndex pi = 1; pi <= stack.size(); ++pi) {
        const FormatCounters& fc = counters.at(pi);
        double tw = model.time_weight(stack[pi]);
        double ew = model.energy_weight(stack[pi]);
        c.obj_time += fc.obj * tw;
        c.obj_energy += fc.obj * ew;
        c.grad_time += fc.grad * tw;
        c.grad_energy += fc.grad * ew;
    }
    return c;
}

EffortRatios effort_ratios(const EvalCounters& mp, const FormatStack& mp_stack,
                           const EvalCounters& baseline, const EffortModel& model) {
    EffortCost num = effort_cost(mp, mp_stack, model);
    double base_obj = static_cast<double>(baseline.total_obj());
    double base_grad = static_cast<double>(baseline.total_grad());
    if (base_obj == 0.0 || base_grad == 0.0)
        throw EmptyIntersection("effort_ratios: baseline has no evaluations");
    EffortRatios r;
    r.obj_time = num.obj_time / base_obj;
    r.obj_energy = num.obj_energy / base_obj;
    r.grad_time = num.grad_time / base_grad;
    r.grad_energy = num.grad_energy / base_grad;
    return r;
}

EffortRatios compare_efforts(const SuiteReport& mp, const FormatStack& mp_stack,
                             const SuiteReport& baseline, const EffortModel& model) {
    EvalCounters mp_sum(static_cast<int>(mp.format_names.size()));
    EvalCounters base_sum(static_cast<int>(baseline.format_names.size()));
    long common = 0;
    for (const auto& r : mp.results) {
        if (!r.solved()) continue;
        auto it = std::find_if(baseline.results.begin(), baseline.results.end(),
                               [&](const ProblemResult& b) {
                                   return b.problem == r.problem && b.solved();
                               });
        if (it == baseline.results.end()) continue;
        ++common;
        for (std::size_t i = 0; i < r.counters.per_format.size(); ++i) {
            mp_sum.per_format[i].obj += r.counters.per_format[i].obj;
            mp_sum.per_format[i].grad += r.counters.per_format[i].grad;
        }
        for (std::size_t i = 0; i < it->counters.per_format.size(); ++i) {
            base_sum.per_format[i].obj += it->counters.per_format[i].obj;
            base_sum.per_format[i].grad += it->counters.per_format[i].grad;
        }
    }
    if (common == 0)
        throw EmptyIntersection("compare_efforts: no commonly solved problem");
    EffortRatios r = effort_ratios(mp_sum, mp_stack, base_sum, model);
    r.common_solved = common;
    return r;
}

SuiteReport run_suite(const SolverConfig& cfg,
                      const std::vector<std::pair<std::string, int>>& selection,
                      const std::string& label) {
    if (selection.empty()) throw InvalidConfig("run_suite: empty selection");
    SuiteReport rep;
    rep.mode = cfg.mode;
    rep.relax_a = cfg.relax_a;
    rep.solver_label = label.empty() ? solver_mode_name(cfg.mode) : label;
    const FormatStack& stack =
        cfg.mode == SolverMode::R2 ? cfg.stack.finest_only() : cfg.stack;
    for (FormatIndex pi = 1; pi <= stack.size(); ++pi) {
        rep.format_names.push_back(stack[pi].name);
        rep.format_bits.push_back(stack[pi].storage_bits);
    }

    for (const auto& [name, n] : selection) {
        ProblemResult pr;
        pr.name = name;
        pr.n = n;
        pr.problem = name + "_" + std::to_string(n);
        try {
            Problem p = get_problem(name, n);
            RunReport run = run_mpr2(p, cfg);
            pr.status = run.status;
            pr.iterations = run.iterations;
            pr.successful_iterations = run.successful_iterations;
            pr.f_final = run.f_final;
            pr.gnorm_final = run.gnorm_final;
            pr.counters = run.counters;
            pr.invariant_violations = run.invariant_violations;
            pr.notes = run.invariant_notes;
        } catch (const Error& e) {
            pr.status = RunStatus::PrecisionFailure;
            pr.counters = EvalCounters(stack.size());
            pr.notes.push_back(std::string("run aborted: ") + e.what());
        }
        rep.results.push_back(std::move(pr));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Performance profiles
// ---------------------------------------------------------------------------

ProfileData performance_profile(const std::vector<std::string>& solvers,
                                const std::vector<std::vector<double>>& costs,
                                const std::vector<double>* grid) {
    const double inf = std::numeric_limits<double>::infinity();
    std::size_t np = costs.size();
    std::size_t ns = solvers.size();

    // ratio to the best solver per problem
    std::vector<std::vector<double>> ratios(np, std::vector<double>(ns, inf));
    double max_ratio = 1.0;
    for (std::size_t p = 0; p < np; ++p) {
        if (costs[p].size() != ns)
            throw InvalidConfig("performance_profile: ragged cost matrix");
        double best = inf;
        for (double c : costs[p]) {
            if (c <= 0.0 && std::isfinite(c))
                throw InvalidConfig("performance_profile: costs must be positive");
            best = std::min(best, c);
        }
        if (!std::isfinite(best)) continue;  // no solver solved it
        for (std::size_t s = 0; s < ns; ++s) {
            if (std::isfinite(costs[p][s])) {
                ratios[p][s] = costs[p][s] / best;
                max_ratio = std::max(max_ratio, ratios[p][s]);
            }
        }
    }

    ProfileData out;
    out.solvers = solvers;
    if (grid) {
        out.taus = *grid;
    } else {
        // fixed geometric grid from 1 to just past the largest ratio
        const int points = 64;
        double top = max_ratio * 1.05;
        out.taus.reserve(points);
        for (int i = 0; i < points; ++i)
            out.taus.push_back(std::pow(top, static_cast<double>(i) / (points - 1)));
        out.taus[0] = 1.0;
    }

    out.fractions.assign(ns, std::vector<double>(out.taus.size(), 0.0));
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t t = 0; t < out.taus.size(); ++t) {
            long count = 0;
            for (std::size_t p = 0; p < np; ++p)
                if (ratios[p][s] <= out.taus[t]) ++count;
            out.fractions[s][t] = np == 0 ? 0.0 : static_cast<double>(count) / np;
        }
    }
    return out;
}

std::string profile_to_csv(const ProfileData& data, const std::string& metric) {
    std::ostringstream os;
    os << "metric,tau,solver,fraction\n";
    os.precision(17);
    for (std::size_t s = 0; s < data.solvers.size(); ++s)
        for (std::size_t t = 0; t < data.taus.size(); ++t)
            os << metric << "," << data.taus[t] << "," << data.solvers[s] << ","
               << data.fractions[s][t] << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

json counters_to_json(const EvalCounters& c) {
    json arr = json::array();
    for (const auto& f : c.per_format)
        arr.push_back({{"obj", f.obj},
                       {"obj_success", f.obj_success},
                       {"grad", f.grad},
                       {"grad_success", f.grad_success}});
    return arr;
}

EvalCounters counters_from_json(const json& arr) {
    EvalCounters c(static_cast<int>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        c.per_format[i].obj = arr[i]["obj"].get<long>();
        c.per_format[i].obj_success = arr[i]["obj_success"].get<long>();
        c.per_format[i].grad = arr[i]["grad"].get<long>();
        c.per_format[i].grad_success = arr[i]["grad_success"].get<long>();
    }
    return c;
}

RunStatus status_from_name(const std::string& s) {
    if (s == "first_order") return RunStatus::FirstOrder;
    if (s == "max_iter") return RunStatus::MaxIter;
    if (s == "precision_failure") return RunStatus::PrecisionFailure;
    if (s == "stalled") return RunStatus::Stalled;
    throw InvalidConfig("unknown status: " + s);
}

struct ShareLine {
    double pct = 0.0;
    double success = 0.0;
};

std::vector<ShareLine> shares(const EvalCounters& totals, bool grad) {
    long all = grad ? totals.total_grad() : totals.total_obj();
    std::vector<ShareLine> out;
    for (const auto& f : totals.per_format) {
        long count = grad ? f.grad : f.obj;
        long succ = grad ? f.grad_success : f.obj_success;
        ShareLine line;
        line.pct = all == 0 ? 0.0 : 100.0 * count / all;
        line.success = count == 0 ? 0.0 : 100.0 * succ / count;
        out.push_back(line);
    }
    return out;
}

} // namespace

std::string emit_report(const SuiteReport& report, ReportFormat fmt,
                        const std::string& out_dir) {
    std::string base = out_dir + "/report_" + report.solver_label;
    std::string path;
    std::ofstream out;
    switch (fmt) {
        case ReportFormat::Json: {
            path = base + ".json";
            out.open(path);
            if (!out) throw IoError("cannot write " + path);
            json j;
            j["solver"] = report.solver_label;
            j["mode"] = solver_mode_name(report.mode);
            j["relax_a"] = report.relax_a;
            j["formats"] = report.format_names;
            j["format_bits"] = report.format_bits;
            j["results"] = json::array();
            for (const auto& r : report.results) {
                j["results"].push_back({{"problem", r.problem},
                                        {"name", r.name},
                                        {"n", r.n},
                                        {"status", run_status_name(r.status)},
                                        {"iterations", r.iterations},
                                        {"successful_iterations", r.successful_iterations},
                                        {"f_final", r.f_final},
                                        {"gnorm_final", r.gnorm_final},
                                        {"invariant_violations", r.invariant_violations},
                                        {"counters", counters_to_json(r.counters)}});
            }
            out << j.dump(2) << "\n";
            break;
        }
        case ReportFormat::Csv: {
            path = base + ".csv";
            out.open(path);
            if (!out) throw IoError("cannot write " + path);
            out << "problem,n,status,iterations,successful_iterations,f_final,"
                   "gnorm_final";
            for (const auto& name : report.format_names)
                out << ",obj_" << name << ",obj_success_" << name << ",grad_" << name
                    << ",grad_success_" << name;
            out << "\n";
            out.precision(17);
            for (const auto& r : report.results) {
                out << r.problem << "," << r.n << "," << run_status_name(r.status)
                    << "," << r.iterations << "," << r.successful_iterations << ","
                    << r.f_final << "," << r.gnorm_final;
                for (const auto& f : r.counters.per_format)
                    out << "," << f.obj << "," << f.obj_success << "," << f.grad << ","
                        << f.grad_success;
                out << "\n";
            }
            break;
        }
        case ReportFormat::TextTable: {
            path = base + ".txt";
            out.open(path);
            if (!out) throw IoError("cannot write " + path);
            EvalCounters totals = report.totals();
            auto obj = shares(totals, false);
            auto grad = shares(totals, true);
            char buf[256];
            out << "solver: " << report.solver_label << "\n";
            std::snprintf(buf, sizeof(buf), "FO %ld   MI %ld   F %ld   ST %ld\n",
                          report.count_status(RunStatus::FirstOrder),
                          report.count_status(RunStatus::MaxIter),
                          report.count_status(RunStatus::PrecisionFailure),
                          report.count_status(RunStatus::Stalled));
            out << buf;
            out << "% of obj. eval. (success rate in %):";
            for (std::size_t i = 0; i < obj.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "  %d bits %.1f (%.1f)",
                              report.format_bits[i], obj[i].pct, obj[i].success);
                out << buf;
            }
            out << "\n% of grad. eval. (success rate in %):";
            for (std::size_t i = 0; i < grad.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "  %d bits %.1f (%.1f)",
                              report.format_bits[i], grad[i].pct, grad[i].success);
                out << buf;
            }
            out << "\n";
            break;
        }
    }
    return path;
}

void emit_costs_csv(const std::vector<SuiteReport>& reports,
                    const std::vector<FormatStack>& stacks, const EffortModel& model,
                    const std::string& path) {
    if (reports.size() != stacks.size())
        throw InvalidConfig("emit_costs_csv: one stack per report required");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "problem,solver,metric,cost\n";
    out.precision(17);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        for (const auto& r : reports[i].results) {
            EffortCost c = effort_cost(r.counters, stacks[i], model);
            const char* metrics[4] = {"obj_time", "obj_energy", "grad_time",
                                      "grad_energy"};
            double vals[4] = {c.obj_time, c.obj_energy, c.grad_time, c.grad_energy};
            for (int m = 0; m < 4; ++m) {
                out << r.problem << "," << reports[i].solver_label << ","
                    << metrics[m] << ",";
                if (r.solved())
                    out << vals[m];
                else
                    out << "inf";
                out << "\n";
            }
        }
    }
}

SuiteReport parse_suite_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    json j = json::parse(in);
    SuiteReport rep;
    rep.solver_label = j["solver"].get<std::string>();
    rep.mode = solver_mode_from_name(j["mode"].get<std::string>());
    rep.relax_a = j["relax_a"].get<double>();
    rep.format_names = j["formats"].get<std::vector<std::string>>();
    rep.format_bits = j["format_bits"].get<std::vector<int>>();
    for (const auto& rj : j["results"]) {
        ProblemResult r;
        r.problem = rj["problem"].get<std::string>();
        r.name = rj["name"].get<std::string>();
        r.n = rj["n"].get<int>();
        r.status = status_from_name(rj["status"].get<std::string>());
        r.iterations = rj["iterations"].get<long>();
        r.successful_iterations = rj["successful_iterations"].get<long>();
        r.f_final = rj["f_final"].get<double>();
        r.gnorm_final = rj["gnorm_final"].get<double>();
        r.invariant_violations = rj["invariant_violations"].get<long>();
        r.counters = counters_from_json(rj["counters"]);
        rep.results.push_back(std::move(r));
    }
    return rep;
}

} // namespace mpr2
