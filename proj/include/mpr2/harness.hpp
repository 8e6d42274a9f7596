#pragma once

// Benchmark harness: runs problem suites, aggregates per-format evaluation
// statistics, estimates time/energy effort against an all-double baseline and
// produces performance-profile data.

#include <string>
#include <vector>

#include "mpr2/solver.hpp"

namespace mpr2 {

// Analytic effort model: halving the bit width halves the computation time
// and quarters the energy.
struct EffortModel {
    double time_weight(const FpFormat& f) const { return f.storage_bits / 64.0; }
    double energy_weight(const FpFormat& f) const {
        double t = time_weight(f);
        return t * t;
    }
};

struct ProblemResult {
    std::string problem;  // "<name>_<n>"
    std::string name;
    int n = 0;
    RunStatus status = RunStatus::MaxIter;
    long iterations = 0;
    long successful_iterations = 0;
    double f_final = 0.0;
    double gnorm_final = 0.0;
    EvalCounters counters;
    long invariant_violations = 0;
    std::vector<std::string> notes;

    bool solved() const { return status == RunStatus::FirstOrder; }
};

struct SuiteReport {
    std::string solver_label;
    SolverMode mode = SolverMode::Mpr2Guaranteed;
    double relax_a = 1.0;
    std::vector<std::string> format_names;
    std::vector<int> format_bits;
    std::vector<ProblemResult> results;

    long count_status(RunStatus s) const;
    // per-format totals over all runs
    EvalCounters totals() const;
};

// Weighted evaluation effort of one run, per metric.
struct EffortCost {
    double obj_time = 0.0;
    double obj_energy = 0.0;
    double grad_time = 0.0;
    double grad_energy = 0.0;
};

EffortCost effort_cost(const EvalCounters& counters, const FormatStack& stack,
                       const EffortModel& model);

struct EffortRatios {
    double obj_time = 1.0;
    double obj_energy = 1.0;
    double grad_time = 1.0;
    double grad_energy = 1.0;
    long common_solved = 0;
};

// Ratio of weighted evaluation effort between a multi-precision run set and
// the all-finest-format baseline (denominator weights are 1 per evaluation).
// Counters must be summed over the same solved-problem intersection.
EffortRatios effort_ratios(const EvalCounters& mp, const FormatStack& mp_stack,
                           const EvalCounters& baseline, const EffortModel& model);

// Convenience: intersect solved problems of two suite reports, sum counters
// and compute the ratios. Throws EmptyIntersection when no problem is solved
// by both.
EffortRatios compare_efforts(const SuiteReport& mp, const FormatStack& mp_stack,
                             const SuiteReport& baseline, const EffortModel& model);

// Run every (name, n) of the selection under one configuration. Per-problem
// failures are recorded as statuses, never propagated.
SuiteReport run_suite(const SolverConfig& cfg,
                      const std::vector<std::pair<std::string, int>>& selection,
                      const std::string& label = "");

// ---------------------------------------------------------------------------
// Performance profiles
// ---------------------------------------------------------------------------

struct ProfileData {
    std::vector<std::string> solvers;
    std::vector<double> taus;
    // fractions[s][t]: share of problems with cost ratio <= taus[t] for solver s
    std::vector<std::vector<double>> fractions;
};

// Standard ratio-to-best step functions. costs[p][s] is the cost of solver s
// on problem p, +infinity for unsolved. The tau grid is taken from `grid`
// when provided, otherwise a fixed geometric grid from 1 to slightly past the
// largest finite ratio.
ProfileData performance_profile(const std::vector<std::string>& solvers,
                                const std::vector<std::vector<double>>& costs,
                                const std::vector<double>* grid = nullptr);

std::string profile_to_csv(const ProfileData& data, const std::string& metric);

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

enum class ReportFormat { Csv, Json, TextTable };

// Writes report_<label>.<ext> into out_dir and returns the file path.
std::string emit_report(const SuiteReport& report, ReportFormat fmt,
                        const std::string& out_dir);

// Long-format costs table (problem,solver,metric,cost) for profile input.
void emit_costs_csv(const std::vector<SuiteReport>& reports,
                    const std::vector<FormatStack>& stacks, const EffortModel& model,
                    const std::string& path);

SuiteReport parse_suite_report_json(const std::string& path);

} // namespace mpr2
