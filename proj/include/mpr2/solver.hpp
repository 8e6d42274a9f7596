#pragma once

// Quadratic-regularization solvers: R2 (single format, no error tracking) and
// MPR2 (multi-precision with full rounding-error accounting), plus the relaxed
// practical variant. One engine implements all three; they differ in the
// evaluation-error backend, the stopping rule and the available format stack.

#include <optional>
#include <string>
#include <vector>

#include "mpr2/errbounds.hpp"
#include "mpr2/evalmodel.hpp"
#include "mpr2/fpops.hpp"
#include "mpr2/problems.hpp"

namespace mpr2 {

enum class SolverMode { R2, Mpr2Guaranteed, Mpr2Relaxed };
enum class RunStatus { FirstOrder, MaxIter, PrecisionFailure, Stalled };

SolverMode solver_mode_from_name(const std::string& name);
std::string solver_mode_name(SolverMode m);
std::string run_status_name(RunStatus s);

struct SolverConfig {
    SolverMode mode = SolverMode::Mpr2Guaranteed;
    FormatStack stack{};
    GammaFormula gamma_formula = GammaFormula::Nu;

    double eta0 = 0.05;
    double eta1 = 0.1;
    double eta2 = 0.7;
    double gamma1 = 0.5;
    double gamma2 = 2.0;
    double gamma3 = 2.0;
    double kappa_mu = 0.2;

    double sigma0 = 1.0;                     // power of two
    double sigma_min = 0x1p-20;              // power of two
    double eps = 0x1p-26;                    // ~1.49e-8
    long max_iter = 10000;

    double relax_a = 1.0;                    // relaxation of the mu condition
    bool rho_correction = false;             // finite-precision rho conditions
    bool allow_published_params = false;         // permit gamma2 == 1
    bool disable_error_sources = false;      // zero every rounding-error term
    bool check_invariants = true;
    bool keep_iterates = false;
    std::string trace_path;                  // JSONL stream, empty = off
};

// Verifies the parameter conditions; throws InvalidConfig naming the violated
// inequality, returns human-readable warnings for accepted borderline cases.
std::vector<std::string> validate_params(const SolverConfig& cfg);

// s = fl(-g / sigma) componentwise in g's format. sigma must be a power of
// two representable in that format.
TaggedVector compute_step(const FpEnv& env, const TaggedVector& ghat, double sigma,
                          RoundStatus* st = nullptr);

// Approximate Taylor-series decrease fl(g^T s) negated; nonnegative.
TaggedValue model_decrease(const FpEnv& env, const TaggedVector& ghat,
                           const TaggedVector& shat, RoundStatus* st = nullptr);

// fl(x + s) componentwise in s's format, then cast to pi_c.
TaggedVector compute_candidate(const FpEnv& env, const TaggedVector& xhat,
                               const TaggedVector& shat, FormatIndex pi_c,
                               RoundStatus* st = nullptr);

// eps / ((1 + beta)(1 + omega_g)).
DefinedReal stopping_threshold(const DefinedReal& eps, const DefinedReal& omega_g,
                               const DefinedReal& beta);

// Step-5 update; sets *overflowed when the new sigma leaves the double range.
double update_sigma(double sigma, const DefinedReal& rho, const SolverConfig& cfg,
                    bool* overflowed = nullptr);

struct FormatCounters {
    long obj = 0;
    long obj_success = 0;
    long grad = 0;
    long grad_success = 0;
};

struct EvalCounters {
    std::vector<FormatCounters> per_format;  // index pi-1

    explicit EvalCounters(int n_formats = 0)
        : per_format(static_cast<std::size_t>(n_formats)) {}
    FormatCounters& at(FormatIndex pi) { return per_format[static_cast<std::size_t>(pi - 1)]; }
    const FormatCounters& at(FormatIndex pi) const {
        return per_format[static_cast<std::size_t>(pi - 1)];
    }
    long total_obj() const;
    long total_grad() const;
};

// iteration flags
inline constexpr unsigned kFlagStepUnderflow = 1u;
inline constexpr unsigned kFlagNormUnderflow = 2u;
inline constexpr unsigned kFlagMuEscalated = 4u;
inline constexpr unsigned kFlagObjEscalated = 8u;
inline constexpr unsigned kFlagSigmaRangeEscalated = 16u;
inline constexpr unsigned kFlagOverflowRetry = 32u;

struct IterRecord {
    long k = 0;
    int pi_x = 1, pi_g = 1, pi_c = 1, pi_f = 1;
    double sigma = 0.0;
    double gnorm = 0.0;
    double delta_t = 0.0;
    double mu = 0.0;
    double rho = 0.0;
    bool accepted = false;
    unsigned flags = 0;
    std::vector<double> x;  // populated when keep_iterates
};

struct RunReport {
    RunStatus status = RunStatus::MaxIter;
    long iterations = 0;
    long successful_iterations = 0;
    TaggedVector x_final;
    double f_final = 0.0;
    double gnorm_final = 0.0;
    EvalCounters counters;
    std::vector<IterRecord> trace;

    // verification extras
    DefinedReal f0_reference;               // extended-precision f(x0)
    DefinedReal final_grad_norm_reference;  // extended-precision ||grad f|| at exit
    long invariant_violations = 0;
    std::vector<std::string> invariant_notes;
    std::vector<std::string> warnings;
};

RunReport run_mpr2(const Problem& p, const SolverConfig& cfg);
RunReport run_r2(const Problem& p, const SolverConfig& cfg);

} // namespace mpr2
