#pragma once

// Objective and gradient evaluation in a chosen format under one of the
// evaluation-error backends:
//   Guaranteed - interval arithmetic with outward rounding; omega bounds hold
//                with mathematical certainty.
//   Relaxed    - relative models omega_f = |f|*2u, omega_g = 2u.
//   None       - omega = 0; used by the plain R2 comparator and by runs with
//                every error source disabled.

#include "mpr2/errbounds.hpp"
#include "mpr2/expr.hpp"
#include "mpr2/fpops.hpp"
#include "mpr2/interval.hpp"
#include "mpr2/problems.hpp"

namespace mpr2 {

enum class EvalErrorModel { Guaranteed, Relaxed, None };

EvalErrorModel eval_model_from_name(const std::string& name);

struct ObjectiveEval {
    TaggedValue value;
    DefinedReal omega;  // absolute error bound on the objective
    FormatIndex fmt = 1;
    RoundStatus status;  // sticky flags of the rounded evaluation pass
};

struct GradientEval {
    TaggedVector grad;
    DefinedReal omega;        // relative error bound
    DefinedReal radius_norm;  // guaranteed mode: ||r|| of the enclosure radii
    FormatIndex fmt = 1;
    RoundStatus status;
};

// Thrown when the computed gradient is exactly zero but the guaranteed
// enclosure radius is not; the relative bound is undefined and the caller
// must decide using the absolute radius.
struct ZeroGradientBoundError : ZeroGradientBound {
    ZeroGradientBoundError(DefinedReal radius, FormatIndex pi)
        : ZeroGradientBound("gradient is zero with a nonzero enclosure radius"),
          radius_norm(radius), fmt(pi) {}
    DefinedReal radius_norm;
    FormatIndex fmt;
};

class EvalModel {
public:
    EvalModel(const FpEnv& env, EvalErrorModel model)
        : env_(&env), model_(model) {}

    EvalErrorModel model() const { return model_; }
    const FpEnv& env() const { return *env_; }

    // Throws ForbiddenEvaluation when fmt is coarser than x's format.
    ObjectiveEval eval_objective(const Problem& p, const TaggedVector& x,
                                 FormatIndex fmt) const;
    GradientEval eval_gradient(const Problem& p, const TaggedVector& x,
                               FormatIndex fmt) const;

    // Guaranteed enclosure of the exact objective value at the exact point x.
    Interval interval_extension(const Problem& p, const TaggedVector& x,
                                FormatIndex fmt) const;

private:
    void check_forbidden(const TaggedVector& x, FormatIndex fmt) const;

    const FpEnv* env_;
    EvalErrorModel model_;
};

} // namespace mpr2
