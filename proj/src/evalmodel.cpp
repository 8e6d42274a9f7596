#include "mpr2/evalmodel.hpp"

#include <cmath>

namespace mpr2 {

namespace {

// Slack absorbing the double-double roundoff of the norm/ratio computations;
// invisible at working scales but keeps the guaranteed bounds certain.
const DefinedReal kDefinedSlack = DefinedReal(1.0) + DefinedReal(std::ldexp(1.0, -90));

DefinedReal max_endpoint_distance(double value, double lo, double hi) {
    // differences of doubles are exact in double-double
    DefinedReal below = abs(DefinedReal(value) - DefinedReal(lo));
    DefinedReal above = abs(DefinedReal(hi) - DefinedReal(value));
    return max(below, above);
}

} // namespace

EvalErrorModel eval_model_from_name(const std::string& name) {
    if (name == "guaranteed") return EvalErrorModel::Guaranteed;
    if (name == "relaxed") return EvalErrorModel::Relaxed;
    if (name == "none") return EvalErrorModel::None;
    throw InvalidConfig("unknown evaluation error model: " + name);
}

void EvalModel::check_forbidden(const TaggedVector& x, FormatIndex fmt) const {
    if (fmt < x.fmt)
        throw ForbiddenEvaluation(
            "evaluation in " + env_->stack()[fmt].name +
            " at a point tagged " + env_->stack()[x.fmt].name);
}

Interval EvalModel::interval_extension(const Problem& p, const TaggedVector& x,
                                       FormatIndex fmt) const {
    check_forbidden(x, fmt);
    IntervalScalarOps ops{IntervalOps(*env_, fmt)};
    std::vector<Interval> xi;
    xi.reserve(x.size());
    for (double v : x.values) xi.push_back({v, v});
    Interval out = eval_expr(p.expr, ops, std::span<const Interval>(xi));

#ifndef NDEBUG
    // containment cross-check against the extended-precision reference value
    DefinedReal ref = defined_eval(p, x.values);
    DefinedReal pad = max(abs(ref), DefinedReal(1.0)) * DefinedReal(std::ldexp(1.0, -80));
    if (ref < DefinedReal(out.lo) - pad || ref > DefinedReal(out.hi) + pad)
        throw Error("interval containment check failed for " + p.name);
#endif
    return out;
}

ObjectiveEval EvalModel::eval_objective(const Problem& p, const TaggedVector& x,
                                        FormatIndex fmt) const {
    check_forbidden(x, fmt);
    ObjectiveEval out;
    RoundedScalarOps rops{env_, fmt, &out.status};
    double fhat = eval_expr(p.expr, rops, std::span<const double>(x.values));
    out.value = {fhat, fmt};
    out.fmt = fmt;
    switch (model_) {
        case EvalErrorModel::Guaranteed: {
            Interval box = interval_extension(p, x, fmt);
            out.omega = max_endpoint_distance(fhat, box.lo, box.hi) * kDefinedSlack;
            break;
        }
        case EvalErrorModel::Relaxed: {
            double two_u = 2.0 * env_->stack()[fmt].unit_roundoff();
            out.omega = DefinedReal(std::fabs(fhat)) * DefinedReal(two_u);
            break;
        }
        case EvalErrorModel::None:
            out.omega = DefinedReal(0.0);
            break;
    }
    return out;
}

GradientEval EvalModel::eval_gradient(const Problem& p, const TaggedVector& x,
                                      FormatIndex fmt) const {
    check_forbidden(x, fmt);
    GradientEval out;
    RoundedScalarOps rops{env_, fmt, &out.status};
    std::vector<double> grad;
    eval_expr_grad(p.expr, rops, std::span<const double>(x.values), grad);
    out.grad = {grad, fmt};
    out.fmt = fmt;
    switch (model_) {
        case EvalErrorModel::Guaranteed: {
            IntervalScalarOps iops{IntervalOps(*env_, fmt)};
            std::vector<Interval> xi;
            xi.reserve(x.size());
            for (double v : x.values) xi.push_back({v, v});
            std::vector<Interval> gbox;
            eval_expr_grad(p.expr, iops, std::span<const Interval>(xi), gbox);

            DefinedReal r2(0.0), g2(0.0);
            for (std::size_t i = 0; i < grad.size(); ++i) {
                DefinedReal ri = max_endpoint_distance(grad[i], gbox[i].lo, gbox[i].hi);
                r2 += ri * ri;
                DefinedReal gi(grad[i]);
                g2 += gi * gi;
            }
            out.radius_norm = sqrt(r2) * kDefinedSlack;
            if (g2.is_zero()) {
                if (!out.radius_norm.is_zero())
                    throw ZeroGradientBoundError(out.radius_norm, fmt);
                out.omega = DefinedReal(0.0);
            } else {
                out.omega = (out.radius_norm / sqrt(g2)) * kDefinedSlack;
            }
            break;
        }
        case EvalErrorModel::Relaxed:
            out.omega = DefinedReal(2.0 * env_->stack()[fmt].unit_roundoff());
            out.radius_norm = DefinedReal(0.0);
            break;
        case EvalErrorModel::None:
            out.omega = DefinedReal(0.0);
            out.radius_norm = DefinedReal(0.0);
            break;
    }
    return out;
}

} // namespace mpr2
