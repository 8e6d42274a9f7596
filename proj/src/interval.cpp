#include "mpr2/interval.hpp"

#include <cmath>
#include <limits>

namespace mpr2 {

namespace {

double add_residual(double x, double y, double s) {
    double bb = s - x;
    return (x - (s - bb)) + (y - bb);
}

// The fma-based residuals of mul/div/sqrt are themselves rounded, so a zero
// residual only certifies exactness when the result is far enough from the
// double subnormal range for the true residual to be representable.
double guard_residual(double res, double ref, bool truly_zero) {
    if (res != 0.0) return res;
    if (truly_zero || std::fabs(ref) > 1e-290) return 0.0;
    return std::numeric_limits<double>::denorm_min();
}

} // namespace

double IntervalOps::down(double z, double residual) const {
    if (!std::isfinite(z)) throw OverflowError("interval endpoint overflow");
    double r = env_->round_to_format(z, pi_);
    if (residual == 0.0 && r == z) return r;
    return env_->next_down(r, pi_);
}

double IntervalOps::up(double z, double residual) const {
    if (!std::isfinite(z)) throw OverflowError("interval endpoint overflow");
    double r = env_->round_to_format(z, pi_);
    if (residual == 0.0 && r == z) return r;
    return env_->next_up(r, pi_);
}

Interval IntervalOps::enclose(double x) const {
    double r = env_->round_to_format(x, pi_);
    if (r == x) return {x, x};
    return {env_->next_down(r, pi_), env_->next_up(r, pi_)};
}

Interval IntervalOps::add(const Interval& a, const Interval& b) const {
    double slo = a.lo + b.lo;
    double shi = a.hi + b.hi;
    return {down(slo, add_residual(a.lo, b.lo, slo)),
            up(shi, add_residual(a.hi, b.hi, shi))};
}

Interval IntervalOps::sub(const Interval& a, const Interval& b) const {
    double slo = a.lo - b.hi;
    double shi = a.hi - b.lo;
    return {down(slo, add_residual(a.lo, -b.hi, slo)),
            up(shi, add_residual(a.hi, -b.lo, shi))};
}

Interval IntervalOps::mul(const Interval& a, const Interval& b) const {
    const double xs[2] = {a.lo, a.hi};
    const double ys[2] = {b.lo, b.hi};
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (double x : xs) {
        for (double y : ys) {
            double p = x * y;
            double res = guard_residual(std::fma(x, y, -p), p, x == 0.0 || y == 0.0);
            double l = down(p, res);
            double h = up(p, res);
            if (first) {
                lo = l;
                hi = h;
                first = false;
            } else {
                if (l < lo) lo = l;
                if (h > hi) hi = h;
            }
        }
    }
    return {lo, hi};
}

Interval IntervalOps::div(const Interval& a, const Interval& b) const {
    if (b.lo <= 0.0 && b.hi >= 0.0)
        throw DivisionByZero("interval division by an interval containing zero");
    const double xs[2] = {a.lo, a.hi};
    const double ys[2] = {b.lo, b.hi};
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (double x : xs) {
        for (double y : ys) {
            double q = x / y;
            // q exact iff x - q*y == 0
            double res = guard_residual(std::fma(q, y, -x), x, x == 0.0);
            double l = down(q, res);
            double h = up(q, res);
            if (first) {
                lo = l;
                hi = h;
                first = false;
            } else {
                if (l < lo) lo = l;
                if (h > hi) hi = h;
            }
        }
    }
    return {lo, hi};
}

Interval IntervalOps::neg(const Interval& a) const { return {-a.hi, -a.lo}; }

Interval IntervalOps::sqrt(const Interval& a) const {
    if (a.hi < 0.0) throw DomainError("interval sqrt of a negative interval");
    double lo_arg = a.lo < 0.0 ? 0.0 : a.lo;
    double slo = std::sqrt(lo_arg);
    double shi = std::sqrt(a.hi);
    double rlo = guard_residual(std::fma(slo, slo, -lo_arg), lo_arg, lo_arg == 0.0);
    double rhi = guard_residual(std::fma(shi, shi, -a.hi), a.hi, a.hi == 0.0);
    double l = down(slo, rlo);
    if (l < 0.0) l = 0.0;
    return {l, up(shi, rhi)};
}

} // namespace mpr2
