#pragma once

// Interval arithmetic with outward rounding in an emulated format. Each
// endpoint operation is rounded to nearest in the format and then widened by
// one representable step unless the operation was exact, so exact integer
// arithmetic keeps degenerate intervals. Exactness is detected with
// error-free transformations on the double intermediates.

#include "mpr2/fpops.hpp"

namespace mpr2 {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool degenerate() const { return lo == hi; }
    double width() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
};

class IntervalOps {
public:
    IntervalOps(const FpEnv& env, FormatIndex pi) : env_(&env), pi_(pi) {}

    FormatIndex fmt() const { return pi_; }

    // Enclose an exact double value in the format's grid.
    Interval enclose(double x) const;

    Interval add(const Interval& a, const Interval& b) const;
    Interval sub(const Interval& a, const Interval& b) const;
    Interval mul(const Interval& a, const Interval& b) const;
    Interval div(const Interval& a, const Interval& b) const;
    Interval neg(const Interval& a) const;
    Interval sqrt(const Interval& a) const;

private:
    // Round z to the format and step down/up unless the full operation was
    // exact (residual == 0 and z already on the grid).
    double down(double z, double residual) const;
    double up(double z, double residual) const;

    const FpEnv* env_;
    FormatIndex pi_;
};

} // namespace mpr2
