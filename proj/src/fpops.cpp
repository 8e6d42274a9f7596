#include "mpr2/fpops.hpp"

#include <cmath>
#include <string>

namespace mpr2 {

namespace {

// Round a double to the nearest integer, ties to even. |v| is small enough
// that floor and the fractional difference are exact.
double round_integer_even(double v) {
    double f = std::floor(v);
    double d = v - f;
    if (d < 0.5) return f;
    if (d > 0.5) return f + 1.0;
    return std::fmod(f, 2.0) == 0.0 ? f : f + 1.0;
}

} // namespace

double FpEnv::round_finite(double x, const FpFormat& f, RoundStatus* st,
                           const char* what) const {
    if (!std::isfinite(x))
        throw OverflowError(std::string(what) + ": " + f.name + " overflow");
    if (f.is_native_double()) return x;
    if (x == 0.0) return x;

    int e = std::ilogb(x);
    int q = (e < f.emin ? f.emin : e) - (f.precision - 1);
    double scaled = std::ldexp(x, -q);  // exact: |scaled| < 2^p
    double r = round_integer_even(scaled);
    double y = std::ldexp(r, q);

    if (std::fabs(y) > f.max_finite())
        throw OverflowError(std::string(what) + ": " + f.name + " overflow");
    if (st) {
        if (std::fabs(y) < f.min_normal()) st->underflow = true;
        if (y != x) st->inexact = true;
    }
    return y;
}

double FpEnv::round_to_format(double x, FormatIndex pi, RoundStatus* st) const {
    const FpFormat& f = stack_[pi];
    if (!std::isfinite(x))
        throw OverflowError("round_to_format: input not finite");
    if (f.is_native_double()) {
        if (st && x != 0.0 && std::fabs(x) < f.min_normal()) st->underflow = true;
        return x;
    }
    return round_finite(x, f, st, "round_to_format");
}

bool FpEnv::representable(double x, FormatIndex pi) const {
    const FpFormat& f = stack_[pi];
    if (!std::isfinite(x)) return false;
    if (f.is_native_double()) return true;
    if (x == 0.0) return true;
    if (std::fabs(x) > f.max_finite()) return false;
    int e = std::ilogb(x);
    int q = (e < f.emin ? f.emin : e) - (f.precision - 1);
    double scaled = std::ldexp(x, -q);
    return scaled == std::floor(scaled);
}

TaggedValue FpEnv::fp_op(TaggedValue a, TaggedValue b, FpOp op, RoundStatus* st) const {
    FormatIndex pi = result_format(a.fmt, b.fmt);
    const FpFormat& f = stack_[pi];
    double z;
    switch (op) {
        case FpOp::Add: z = a.value + b.value; break;
        case FpOp::Sub: z = a.value - b.value; break;
        case FpOp::Mul: z = a.value * b.value; break;
        case FpOp::Div:
            if (b.value == 0.0) throw DivisionByZero("fp_op: division by zero");
            z = a.value / b.value;
            break;
        default: throw UnsupportedPrimitive("fp_op: unknown operator");
    }
    if (!std::isfinite(z))
        throw OverflowError("fp_op: " + f.name + " overflow");
    if (f.is_native_double()) {
        if (st && z != 0.0 && std::fabs(z) < f.min_normal()) st->underflow = true;
        return {z, pi};
    }
    return {round_finite(z, f, st, "fp_op"), pi};
}

TaggedValue FpEnv::fp_sqrt(TaggedValue a, RoundStatus* st) const {
    if (a.value < 0.0) throw DomainError("fp_sqrt: negative argument");
    double z = std::sqrt(a.value);
    const FpFormat& f = stack_[a.fmt];
    if (f.is_native_double()) return {z, a.fmt};
    return {round_finite(z, f, st, "fp_sqrt"), a.fmt};
}

TaggedValue FpEnv::fp_dot(const TaggedVector& x, const TaggedVector& y,
                          RoundStatus* st) const {
    if (x.size() != y.size())
        throw InvalidConfig("fp_dot: length mismatch");
    FormatIndex pi = result_format(x.fmt, y.fmt);
    const FpFormat& f = stack_[pi];
    if (x.size() == 0) return {0.0, pi};

    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double t = x.values[i] * y.values[i];
        if (!f.is_native_double()) t = round_finite(t, f, st, "fp_dot");
        else if (!std::isfinite(t)) throw OverflowError("fp_dot: double overflow");
        if (i == 0) {
            acc = t;
        } else {
            acc = acc + t;
            if (!f.is_native_double()) acc = round_finite(acc, f, st, "fp_dot");
            else if (!std::isfinite(acc)) throw OverflowError("fp_dot: double overflow");
        }
    }
    return {acc, pi};
}

TaggedValue FpEnv::fp_norm(const TaggedVector& x, RoundStatus* st) const {
    TaggedValue s = fp_dot(x, x, st);
    return fp_sqrt(s, st);
}

TaggedValue FpEnv::cast(TaggedValue x, FormatIndex to, RoundStatus* st) const {
    if (to >= x.fmt) return {x.value, to};  // exact embedding
    return {round_finite(x.value, stack_[to], st, "cast"), to};
}

TaggedVector FpEnv::cast(const TaggedVector& x, FormatIndex to, RoundStatus* st) const {
    TaggedVector out;
    out.fmt = to;
    out.values.reserve(x.size());
    if (to >= x.fmt) {
        out.values = x.values;
        return out;
    }
    const FpFormat& f = stack_[to];
    for (double v : x.values) out.values.push_back(round_finite(v, f, st, "cast"));
    return out;
}

TaggedVector FpEnv::tag_vector(std::vector<double> values, FormatIndex pi) const {
    for (double v : values) {
        if (!representable(v, pi))
            throw InvalidConfig("tag_vector: value not representable in " +
                                stack_[pi].name);
    }
    return {std::move(values), pi};
}

double FpEnv::next_up(double x, FormatIndex pi) const {
    const FpFormat& f = stack_[pi];
    if (x == 0.0) return f.min_subnormal();
    if (x < 0.0) return -next_down(-x, pi);
    int e = std::ilogb(x);
    int q = (e < f.emin ? f.emin : e) - (f.precision - 1);
    double y = x + std::ldexp(1.0, q);
    if (y > f.max_finite())
        throw OverflowError("next_up: " + f.name + " overflow");
    return y;
}

double FpEnv::next_down(double x, FormatIndex pi) const {
    const FpFormat& f = stack_[pi];
    if (x == 0.0) return -f.min_subnormal();
    if (x < 0.0) return -next_up(-x, pi);
    int e = std::ilogb(x);
    int q;
    if (x == std::ldexp(1.0, e) && e > f.emin)
        q = e - 1 - (f.precision - 1);  // stepping down across a binade boundary
    else
        q = (e < f.emin ? f.emin : e) - (f.precision - 1);
    return x - std::ldexp(1.0, q);
}

} // namespace mpr2
