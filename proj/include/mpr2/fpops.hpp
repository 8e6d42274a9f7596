#pragma once

// Tagged values and the emulated multi-format arithmetic. Every value knows
// the index of the FP format it lives in; operations round to nearest (ties
// to even) in the higher-precision format of their operands. Emulated
// arithmetic computes each elementary operation in native double and rounds
// once to the target grid.

#include <cstdint>
#include <span>
#include <vector>

#include "mpr2/fpformat.hpp"

namespace mpr2 {

// Sticky flags accumulated across a sequence of rounded operations.
struct RoundStatus {
    bool underflow = false;  // a nonzero result rounded to subnormal or zero
    bool inexact = false;

    void merge(const RoundStatus& o) {
        underflow = underflow || o.underflow;
        inexact = inexact || o.inexact;
    }
};

struct TaggedValue {
    double value = 0.0;
    FormatIndex fmt = 1;
};

struct TaggedVector {
    std::vector<double> values;
    FormatIndex fmt = 1;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

enum class FpOp { Add, Sub, Mul, Div };

class FpEnv {
public:
    FpEnv() = default;
    explicit FpEnv(FormatStack stack) : stack_(std::move(stack)) {}

    const FormatStack& stack() const { return stack_; }

    // Round an exact double value to the nearest representable value of the
    // format, ties to even. Throws OverflowError when the rounded value
    // exceeds the format's finite range; sets the underflow flag when a
    // nonzero value lands on the subnormal grid (or at zero).
    double round_to_format(double x, FormatIndex pi, RoundStatus* st = nullptr) const;
    TaggedValue round_value(double x, FormatIndex pi, RoundStatus* st = nullptr) const {
        return {round_to_format(x, pi, st), pi};
    }

    // True when x is exactly representable in the format.
    bool representable(double x, FormatIndex pi) const;

    TaggedValue fp_op(TaggedValue a, TaggedValue b, FpOp op, RoundStatus* st = nullptr) const;

    TaggedValue fp_add(TaggedValue a, TaggedValue b, RoundStatus* st = nullptr) const {
        return fp_op(a, b, FpOp::Add, st);
    }
    TaggedValue fp_sub(TaggedValue a, TaggedValue b, RoundStatus* st = nullptr) const {
        return fp_op(a, b, FpOp::Sub, st);
    }
    TaggedValue fp_mul(TaggedValue a, TaggedValue b, RoundStatus* st = nullptr) const {
        return fp_op(a, b, FpOp::Mul, st);
    }
    TaggedValue fp_div(TaggedValue a, TaggedValue b, RoundStatus* st = nullptr) const {
        return fp_op(a, b, FpOp::Div, st);
    }

    // Exactly rounded square root in the value's own format.
    TaggedValue fp_sqrt(TaggedValue a, RoundStatus* st = nullptr) const;

    // Sequential multiply-then-accumulate, fixed left-to-right order, every
    // elementary operation rounded in the result format.
    TaggedValue fp_dot(const TaggedVector& x, const TaggedVector& y,
                       RoundStatus* st = nullptr) const;

    // fl(sqrt(fp_dot(x, x))), computed in x's format. No rescaling: the
    // squared sum may overflow and the error bound assumes the naive formula.
    TaggedValue fp_norm(const TaggedVector& x, RoundStatus* st = nullptr) const;

    // Componentwise conversion. Upcasts are exact, downcasts round to
    // nearest.
    TaggedVector cast(const TaggedVector& x, FormatIndex to, RoundStatus* st = nullptr) const;
    TaggedValue cast(TaggedValue x, FormatIndex to, RoundStatus* st = nullptr) const;

    TaggedVector tag_vector(std::vector<double> values, FormatIndex pi) const;

    // Next representable value strictly above / below x in the format.
    // Stepping above the largest finite value throws OverflowError.
    double next_up(double x, FormatIndex pi) const;
    double next_down(double x, FormatIndex pi) const;

    static FormatIndex result_format(FormatIndex a, FormatIndex b) {
        return a > b ? a : b;
    }

private:
    double round_finite(double x, const FpFormat& f, RoundStatus* st,
                        const char* what) const;

    FormatStack stack_;
};

} // namespace mpr2
