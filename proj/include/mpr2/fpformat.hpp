#pragma once

// Descriptors for the emulated IEEE-754 binary formats. A FormatStack is an
// ordered set of formats, index 1 = lowest precision, matching the solver's
// format bookkeeping. Emulated formats must have p <= 25 so that computing an
// elementary operation in native double and rounding once to the target is
// the exactly rounded target result (innocuous double rounding needs
// p_double >= 2 p_target + 2).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mpr2/defined.hpp"
#include "mpr2/errors.hpp"

namespace mpr2 {

struct FpFormat {
    std::string name;
    int precision = 0;   // significand bits including the hidden bit
    int emin = 0;        // minimum normalized exponent
    int emax = 0;        // maximum exponent
    int storage_bits = 0;

    double unit_roundoff() const { return std::ldexp(1.0, -precision); }
    double machine_eps() const { return std::ldexp(1.0, 1 - precision); }
    DefinedReal u() const { return DefinedReal(unit_roundoff()); }

    double max_finite() const {
        return (2.0 - std::ldexp(1.0, 1 - precision)) * std::ldexp(1.0, emax);
    }
    double min_normal() const { return std::ldexp(1.0, emin); }
    double min_subnormal() const { return std::ldexp(1.0, emin - precision + 1); }

    bool is_native_double() const { return precision == 53; }

    static FpFormat binary16() { return make("half", 11, -14, 15, 16); }
    static FpFormat binary32() { return make("single", 24, -126, 127, 32); }
    static FpFormat binary64() { return make("double", 53, -1022, 1023, 64); }
    static FpFormat bfloat16() { return make("bfloat16", 8, -126, 127, 16); }

    static FpFormat make(std::string name, int p, int emin, int emax, int bits) {
        FpFormat f;
        f.name = std::move(name);
        f.precision = p;
        f.emin = emin;
        f.emax = emax;
        f.storage_bits = bits;
        f.validate();
        return f;
    }

    void validate() const {
        if (precision < 2)
            throw InvalidConfig("format precision must be at least 2 bits");
        if (precision > 25 && precision != 53)
            throw InvalidConfig(
                "format '" + name + "': emulation requires p <= 25 or native p = 53");
        if (emin >= emax)
            throw InvalidConfig("format '" + name + "': emin must be below emax");
        if (precision == 53 && (emin != -1022 || emax != 1023))
            throw InvalidConfig("p = 53 format must be IEEE binary64");
    }
};

// Format index pi: 1-based position in the stack, 1 = lowest precision.
using FormatIndex = int;

class FormatStack {
public:
    FormatStack() : FormatStack({FpFormat::binary16(), FpFormat::binary32(),
                                 FpFormat::binary64()}) {}

    explicit FormatStack(std::vector<FpFormat> formats) : formats_(std::move(formats)) {
        if (formats_.empty())
            throw InvalidConfig("format stack is empty");
        for (std::size_t i = 1; i < formats_.size(); ++i) {
            // strictly ordered by decreasing unit roundoff
            if (formats_[i].unit_roundoff() >= formats_[i - 1].unit_roundoff())
                throw InvalidConfig("format stack must be strictly ordered by "
                                    "decreasing unit roundoff");
            // ranges must nest so that upcasts are exact
            if (formats_[i].emax < formats_[i - 1].emax ||
                formats_[i].emin > formats_[i - 1].emin)
                throw InvalidConfig("format stack ranges must nest: '" +
                                    formats_[i].name + "' cannot hold every '" +
                                    formats_[i - 1].name + "' value");
        }
    }

    FormatIndex lowest() const { return 1; }
    FormatIndex highest() const { return static_cast<FormatIndex>(formats_.size()); }
    int size() const { return static_cast<int>(formats_.size()); }

    const FpFormat& operator[](FormatIndex pi) const {
        if (pi < 1 || pi > size())
            throw InvalidConfig("format index out of range: " + std::to_string(pi));
        return formats_[static_cast<std::size_t>(pi - 1)];
    }

    double unit_roundoff(FormatIndex pi) const { return (*this)[pi].unit_roundoff(); }

    FormatIndex by_name(const std::string& name) const {
        for (int i = 0; i < size(); ++i)
            if (formats_[static_cast<std::size_t>(i)].name == name) return i + 1;
        throw InvalidConfig("unknown format name: " + name);
    }

    // a single-format stack holding only the finest format
    FormatStack finest_only() const {
        return FormatStack({formats_.back()});
    }

private:
    std::vector<FpFormat> formats_;
};

} // namespace mpr2
