#pragma once

// Test-side oracles, independent of the library's arithmetic paths:
//  - a bit-level binary16 rounding oracle working on the IEEE encoding,
//  - rational helpers for norm/dot error-bound checks,
//  - a deterministic RNG producing format-representable points.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "mpr2/defined.hpp"
#include "mpr2/fpops.hpp"
#include "mpr2/rational.hpp"

namespace oracles {

// Round a double to binary16 by direct significand manipulation (round to
// nearest, ties to even). Returns the decoded double value; sets *overflow
// when the rounded magnitude exceeds 65504.
inline double half_round_bits(double x, bool* overflow) {
    *overflow = false;
    if (x == 0.0 || !std::isfinite(x)) return x;
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    std::uint64_t sign = bits >> 63;
    int exp = static_cast<int>((bits >> 52) & 0x7FF) - 1023;
    std::uint64_t frac = bits & 0xFFFFFFFFFFFFFull;
    // normalized double assumed (inputs in these tests are normal)
    std::uint64_t sig = (1ull << 52) | frac;  // 53-bit significand, value sig*2^(exp-52)

    // target quantum: 2^(q) with q = max(exp, -14) - 10
    int q = (exp < -14 ? -14 : exp) - 10;
    int shift = (exp - 52) - q;  // sig * 2^(exp-52) = (sig << shift) * 2^q
    std::uint64_t scaled;
    bool round_up = false;
    if (shift >= 0) {
        scaled = sig << shift;
    } else {
        int s = -shift;
        if (s >= 64) {
            scaled = 0;
            // all bits shifted out; x != 0 so the discarded part is nonzero
            round_up = false;  // far below half quantum
        } else {
            scaled = sig >> s;
            std::uint64_t rem = sig & ((1ull << s) - 1);
            std::uint64_t halfway = 1ull << (s - 1);
            if (rem > halfway) round_up = true;
            else if (rem == halfway) round_up = (scaled & 1ull) != 0;  // tie to even
        }
    }
    if (round_up) scaled += 1;
    double mag = std::ldexp(static_cast<double>(scaled), q);
    if (mag > 65504.0) {
        *overflow = true;
        return sign ? -HUGE_VAL : HUGE_VAL;
    }
    return sign ? -mag : mag;
}

// deterministic generator of finite values representable in a format
class FormatRng {
public:
    FormatRng(std::uint64_t seed, const mpr2::FpEnv& env, mpr2::FormatIndex pi)
        : rng_(seed), env_(&env), pi_(pi) {}

    // uniform-ish in [-scale, scale], rounded onto the format grid
    double value(double scale = 1.0) {
        std::uniform_real_distribution<double> dist(-scale, scale);
        return env_->round_to_format(dist(rng_), pi_);
    }

    // nonzero value with magnitude in [lo_scale, hi_scale]
    double normal_value(double lo_scale, double hi_scale) {
        std::uniform_real_distribution<double> mag(lo_scale, hi_scale);
        std::uniform_int_distribution<int> sign(0, 1);
        double v = env_->round_to_format(mag(rng_) * (sign(rng_) ? 1.0 : -1.0), pi_);
        if (v == 0.0) v = env_->round_to_format(lo_scale, pi_);
        return v;
    }

    mpr2::TaggedVector vector(std::size_t n, double scale = 1.0) {
        std::vector<double> vals;
        vals.reserve(n);
        for (std::size_t i = 0; i < n; ++i) vals.push_back(value(scale));
        return {vals, pi_};
    }

    std::mt19937_64& raw() { return rng_; }

private:
    std::mt19937_64 rng_;
    const mpr2::FpEnv* env_;
    mpr2::FormatIndex pi_;
};

inline mpr2::Rational rat(double x) { return mpr2::Rational::from_double(x); }
inline mpr2::Rational rat(const mpr2::DefinedReal& x) {
    return mpr2::Rational::from_defined(x);
}

// Exact dyadic value m * 2^e. Every FP value and every DefinedReal is dyadic,
// so bound checks over them avoid rational gcd reductions entirely.
struct Dyadic {
    mpr2::BigInt m;
    int e = 0;

    Dyadic() = default;
    Dyadic(mpr2::BigInt mag, int exp) : m(std::move(mag)), e(exp) {}

    static Dyadic from_double(double x) {
        if (x == 0.0) return {};
        int exp;
        double frac = std::frexp(x, &exp);
        auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
        return {mpr2::BigInt(mant), exp - 53};
    }
    static Dyadic from_defined(const mpr2::DefinedReal& x) {
        return add(from_double(x.hi()), from_double(x.lo()));
    }

    static Dyadic add(const Dyadic& a, const Dyadic& b) {
        if (a.m.is_zero()) return b;
        if (b.m.is_zero()) return a;
        int e = std::min(a.e, b.e);
        return {a.m.shl(a.e - e) + b.m.shl(b.e - e), e};
    }
    static Dyadic sub(const Dyadic& a, const Dyadic& b) {
        return add(a, {b.m.negated(), b.e});
    }
    static Dyadic mul(const Dyadic& a, const Dyadic& b) {
        if (a.m.is_zero() || b.m.is_zero()) return {};
        return {a.m * b.m, a.e + b.e};
    }
    Dyadic abs() const { return {m.abs(), e}; }
    static int cmp(const Dyadic& a, const Dyadic& b) {
        Dyadic d = sub(a, b);
        return d.m.sign();
    }
    friend bool operator<(const Dyadic& a, const Dyadic& b) { return cmp(a, b) < 0; }
    friend bool operator>(const Dyadic& a, const Dyadic& b) { return cmp(a, b) > 0; }
    friend bool operator<=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) <= 0; }
    friend bool operator>=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) >= 0; }
};

inline Dyadic dyadic_dot(const std::vector<double>& x, const std::vector<double>& y) {
    Dyadic acc;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc = Dyadic::add(acc, Dyadic::mul(Dyadic::from_double(x[i]),
                                           Dyadic::from_double(y[i])));
    return acc;
}

inline Dyadic dyadic_abs_dot(const std::vector<double>& x,
                             const std::vector<double>& y) {
    Dyadic acc;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc = Dyadic::add(acc, Dyadic::mul(Dyadic::from_double(x[i]).abs(),
                                           Dyadic::from_double(y[i]).abs()));
    return acc;
}

inline mpr2::Rational rational_dot(const std::vector<double>& x,
                                   const std::vector<double>& y) {
    mpr2::Rational acc(0);
    for (std::size_t i = 0; i < x.size(); ++i) acc += rat(x[i]) * rat(y[i]);
    return acc;
}

inline mpr2::Rational rational_abs_dot(const std::vector<double>& x,
                                       const std::vector<double>& y) {
    mpr2::Rational acc(0);
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += rat(x[i]).abs() * rat(y[i]).abs();
    return acc;
}

inline mpr2::Rational rational_norm_sq(const std::vector<double>& x) {
    return rational_dot(x, x);
}

} // namespace oracles
