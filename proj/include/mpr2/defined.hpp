#pragma once

// Extended-precision scalar used for "defined values": quantities the solver
// treats as computed in exact arithmetic (mu, phi, gamma_n, beta_n, rho, ...).
// Represented as an unevaluated sum of two doubles (double-double), which
// carries ~106 significand bits; individual operations are accurate to about
// 2^-104 relative, far below the 2^-100 budget defined values must meet.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace mpr2 {

class DefinedReal {
public:
    constexpr DefinedReal() : hi_(0.0), lo_(0.0) {}
    constexpr DefinedReal(double x) : hi_(x), lo_(0.0) {}
    constexpr DefinedReal(double hi, double lo) : hi_(hi), lo_(lo) {}

    double hi() const { return hi_; }
    double lo() const { return lo_; }

    // hi is the correctly rounded double value of hi + lo by normalization.
    double to_double() const { return hi_; }

    static DefinedReal two_sum(double a, double b) {
        double s = a + b;
        double bb = s - a;
        double err = (a - (s - bb)) + (b - bb);
        return {s, err};
    }

    static DefinedReal quick_two_sum(double a, double b) {
        // requires |a| >= |b| or a == 0
        double s = a + b;
        double err = b - (s - a);
        return {s, err};
    }

    static DefinedReal two_prod(double a, double b) {
        double p = a * b;
        double err = std::fma(a, b, -p);
        return {p, err};
    }

    friend DefinedReal operator+(const DefinedReal& a, const DefinedReal& b) {
        DefinedReal s = two_sum(a.hi_, b.hi_);
        double lo = s.lo_ + a.lo_ + b.lo_;
        return quick_two_sum(s.hi_, lo);
    }

    friend DefinedReal operator-(const DefinedReal& a, const DefinedReal& b) {
        return a + DefinedReal(-b.hi_, -b.lo_);
    }

    friend DefinedReal operator-(const DefinedReal& a) {
        return {-a.hi_, -a.lo_};
    }

    friend DefinedReal operator*(const DefinedReal& a, const DefinedReal& b) {
        DefinedReal p = two_prod(a.hi_, b.hi_);
        double lo = p.lo_ + a.hi_ * b.lo_ + a.lo_ * b.hi_;
        return quick_two_sum(p.hi_, lo);
    }

    friend DefinedReal operator/(const DefinedReal& a, const DefinedReal& b) {
        // two Newton-like correction steps on the double quotient
        double q1 = a.hi_ / b.hi_;
        DefinedReal r = a - DefinedReal(q1) * b;
        double q2 = r.hi_ / b.hi_;
        r = r - DefinedReal(q2) * b;
        double q3 = r.hi_ / b.hi_;
        DefinedReal q = quick_two_sum(q1, q2);
        return q + DefinedReal(q3);
    }

    DefinedReal& operator+=(const DefinedReal& o) { return *this = *this + o; }
    DefinedReal& operator-=(const DefinedReal& o) { return *this = *this - o; }
    DefinedReal& operator*=(const DefinedReal& o) { return *this = *this * o; }
    DefinedReal& operator/=(const DefinedReal& o) { return *this = *this / o; }

    friend bool operator==(const DefinedReal& a, const DefinedReal& b) {
        return a.hi_ == b.hi_ && a.lo_ == b.lo_;
    }
    friend bool operator<(const DefinedReal& a, const DefinedReal& b) {
        return a.hi_ < b.hi_ || (a.hi_ == b.hi_ && a.lo_ < b.lo_);
    }
    friend bool operator>(const DefinedReal& a, const DefinedReal& b) { return b < a; }
    friend bool operator<=(const DefinedReal& a, const DefinedReal& b) { return !(b < a); }
    friend bool operator>=(const DefinedReal& a, const DefinedReal& b) { return !(a < b); }
    friend bool operator!=(const DefinedReal& a, const DefinedReal& b) { return !(a == b); }

    bool is_zero() const { return hi_ == 0.0; }
    bool is_negative() const { return hi_ < 0.0 || (hi_ == 0.0 && lo_ < 0.0); }
    bool is_finite() const { return std::isfinite(hi_) && std::isfinite(lo_); }

    std::string str() const;

private:
    double hi_;
    double lo_;
};

inline DefinedReal abs(const DefinedReal& a) {
    return a.is_negative() ? -a : a;
}

inline DefinedReal max(const DefinedReal& a, const DefinedReal& b) {
    return a < b ? b : a;
}

inline DefinedReal min(const DefinedReal& a, const DefinedReal& b) {
    return a < b ? a : b;
}

inline DefinedReal sqrt(const DefinedReal& a) {
    if (a.is_zero()) return DefinedReal(0.0);
    // one dd Newton step on the double estimate: s' = s + (a - s^2) / (2s)
    double s0 = std::sqrt(a.hi());
    DefinedReal s(s0);
    DefinedReal r = a - s * s;
    DefinedReal corr = r / (DefinedReal(2.0) * s);
    return s + corr;
}

inline DefinedReal ldexp(const DefinedReal& a, int e) {
    return {std::ldexp(a.hi(), e), std::ldexp(a.lo(), e)};
}

inline std::string DefinedReal::str() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", hi_ + lo_);
    return buf;
}

} // namespace mpr2
