#pragma once

// Exact arbitrary-precision rational arithmetic. This backs the test-problem
// reference evaluations and the error-bound oracles; it is deliberately
// simple (schoolbook everything) since oracle operands stay small.

#include <cstdint>
#include <string>
#include <vector>

#include "mpr2/defined.hpp"
#include "mpr2/errors.hpp"

namespace mpr2 {

class BigInt {
public:
    BigInt() = default;
    BigInt(std::int64_t v);

    static BigInt from_u64(std::uint64_t v);

    bool is_zero() const { return sign_ == 0; }
    int sign() const { return sign_; }
    BigInt negated() const;
    BigInt abs() const;

    // number of significant bits of |x|; 0 for zero
    int bit_length() const;
    // number of trailing zero bits of |x|; 0 for zero
    int trailing_zeros() const;
    bool is_odd() const;

    BigInt shl(int bits) const;
    BigInt shr(int bits) const;

    friend BigInt operator+(const BigInt& a, const BigInt& b);
    friend BigInt operator-(const BigInt& a, const BigInt& b);
    friend BigInt operator*(const BigInt& a, const BigInt& b);

    // quotient truncated toward zero, remainder has the dividend's sign
    static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);
    friend BigInt operator/(const BigInt& a, const BigInt& b);
    friend BigInt operator%(const BigInt& a, const BigInt& b);

    static int cmp(const BigInt& a, const BigInt& b);
    friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const BigInt& a, const BigInt& b) { return cmp(a, b) != 0; }
    friend bool operator<(const BigInt& a, const BigInt& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const BigInt& a, const BigInt& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const BigInt& a, const BigInt& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const BigInt& a, const BigInt& b) { return cmp(a, b) >= 0; }

    static BigInt gcd(BigInt a, BigInt b);

    // integer square root of a nonnegative value; exact is set when r*r == a
    static BigInt isqrt(const BigInt& a, bool* exact = nullptr);

    double to_double() const;
    std::string str() const;  // decimal

private:
    static int cmp_mag(const std::vector<std::uint32_t>& a,
                       const std::vector<std::uint32_t>& b);
    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    // requires |a| >= |b|
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    void trim();

    int sign_ = 0;
    std::vector<std::uint32_t> mag_;  // little-endian limbs, no leading zeros
};

class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t v) : num_(v), den_(1) {}
    Rational(BigInt num, BigInt den);

    // exact conversion; x must be finite
    static Rational from_double(double x);
    static Rational from_defined(const DefinedReal& x);
    static Rational pow2(int e);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    int sign() const { return num_.sign(); }
    Rational abs() const;
    Rational negated() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    static int cmp(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const Rational& a, const Rational& b) { return cmp(a, b) != 0; }
    friend bool operator<(const Rational& a, const Rational& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Rational& a, const Rational& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a, b) >= 0; }

    // nearest double (diagnostic helper; may be off by an ulp at ties)
    double to_double() const;
    std::string str() const;

private:
    void reduce();

    BigInt num_;
    BigInt den_;  // > 0
};

// A closed rational interval; exact values have lo == hi. Oracle evaluations
// propagate these so that sqrt of a non-square can still be enclosed.
struct RatInterval {
    Rational lo, hi;

    RatInterval() = default;
    explicit RatInterval(Rational v) : lo(v), hi(std::move(v)) {}
    RatInterval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {}

    bool exact() const { return lo == hi; }
    bool contains(const Rational& v) const { return lo <= v && v <= hi; }
};

RatInterval rat_add(const RatInterval& a, const RatInterval& b);
RatInterval rat_sub(const RatInterval& a, const RatInterval& b);
RatInterval rat_mul(const RatInterval& a, const RatInterval& b);
RatInterval rat_div(const RatInterval& a, const RatInterval& b);
RatInterval rat_neg(const RatInterval& a);

// Enclosure of sqrt(v) with width <= 2^-prec_bits * max(1, sqrt(v)); exact
// when v is a perfect rational square.
RatInterval rat_sqrt(const Rational& v, int prec_bits = 96);
RatInterval rat_sqrt(const RatInterval& v, int prec_bits = 96);

} // namespace mpr2
