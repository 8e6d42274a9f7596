#include "mpr2/rational.hpp"

#include <algorithm>
#include <cmath>

namespace mpr2 {

// --------------------------------------------------------------------------
// BigInt
// --------------------------------------------------------------------------

BigInt::BigInt(std::int64_t v) {
    if (v == 0) return;
    sign_ = v < 0 ? -1 : 1;
    std::uint64_t m = v < 0 ? ~static_cast<std::uint64_t>(v) + 1
                            : static_cast<std::uint64_t>(v);
    while (m != 0) {
        mag_.push_back(static_cast<std::uint32_t>(m & 0xFFFFFFFFu));
        m >>= 32;
    }
}

BigInt BigInt::from_u64(std::uint64_t v) {
    BigInt b;
    if (v == 0) return b;
    b.sign_ = 1;
    while (v != 0) {
        b.mag_.push_back(static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
        v >>= 32;
    }
    return b;
}

BigInt BigInt::negated() const {
    BigInt b = *this;
    b.sign_ = -b.sign_;
    return b;
}

BigInt BigInt::abs() const {
    BigInt b = *this;
    if (b.sign_ < 0) b.sign_ = 1;
    return b;
}

int BigInt::bit_length() const {
    if (sign_ == 0) return 0;
    std::uint32_t top = mag_.back();
    int bits = 0;
    while (top != 0) {
        ++bits;
        top >>= 1;
    }
    return bits + 32 * static_cast<int>(mag_.size() - 1);
}

int BigInt::trailing_zeros() const {
    if (sign_ == 0) return 0;
    int tz = 0;
    for (std::uint32_t limb : mag_) {
        if (limb == 0) {
            tz += 32;
            continue;
        }
        while ((limb & 1u) == 0) {
            ++tz;
            limb >>= 1;
        }
        break;
    }
    return tz;
}

bool BigInt::is_odd() const { return sign_ != 0 && (mag_[0] & 1u) != 0; }

void BigInt::trim() {
    while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
    if (mag_.empty()) sign_ = 0;
}

BigInt BigInt::shl(int bits) const {
    if (sign_ == 0 || bits == 0) return bits < 0 ? shr(-bits) : *this;
    if (bits < 0) return shr(-bits);
    int limbshift = bits / 32;
    int bitshift = bits % 32;
    BigInt out;
    out.sign_ = sign_;
    out.mag_.assign(static_cast<std::size_t>(limbshift), 0u);
    std::uint32_t carry = 0;
    for (std::uint32_t limb : mag_) {
        if (bitshift == 0) {
            out.mag_.push_back(limb);
        } else {
            out.mag_.push_back((limb << bitshift) | carry);
            carry = limb >> (32 - bitshift);
        }
    }
    if (bitshift != 0 && carry != 0) out.mag_.push_back(carry);
    out.trim();
    return out;
}

BigInt BigInt::shr(int bits) const {
    if (sign_ == 0 || bits == 0) return bits < 0 ? shl(-bits) : *this;
    if (bits < 0) return shl(-bits);
    int limbshift = bits / 32;
    int bitshift = bits % 32;
    if (limbshift >= static_cast<int>(mag_.size())) return BigInt();
    BigInt out;
    out.sign_ = sign_;
    out.mag_.assign(mag_.begin() + limbshift, mag_.end());
    if (bitshift != 0) {
        for (std::size_t i = 0; i < out.mag_.size(); ++i) {
            std::uint32_t hi =
                (i + 1 < out.mag_.size()) ? out.mag_[i + 1] << (32 - bitshift) : 0u;
            out.mag_[i] = (out.mag_[i] >> bitshift) | hi;
        }
    }
    out.trim();
    return out;
}

int BigInt::cmp_mag(const std::vector<std::uint32_t>& a,
                    const std::vector<std::uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = a.size(); i-- > 0;) {
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
}

std::vector<std::uint32_t> BigInt::add_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
    const auto& big = a.size() >= b.size() ? a : b;
    const auto& small = a.size() >= b.size() ? b : a;
    std::vector<std::uint32_t> out;
    out.reserve(big.size() + 1);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < big.size(); ++i) {
        std::uint64_t s = carry + big[i] + (i < small.size() ? small[i] : 0u);
        out.push_back(static_cast<std::uint32_t>(s & 0xFFFFFFFFu));
        carry = s >> 32;
    }
    if (carry != 0) out.push_back(static_cast<std::uint32_t>(carry));
    return out;
}

std::vector<std::uint32_t> BigInt::sub_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    out.reserve(a.size());
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::int64_t d = static_cast<std::int64_t>(a[i]) - borrow -
                         (i < b.size() ? static_cast<std::int64_t>(b[i]) : 0);
        if (d < 0) {
            d += (static_cast<std::int64_t>(1) << 32);
            borrow = 1;
        } else {
            borrow = 0;
        }
        out.push_back(static_cast<std::uint32_t>(d));
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
}

BigInt operator+(const BigInt& a, const BigInt& b) {
    if (a.sign_ == 0) return b;
    if (b.sign_ == 0) return a;
    BigInt out;
    if (a.sign_ == b.sign_) {
        out.sign_ = a.sign_;
        out.mag_ = BigInt::add_mag(a.mag_, b.mag_);
    } else {
        int c = BigInt::cmp_mag(a.mag_, b.mag_);
        if (c == 0) return BigInt();
        if (c > 0) {
            out.sign_ = a.sign_;
            out.mag_ = BigInt::sub_mag(a.mag_, b.mag_);
        } else {
            out.sign_ = b.sign_;
            out.mag_ = BigInt::sub_mag(b.mag_, a.mag_);
        }
    }
    out.trim();
    return out;
}

BigInt operator-(const BigInt& a, const BigInt& b) { return a + b.negated(); }

BigInt operator*(const BigInt& a, const BigInt& b) {
    if (a.sign_ == 0 || b.sign_ == 0) return BigInt();
    BigInt out;
    out.sign_ = a.sign_ * b.sign_;
    out.mag_.assign(a.mag_.size() + b.mag_.size(), 0u);
    for (std::size_t i = 0; i < a.mag_.size(); ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < b.mag_.size(); ++j) {
            std::uint64_t cur = out.mag_[i + j] + carry +
                                static_cast<std::uint64_t>(a.mag_[i]) * b.mag_[j];
            out.mag_[i + j] = static_cast<std::uint32_t>(cur & 0xFFFFFFFFu);
            carry = cur >> 32;
        }
        std::size_t k = i + b.mag_.size();
        while (carry != 0) {
            std::uint64_t cur = out.mag_[k] + carry;
            out.mag_[k] = static_cast<std::uint32_t>(cur & 0xFFFFFFFFu);
            carry = cur >> 32;
            ++k;
        }
    }
    out.trim();
    return out;
}

void BigInt::divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
    if (b.sign_ == 0) throw DivisionByZero("BigInt division by zero");
    int cm = cmp_mag(a.mag_, b.mag_);
    if (a.sign_ == 0 || cm < 0) {
        q = BigInt();
        r = a;
        return;
    }
    // shift-and-subtract long division on magnitudes
    BigInt rem = a.abs();
    BigInt den = b.abs();
    int shift = rem.bit_length() - den.bit_length();
    BigInt cur = den.shl(shift);
    BigInt quo;
    quo.sign_ = 1;
    quo.mag_.assign(static_cast<std::size_t>(shift / 32 + 1), 0u);
    for (int i = shift; i >= 0; --i) {
        if (cmp_mag(cur.mag_, rem.mag_) <= 0) {
            rem = rem - cur;
            quo.mag_[static_cast<std::size_t>(i / 32)] |= (1u << (i % 32));
            if (rem.sign_ == 0) break;
        }
        cur = cur.shr(1);
    }
    quo.trim();
    q = quo;
    q.sign_ = quo.sign_ == 0 ? 0 : a.sign_ * b.sign_;
    r = rem;
    if (r.sign_ != 0) r.sign_ = a.sign_;
}

BigInt operator/(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    BigInt::divmod(a, b, q, r);
    return q;
}

BigInt operator%(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    BigInt::divmod(a, b, q, r);
    return r;
}

int BigInt::cmp(const BigInt& a, const BigInt& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_ ? -1 : 1;
    int c = cmp_mag(a.mag_, b.mag_);
    return a.sign_ >= 0 ? c : -c;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
    a = a.abs();
    b = b.abs();
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    int shift = std::min(a.trailing_zeros(), b.trailing_zeros());
    a = a.shr(a.trailing_zeros());
    // binary gcd
    while (!b.is_zero()) {
        b = b.shr(b.trailing_zeros());
        if (cmp(a, b) > 0) std::swap(a, b);
        b = b - a;
    }
    return a.shl(shift);
}

BigInt BigInt::isqrt(const BigInt& a, bool* exact) {
    if (a.sign_ < 0) throw DomainError("isqrt of negative value");
    if (a.is_zero()) {
        if (exact) *exact = true;
        return BigInt();
    }
    // Newton iteration with an over-estimate start, monotonically decreasing
    BigInt x = BigInt(1).shl((a.bit_length() + 1) / 2);
    while (true) {
        BigInt y = (x + a / x).shr(1);
        if (cmp(y, x) >= 0) break;
        x = y;
    }
    if (exact) *exact = (x * x == a);
    return x;
}

double BigInt::to_double() const {
    if (sign_ == 0) return 0.0;
    double v = 0.0;
    // use the top 96 bits, cheap and accurate enough for diagnostics
    int top = static_cast<int>(mag_.size());
    int first = std::max(0, top - 3);
    for (int i = top - 1; i >= first; --i)
        v = v * 4294967296.0 + mag_[static_cast<std::size_t>(i)];
    v = std::ldexp(v, 32 * first);
    return sign_ < 0 ? -v : v;
}

std::string BigInt::str() const {
    if (sign_ == 0) return "0";
    BigInt ten(10), cur = abs(), q, r;
    std::string digits;
    while (!cur.is_zero()) {
        BigInt::divmod(cur, ten, q, r);
        digits.push_back(static_cast<char>('0' + (r.is_zero() ? 0 : r.mag_[0])));
        cur = q;
    }
    if (sign_ < 0) digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
}

// --------------------------------------------------------------------------
// Rational
// --------------------------------------------------------------------------

Rational::Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw DivisionByZero("rational with zero denominator");
    if (den_.sign() < 0) {
        num_ = num_.negated();
        den_ = den_.negated();
    }
    reduce();
}

void Rational::reduce() {
    if (num_.is_zero()) {
        den_ = BigInt(1);
        return;
    }
    BigInt g = BigInt::gcd(num_, den_);
    if (g != BigInt(1)) {
        num_ = num_ / g;
        den_ = den_ / g;
    }
}

Rational Rational::from_double(double x) {
    if (!std::isfinite(x)) throw DomainError("from_double: not finite");
    if (x == 0.0) return Rational(0);
    int e;
    double m = std::frexp(x, &e);  // x = m * 2^e, 0.5 <= |m| < 1
    double scaled = std::ldexp(m, 53);
    auto mant = static_cast<std::int64_t>(scaled);  // exact 53-bit integer
    BigInt num(mant);
    int shift = e - 53;
    if (shift >= 0) return Rational(num.shl(shift), BigInt(1));
    return Rational(num, BigInt(1).shl(-shift));
}

Rational Rational::from_defined(const DefinedReal& x) {
    return from_double(x.hi()) + from_double(x.lo());
}

Rational Rational::pow2(int e) {
    if (e >= 0) return Rational(BigInt(1).shl(e), BigInt(1));
    return Rational(BigInt(1), BigInt(1).shl(-e));
}

Rational Rational::abs() const {
    Rational r = *this;
    r.num_ = r.num_.abs();
    return r;
}

Rational Rational::negated() const {
    Rational r = *this;
    r.num_ = r.num_.negated();
    return r;
}

Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw DivisionByZero("rational division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

int Rational::cmp(const Rational& a, const Rational& b) {
    return BigInt::cmp(a.num_ * b.den_, b.num_ * a.den_);
}

double Rational::to_double() const {
    if (num_.is_zero()) return 0.0;
    int shift = std::max(0, 80 - (num_.bit_length() - den_.bit_length()));
    BigInt q = num_.shl(shift) / den_;
    return std::ldexp(q.to_double(), -shift);
}

std::string Rational::str() const {
    if (den_ == BigInt(1)) return num_.str();
    return num_.str() + "/" + den_.str();
}

// --------------------------------------------------------------------------
// RatInterval
// --------------------------------------------------------------------------

RatInterval rat_add(const RatInterval& a, const RatInterval& b) {
    return {a.lo + b.lo, a.hi + b.hi};
}

RatInterval rat_sub(const RatInterval& a, const RatInterval& b) {
    return {a.lo - b.hi, a.hi - b.lo};
}

RatInterval rat_mul(const RatInterval& a, const RatInterval& b) {
    if (a.exact() && b.exact()) return RatInterval(a.lo * b.lo);
    Rational c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    Rational lo = c[0], hi = c[0];
    for (int i = 1; i < 4; ++i) {
        if (c[i] < lo) lo = c[i];
        if (hi < c[i]) hi = c[i];
    }
    return {lo, hi};
}

RatInterval rat_div(const RatInterval& a, const RatInterval& b) {
    if (b.lo.sign() <= 0 && b.hi.sign() >= 0)
        throw DivisionByZero("rat_div: denominator interval contains zero");
    RatInterval inv(Rational(1) / b.hi, Rational(1) / b.lo);
    return rat_mul(a, inv);
}

RatInterval rat_neg(const RatInterval& a) { return {a.hi.negated(), a.lo.negated()}; }

RatInterval rat_sqrt(const Rational& v, int prec_bits) {
    if (v.sign() < 0) throw DomainError("rat_sqrt of negative value");
    if (v.is_zero()) return RatInterval(Rational(0));
    // sqrt(num/den) = isqrt(num*den) / den; scale by 4^prec_bits for accuracy
    BigInt scaled = (v.num() * v.den()).shl(2 * prec_bits);
    bool exact = false;
    BigInt root = BigInt::isqrt(scaled, &exact);
    BigInt den = v.den().shl(prec_bits);
    Rational lo(root, den);
    if (exact) return RatInterval(lo);
    return {lo, Rational(root + BigInt(1), den)};
}

RatInterval rat_sqrt(const RatInterval& v, int prec_bits) {
    if (v.exact()) return rat_sqrt(v.lo, prec_bits);
    Rational lo_arg = v.lo.sign() < 0 ? Rational(0) : v.lo;
    return {rat_sqrt(lo_arg, prec_bits).lo, rat_sqrt(v.hi, prec_bits).hi};
}

} // namespace mpr2
