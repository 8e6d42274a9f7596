#include "doctest.h"

#include <random>

#include "mpr2/errbounds.hpp"
#include "oracles.hpp"

using namespace mpr2;

namespace {
const FpEnv env;
constexpr FormatIndex kHalf = 1, kSingle = 2, kDouble = 3;
const DefinedReal u_half(0x1p-11);

bool rat_close(const DefinedReal& dd, const Rational& exact, int log2_tol = -100) {
    Rational v = Rational::from_defined(dd);
    Rational err = (v - exact).abs();
    return err <= exact.abs() * Rational::pow2(log2_tol);
}
} // namespace

TEST_CASE("gamma_n frozen values") {
    CHECK(gamma_n(4, u_half, GammaFormula::Nu) == DefinedReal(0.001953125));
    // nu/(1-nu) at n=4, u=2^-11 is exactly 4/2044 = 1/511
    CHECK(rat_close(gamma_n(4, u_half, GammaFormula::NuOverOneMinusNu),
                    Rational(BigInt(1), BigInt(511))));
    // nu/(1-nu/2) at n=4 is (4/2048)/(1023/1024) = 2/1023
    CHECK(rat_close(gamma_n(4, u_half, GammaFormula::NuOverOneMinusHalfNu),
                    Rational(BigInt(2), BigInt(1023))));
    CHECK(gamma_n(0, u_half).is_zero());
    CHECK_THROWS_AS(gamma_n(2048, u_half), InvalidDimension);
}

TEST_CASE("gamma_n monotone in n and u") {
    for (auto formula : {GammaFormula::Nu, GammaFormula::NuOverOneMinusNu,
                         GammaFormula::NuOverOneMinusHalfNu}) {
        DefinedReal prev(0.0);
        for (long n = 1; n <= 64; n *= 2) {
            DefinedReal g = gamma_n(n, u_half, formula);
            CHECK(g > prev);
            prev = g;
        }
        CHECK(gamma_n(8, DefinedReal(0x1p-24), formula) <
              gamma_n(8, u_half, formula));
    }
}

TEST_CASE("beta_n frozen values and branch dominance") {
    CHECK(beta_n(0, u_half).is_zero());  // gamma = 0 -> beta = 0

    // n=4, u=2^-11, nu: gamma = 1/512, beta = 1 - sqrt(511/512)
    DefinedReal b = beta_n(4, u_half, GammaFormula::Nu);
    CHECK(b.to_double() == doctest::Approx(9.7703e-4).epsilon(1e-4));
    Rational one_minus_b = Rational(1) - Rational::from_defined(b);
    Rational err = (one_minus_b * one_minus_b - Rational(BigInt(511), BigInt(512))).abs();
    CHECK(err <= Rational::pow2(-98));

    // the sqrt(1-gamma) branch attains the max everywhere we sample
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        long n = 1 + static_cast<long>(rng() % 500);
        DefinedReal g = gamma_n(n, u_half, GammaFormula::Nu);
        if (g >= DefinedReal(1.0)) continue;
        DefinedReal one(1.0);
        DefinedReal down = abs(sqrt(one - g) - one);
        DefinedReal up = abs(sqrt(one + g) - one);
        CHECK(down >= up);
        CHECK(beta_n(n, u_half) == down);
        CHECK(beta_n(n, u_half) <= one);
    }
}

TEST_CASE("alpha_n frozen values") {
    // alpha uses gamma_{n+1}: n=3 -> 1/(1 - 4/2048) = 512/511
    CHECK(rat_close(alpha_n(3, u_half, GammaFormula::Nu),
                    Rational(BigInt(512), BigInt(511))));
    CHECK(alpha_n(5, DefinedReal(0.0)) == DefinedReal(1.0));
    // monotone increasing in u at fixed n
    CHECK(alpha_n(5, DefinedReal(0x1p-24)) < alpha_n(5, u_half));
    CHECK(alpha_n(3, u_half) >= DefinedReal(1.0));
}

TEST_CASE("u_prime") {
    DefinedReal ug(0x1p-11), uc(0x1p-24);
    // candidate more precise than gradient: collapses to u_g
    CHECK(u_prime(ug, uc) == ug);
    CHECK(u_prime(ug, ug) == ug);
    CHECK(u_prime(DefinedReal(0.0), DefinedReal(0.0)).is_zero());
    // u_g = 2^-24, u_c = 2^-11 (pi_c < pi_g): three-term sum, exactly
    Rational expect = Rational::pow2(-24) + Rational::pow2(-11) + Rational::pow2(-35);
    CHECK(Rational::from_defined(u_prime(uc, ug)) == expect);
}

TEST_CASE("lambda_k") {
    DefinedReal up(0.001);
    CHECK(lambda_k(DefinedReal(0.0), up) == up);
    CHECK(lambda_k(DefinedReal(1.0), up) == DefinedReal(0.002));
    // phi = 2047 at u' = 2^-11 reaches exactly 1: binary16 is unusable past it
    CHECK(lambda_k(DefinedReal(2047.0), DefinedReal(0x1p-11)) == DefinedReal(1.0));
}

TEST_CASE("error context caches and the dimension cap") {
    FormatStack stack;
    ErrorContext ctx(8, stack, GammaFormula::Nu);
    CHECK(ctx.dimension() == 8);
    CHECK(ctx.gamma_nn(kHalf) == DefinedReal(8.0 / 2048.0));
    CHECK(ctx.gamma_np1(kHalf) == DefinedReal(9.0 / 2048.0));
    CHECK(ctx.gamma_np2(kHalf) == DefinedReal(10.0 / 2048.0));
    CHECK(ctx.u(kDouble) == DefinedReal(0x1p-53));
    // alpha * (1 - gamma_{n+1}) == 1 to defined precision
    for (FormatIndex pi : {kHalf, kSingle, kDouble}) {
        DefinedReal prod = ctx.alpha_np1(pi) * (DefinedReal(1.0) - ctx.gamma_np1(pi));
        CHECK(abs(prod - DefinedReal(1.0)) < DefinedReal(0x1p-95));
    }

    // nu formula: gamma_{n+2} = (n+2)/2048 < 1 caps n at 2045 for binary16
    CHECK_NOTHROW(ErrorContext(2045, stack, GammaFormula::Nu));
    CHECK_THROWS_AS(ErrorContext(2046, stack, GammaFormula::Nu), InvalidDimension);
    // the division-based formula needs (n+2)u < 1/2
    CHECK_NOTHROW(ErrorContext(1021, stack, GammaFormula::NuOverOneMinusNu));
    CHECK_THROWS_AS(ErrorContext(1022, stack, GammaFormula::NuOverOneMinusNu),
                    InvalidDimension);
}

TEST_CASE("phi_bound guarantees the norm ratio") {
    long n = 8;
    for (FormatIndex pi : {kHalf, kSingle}) {
        oracles::FormatRng rng(700 + pi, env, pi);
        int hits = 0;
        for (int trial = 0; trial < 2000; ++trial) {
            TaggedVector x = rng.vector(static_cast<std::size_t>(n), 4.0);
            TaggedVector s = rng.vector(static_cast<std::size_t>(n), 4.0);
            Rational s2 = oracles::rational_norm_sq(s.values);
            if (s2.is_zero()) continue;
            TaggedValue nx, ns;
            try {
                nx = env.fp_norm(x);
                ns = env.fp_norm(s);
            } catch (const OverflowError&) {
                continue;
            }
            if (ns.value == 0.0) continue;
            DefinedReal phi = phi_bound(env, nx, ns, n, GammaFormula::Nu);
            // phi >= ||x|| / ||s||  <=>  phi^2 * ||s||^2 >= ||x||^2
            Rational phi_r = Rational::from_defined(phi);
            CHECK(phi_r * phi_r * s2 >= oracles::rational_norm_sq(x.values));
            ++hits;
        }
        CHECK(hits > 1500);
    }
}

TEST_CASE("phi_bound error and formula shape") {
    CHECK_THROWS_AS(phi_bound(env, {1.0, kHalf}, {0.0, kHalf}, 4, GammaFormula::Nu),
                    DegenerateStep);

    // matches the displayed formula built from its pieces
    TaggedValue nx{3.0, kHalf}, ns{2.0, kHalf};
    TaggedValue phi_hat;
    DefinedReal phi = phi_bound(env, nx, ns, 4, GammaFormula::Nu, &phi_hat);
    CHECK(phi_hat.value == 1.5);
    DefinedReal one(1.0);
    DefinedReal b = beta_n(6, u_half, GammaFormula::Nu);
    DefinedReal expect = DefinedReal(1.5) * ((one + b) / (one - b)) * (one + u_half);
    CHECK(phi == expect);
}

TEST_CASE("mu degenerates to omega_g in exact arithmetic") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> dist(0.0, 0.5);
    for (int trial = 0; trial < 2000; ++trial) {
        DefinedReal omega(dist(rng));
        DefinedReal mu = mu_k_raw(DefinedReal(1.0), DefinedReal(0.0), DefinedReal(0.0),
                                  omega, DefinedReal(0.0));
        CHECK(mu == omega);  // bitwise in double-double
    }
    // surviving term with omega = lambda = u = 0 is gamma * alpha
    FormatStack stack;
    ErrorContext ctx(4, stack);
    DefinedReal mu0 = mu_k(ctx, kHalf, DefinedReal(0.0), DefinedReal(0.0));
    DefinedReal expect = (ctx.u(kHalf) + ctx.gamma_np1(kHalf) * ctx.alpha_np1(kHalf)) /
                         (DefinedReal(1.0) - ctx.u(kHalf));
    CHECK(mu0 == expect);
}

TEST_CASE("mu matches an independent rational evaluation") {
    // n=4, u_g = u_c = 2^-11, omega_g = 2^-10, phi = 1
    FormatStack stack;
    ErrorContext ctx(4, stack);
    DefinedReal up = u_prime(ctx.u(kHalf), ctx.u(kHalf));
    DefinedReal lam = lambda_k(DefinedReal(1.0), up);
    DefinedReal mu = mu_k(ctx, kHalf, DefinedReal(0x1p-10), lam);

    Rational u = Rational::pow2(-11);
    Rational gamma = Rational(5) * u;  // gamma_{n+1}, nu formula
    Rational alpha = Rational(1) / (Rational(1) - gamma);
    Rational lam_r = u * Rational(2);  // u'(phi+1), u' = u_g, phi = 1
    Rational omega = Rational::pow2(-10);
    Rational num = alpha * omega * (Rational(1) + lam_r) + alpha * lam_r + u +
                   gamma * alpha;
    Rational expect = num / (Rational(1) - u);
    CHECK(rat_close(mu, expect, -95));
}

TEST_CASE("mu is monotone in each error source") {
    FormatStack stack;
    ErrorContext ctx(16, stack);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(0.0, 0.2);
    for (int trial = 0; trial < 500; ++trial) {
        DefinedReal omega(dist(rng)), lam(dist(rng));
        DefinedReal bump(1e-3);
        CHECK(mu_k(ctx, kHalf, omega + bump, lam) >= mu_k(ctx, kHalf, omega, lam));
        CHECK(mu_k(ctx, kHalf, omega, lam + bump) >= mu_k(ctx, kHalf, omega, lam));
        // coarser gradient format (larger u) never lowers mu
        CHECK(mu_k(ctx, kHalf, omega, lam) >= mu_k(ctx, kSingle, omega, lam));
        CHECK(mu_k(ctx, kSingle, omega, lam) >= mu_k(ctx, kDouble, omega, lam));
    }
    // larger n never lowers mu at fixed inputs
    ErrorContext small(4, stack), large(64, stack);
    CHECK(mu_k(large, kHalf, DefinedReal(0.01), DefinedReal(0.01)) >=
          mu_k(small, kHalf, DefinedReal(0.01), DefinedReal(0.01)));
}
