#include "mpr2/errbounds.hpp"

namespace mpr2 {

GammaFormula gamma_formula_from_name(const std::string& name) {
    if (name == "nu") return GammaFormula::Nu;
    if (name == "nu_over_1mnu") return GammaFormula::NuOverOneMinusNu;
    if (name == "nu_over_1mnu2") return GammaFormula::NuOverOneMinusHalfNu;
    throw InvalidConfig("unknown gamma formula: " + name);
}

std::string gamma_formula_name(GammaFormula f) {
    switch (f) {
        case GammaFormula::Nu: return "nu";
        case GammaFormula::NuOverOneMinusNu: return "nu_over_1mnu";
        case GammaFormula::NuOverOneMinusHalfNu: return "nu_over_1mnu2";
    }
    return "?";
}

DefinedReal gamma_n(long n, const DefinedReal& u, GammaFormula formula) {
    if (n < 0) throw InvalidDimension("gamma_n: negative n");
    if (n == 0) return DefinedReal(0.0);
    DefinedReal nu = DefinedReal(static_cast<double>(n)) * u;
    if (nu >= DefinedReal(1.0))
        throw InvalidDimension("gamma_n: n*u >= 1");
    switch (formula) {
        case GammaFormula::Nu:
            return nu;
        case GammaFormula::NuOverOneMinusNu:
            return nu / (DefinedReal(1.0) - nu);
        case GammaFormula::NuOverOneMinusHalfNu:
            return nu / (DefinedReal(1.0) - nu * DefinedReal(0.5));
    }
    throw InvalidConfig("gamma_n: unknown formula");
}

DefinedReal beta_n(long n, const DefinedReal& u, GammaFormula formula) {
    DefinedReal g = gamma_n(n, u, formula);
    if (g >= DefinedReal(1.0)) throw InvalidDimension("beta_n: gamma_n >= 1");
    DefinedReal one(1.0);
    DefinedReal down = abs(sqrt(one - g) - one);
    DefinedReal up = abs(sqrt(one + g) - one);
    return max(down, up);
}

DefinedReal alpha_n(long n, const DefinedReal& u, GammaFormula formula) {
    DefinedReal g = gamma_n(n + 1, u, formula);
    if (g >= DefinedReal(1.0)) throw InvalidDimension("alpha_n: gamma_{n+1} >= 1");
    return DefinedReal(1.0) / (DefinedReal(1.0) - g);
}

DefinedReal u_prime(const DefinedReal& u_g, const DefinedReal& u_c) {
    if (u_c <= u_g) return u_g;  // candidate precision >= gradient precision
    return u_g + u_c + u_g * u_c;
}

DefinedReal lambda_k(const DefinedReal& phi, const DefinedReal& u_prime) {
    return u_prime * (phi + DefinedReal(1.0));
}

ErrorContext::ErrorContext(long n, const FormatStack& stack, GammaFormula formula)
    : n_(n), formula_(formula) {
    if (n < 1) throw InvalidDimension("ErrorContext: dimension must be positive");
    // Assumption: gamma_{n+2} at the lowest-precision format must stay below 1
    DefinedReal u_max = stack[stack.lowest()].u();
    DefinedReal g = gamma_n(n + 2, u_max, formula);  // throws when (n+2)u >= 1
    if (g >= DefinedReal(1.0))
        throw InvalidDimension("dimension too large for the lowest-precision format");

    cache_.reserve(static_cast<std::size_t>(stack.size()));
    for (FormatIndex pi = 1; pi <= stack.size(); ++pi) {
        Cache c;
        c.u = stack[pi].u();
        c.gamma_n = gamma_n(n, c.u, formula);
        c.gamma_np1 = gamma_n(n + 1, c.u, formula);
        c.gamma_np2 = gamma_n(n + 2, c.u, formula);
        c.beta_np2 = beta_n(n + 2, c.u, formula);
        c.alpha_np1 = alpha_n(n, c.u, formula);
        cache_.push_back(c);
    }
}

DefinedReal phi_bound(const FpEnv& env, TaggedValue norm_x, TaggedValue norm_s,
                      long n, GammaFormula formula, TaggedValue* phi_hat_out) {
    if (norm_s.value == 0.0)
        throw DegenerateStep("phi_bound: fl(||s||) = 0");
    TaggedValue phi_hat = env.fp_div(norm_x, norm_s);
    if (phi_hat_out) *phi_hat_out = phi_hat;

    DefinedReal one(1.0);
    DefinedReal beta_x = beta_n(n + 2, env.stack()[norm_x.fmt].u(), formula);
    DefinedReal beta_s = beta_n(n + 2, env.stack()[norm_s.fmt].u(), formula);
    DefinedReal u_div = env.stack()[phi_hat.fmt].u();
    return DefinedReal(phi_hat.value) * ((one + beta_x) / (one - beta_s)) * (one + u_div);
}

DefinedReal mu_k_raw(const DefinedReal& alpha_np1, const DefinedReal& gamma_np1,
                     const DefinedReal& u_g, const DefinedReal& omega_g,
                     const DefinedReal& lambda) {
    DefinedReal one(1.0);
    DefinedReal numerator = alpha_np1 * omega_g * (one + lambda)
                          + alpha_np1 * lambda
                          + u_g
                          + gamma_np1 * alpha_np1;
    return numerator / (one - u_g);
}

DefinedReal mu_k(const ErrorContext& ctx, FormatIndex pi_g, const DefinedReal& omega_g,
                 const DefinedReal& lambda) {
    return mu_k_raw(ctx.alpha_np1(pi_g), ctx.gamma_np1(pi_g), ctx.u(pi_g), omega_g,
                    lambda);
}

} // namespace mpr2
