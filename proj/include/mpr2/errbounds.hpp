#pragma once

// Defined values: the rounding-error coefficients the solver treats as exact.
// All of them are computed in DefinedReal (double-double) precision.

#include <vector>

#include "mpr2/defined.hpp"
#include "mpr2/errors.hpp"
#include "mpr2/fpformat.hpp"
#include "mpr2/fpops.hpp"

namespace mpr2 {

// The three accumulation-bound formulas; Nu is the least pessimistic and the
// default.
enum class GammaFormula {
    NuOverOneMinusNu,      // n u / (1 - n u)
    NuOverOneMinusHalfNu,  // n u / (1 - n u / 2)
    Nu,                    // n u
};

GammaFormula gamma_formula_from_name(const std::string& name);
std::string gamma_formula_name(GammaFormula f);

// Bound on the accumulated relative perturbation of n rounded operations.
// Throws InvalidDimension when n*u >= 1.
DefinedReal gamma_n(long n, const DefinedReal& u, GammaFormula formula = GammaFormula::Nu);

// beta_n = max(|sqrt(1 - gamma_n) - 1|, |sqrt(1 + gamma_n) - 1|), the relative
// error bound for an in-format Euclidean norm.
DefinedReal beta_n(long n, const DefinedReal& u, GammaFormula formula = GammaFormula::Nu);

// alpha_{n+1} = 1 / (1 - gamma_{n+1}).
DefinedReal alpha_n(long n, const DefinedReal& u, GammaFormula formula = GammaFormula::Nu);

// Combined virtual rounding error of candidate addition plus downcast:
// u_g + u_c + u_g u_c, collapsing to u_g when the candidate format is at
// least as precise as the gradient format (u_c <= u_g).
DefinedReal u_prime(const DefinedReal& u_g, const DefinedReal& u_c);

// lambda = u_prime * (phi + 1).
DefinedReal lambda_k(const DefinedReal& phi, const DefinedReal& u_prime);

// Per-format cache of the defined values for one problem dimension.
class ErrorContext {
public:
    ErrorContext(long n, const FormatStack& stack,
                 GammaFormula formula = GammaFormula::Nu);

    long dimension() const { return n_; }
    GammaFormula formula() const { return formula_; }

    const DefinedReal& gamma_nn(FormatIndex pi) const { return at(pi).gamma_n; }
    const DefinedReal& gamma_np1(FormatIndex pi) const { return at(pi).gamma_np1; }
    const DefinedReal& gamma_np2(FormatIndex pi) const { return at(pi).gamma_np2; }
    const DefinedReal& beta_np2(FormatIndex pi) const { return at(pi).beta_np2; }
    const DefinedReal& alpha_np1(FormatIndex pi) const { return at(pi).alpha_np1; }
    const DefinedReal& u(FormatIndex pi) const { return at(pi).u; }

private:
    struct Cache {
        DefinedReal u;
        DefinedReal gamma_n;
        DefinedReal gamma_np1;
        DefinedReal gamma_np2;
        DefinedReal beta_np2;
        DefinedReal alpha_np1;
    };

    const Cache& at(FormatIndex pi) const { return cache_[static_cast<std::size_t>(pi - 1)]; }

    long n_;
    GammaFormula formula_;
    std::vector<Cache> cache_;
};

// Guaranteed upper bound on ||x|| / ||s|| from the two computed norms:
// phi = fl(||x||/||s||) * (1 + beta_{n+2}(u_x)) / (1 - beta_{n+2}(u_g)) * (1 + u_div),
// where u_div is the unit roundoff of the format the division is rounded in.
// norm_x and norm_s are the computed fl norms; throws DegenerateStep when
// norm_s is zero.
DefinedReal phi_bound(const FpEnv& env, TaggedValue norm_x, TaggedValue norm_s,
                      long n, GammaFormula formula, TaggedValue* phi_hat_out = nullptr);

// The aggregate error coefficient of the gradient step:
// mu = (alpha ws (1+lambda) + alpha lambda + u_g + gamma alpha) / (1 - u_g),
// with alpha = alpha_{n+1}(u_g) and gamma = gamma_{n+1}(u_g), evaluated
// term by term in the displayed order.
DefinedReal mu_k(const ErrorContext& ctx, FormatIndex pi_g, const DefinedReal& omega_g,
                 const DefinedReal& lambda);

// Same formula with explicitly supplied coefficients (used by tests and the
// exact-arithmetic regime).
DefinedReal mu_k_raw(const DefinedReal& alpha_np1, const DefinedReal& gamma_np1,
                     const DefinedReal& u_g, const DefinedReal& omega_g,
                     const DefinedReal& lambda);

} // namespace mpr2
