#pragma once

// Built-in unconstrained test problems. Each problem is an expression DAG
// with a start point exactly representable in the lowest format, a known
// lower bound where one exists, and a gradient-Lipschitz hint for the convex
// quadratic families (where a global constant is actually valid).

#include <optional>
#include <string>
#include <vector>

#include "mpr2/expr.hpp"
#include "mpr2/rational.hpp"

namespace mpr2 {

struct Problem {
    std::string name;
    int n = 0;
    Expr expr;
    std::vector<double> x0;
    std::optional<double> f_low;
    std::optional<double> lipschitz_hint;
    std::optional<std::vector<double>> minimizer;  // known exact minimizer, if any
};

struct ProblemInfo {
    std::string name;
    std::string dims;  // human-readable legal dimensions
    std::string formula;
};

// Names and legal dimensions of every registered problem.
const std::vector<ProblemInfo>& problem_registry();

// Construct a problem instance. Throws UnknownProblem / BadDimension.
Problem get_problem(const std::string& name, int n);

// The default benchmark selection (name, n) pairs.
std::vector<std::pair<std::string, int>> default_suite();

// Exact reference evaluation at a rational point. Polynomial problems give
// exact values; sqrt nodes propagate tight enclosures.
RatInterval exact_eval(const Problem& p, const std::vector<Rational>& x);
std::vector<RatInterval> exact_grad(const Problem& p, const std::vector<Rational>& x);

// Extended-precision reference evaluation at a double point.
DefinedReal defined_eval(const Problem& p, const std::vector<double>& x);
std::vector<DefinedReal> defined_grad(const Problem& p, const std::vector<double>& x);
DefinedReal defined_grad_norm(const Problem& p, const std::vector<double>& x);

} // namespace mpr2
