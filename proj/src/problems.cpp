#include "mpr2/problems.hpp"

#include <cmath>
#include <functional>

namespace mpr2 {

namespace {

// fl(x) in binary16, used to canonicalize classical start points that are not
// representable in the lowest format (e.g. -1.2).
double to_half(double x) {
    static const FpEnv env{FormatStack({FpFormat::binary16()})};
    return env.round_to_format(x, 1);
}

std::vector<double> repeat_pattern(std::initializer_list<double> pat, int n) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v.push_back(*(pat.begin() + (static_cast<std::size_t>(i) % pat.size())));
    return v;
}

// integer spread, deliberately not powers of two so the iteration maps are
// inexact in low-precision formats
double diag_coeff(int i, int period) {
    int step = i % period + 1;
    return static_cast<double>(step * step);
}

Problem make_quadratic(const std::string& name, int n, int period, double offset) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    double dmax = 1.0;
    for (int i = 0; i < n; ++i) {
        double d = diag_coeff(i, period);
        dmax = std::max(dmax, d);
        // (d/2) x_i^2, with d/2 an exact power of two
        terms.push_back(b.mul(b.lit(d / 2.0), b.ipow(b.var(i), 2)));
    }
    std::int32_t root = b.sum(terms);
    if (offset != 0.0) root = b.add(root, b.lit(offset));
    Problem p;
    p.name = name;
    p.n = n;
    p.expr = b.build(root);
    p.x0 = std::vector<double>(static_cast<std::size_t>(n), 1.0);
    p.f_low = offset;
    p.lipschitz_hint = dmax;
    p.minimizer = std::vector<double>(static_cast<std::size_t>(n), 0.0);
    return p;
}

Problem make_sumsquares(int n) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    for (int i = 0; i < n; ++i)
        terms.push_back(b.mul(b.lit(static_cast<double>(i + 1)), b.ipow(b.var(i), 2)));
    Problem p;
    p.name = "sumsquares";
    p.n = n;
    p.expr = b.build(b.sum(terms));
    p.x0 = std::vector<double>(static_cast<std::size_t>(n), 1.0);
    p.f_low = 0.0;
    p.lipschitz_hint = 2.0 * n;
    p.minimizer = std::vector<double>(static_cast<std::size_t>(n), 0.0);
    return p;
}

Problem make_rosenbrock(int n, double offset) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    std::int32_t hundred = b.lit(100.0);
    std::int32_t one = b.lit(1.0);
    for (int i = 0; i + 1 < n; ++i) {
        std::int32_t xi = b.var(i);
        std::int32_t gap = b.sub(b.var(i + 1), b.ipow(xi, 2));
        terms.push_back(b.mul(hundred, b.ipow(gap, 2)));
        terms.push_back(b.ipow(b.sub(one, xi), 2));
    }
    std::int32_t root = b.sum(terms);
    if (offset != 0.0) root = b.add(root, b.lit(offset));
    Problem p;
    p.name = offset == 0.0 ? "rosenbrock" : "rosenbrock_offset";
    p.n = n;
    p.expr = b.build(root);
    p.x0 = repeat_pattern({to_half(-1.2), 1.0}, n);
    p.f_low = offset;
    p.minimizer = std::vector<double>(static_cast<std::size_t>(n), 1.0);
    return p;
}

Problem make_cube() {
    ExprBuilder b(2);
    std::int32_t gap = b.sub(b.var(1), b.ipow(b.var(0), 3));
    std::int32_t root = b.add(b.mul(b.lit(100.0), b.ipow(gap, 2)),
                              b.ipow(b.sub(b.lit(1.0), b.var(0)), 2));
    Problem p;
    p.name = "cube";
    p.n = 2;
    p.expr = b.build(root);
    p.x0 = {to_half(-1.2), -1.0};
    p.f_low = 0.0;
    p.minimizer = std::vector<double>{1.0, 1.0};
    return p;
}

Problem make_beale() {
    ExprBuilder b(2);
    std::int32_t x = b.var(0);
    std::int32_t y = b.var(1);
    std::int32_t t1 = b.sub(b.add(b.lit(1.5), b.mul(x, y)), x);
    std::int32_t t2 = b.sub(b.add(b.lit(2.25), b.mul(x, b.ipow(y, 2))), x);
    std::int32_t t3 = b.sub(b.add(b.lit(2.625), b.mul(x, b.ipow(y, 3))), x);
    std::int32_t root = b.sum({b.ipow(t1, 2), b.ipow(t2, 2), b.ipow(t3, 2)});
    Problem p;
    p.name = "beale";
    p.n = 2;
    p.expr = b.build(root);
    p.x0 = {1.0, 1.0};
    p.f_low = 0.0;
    p.minimizer = std::vector<double>{3.0, 0.5};
    return p;
}

Problem make_himmelblau() {
    ExprBuilder b(2);
    std::int32_t x = b.var(0);
    std::int32_t y = b.var(1);
    std::int32_t t1 = b.sub(b.add(b.ipow(x, 2), y), b.lit(11.0));
    std::int32_t t2 = b.sub(b.add(x, b.ipow(y, 2)), b.lit(7.0));
    Problem p;
    p.name = "himmelblau";
    p.n = 2;
    p.expr = b.build(b.add(b.ipow(t1, 2), b.ipow(t2, 2)));
    p.x0 = {1.0, 1.0};
    p.f_low = 0.0;
    p.minimizer = std::vector<double>{3.0, 2.0};
    return p;
}

Problem make_quartic(int n) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    for (int i = 0; i < n; ++i) {
        double t = 0.25 * (i % 4);
        std::int32_t gap = t == 0.0 ? b.var(i) : b.sub(b.var(i), b.lit(t));
        terms.push_back(b.ipow(gap, 4));
    }
    Problem p;
    p.name = "quartic";
    p.n = n;
    p.expr = b.build(b.sum(terms));
    p.x0 = std::vector<double>(static_cast<std::size_t>(n), 2.0);
    p.f_low = 0.0;
    std::vector<double> m;
    for (int i = 0; i < n; ++i) m.push_back(0.25 * (i % 4));
    p.minimizer = m;
    return p;
}

Problem make_woods(int n) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    for (int j = 0; j < n / 4; ++j) {
        std::int32_t x1 = b.var(4 * j), x2 = b.var(4 * j + 1);
        std::int32_t x3 = b.var(4 * j + 2), x4 = b.var(4 * j + 3);
        std::int32_t one = b.lit(1.0);
        terms.push_back(b.mul(b.lit(100.0), b.ipow(b.sub(x2, b.ipow(x1, 2)), 2)));
        terms.push_back(b.ipow(b.sub(one, x1), 2));
        terms.push_back(b.mul(b.lit(90.0), b.ipow(b.sub(x4, b.ipow(x3, 2)), 2)));
        terms.push_back(b.ipow(b.sub(one, x3), 2));
        terms.push_back(b.mul(b.lit(10.1),
                              b.add(b.ipow(b.sub(x2, one), 2), b.ipow(b.sub(x4, one), 2))));
        terms.push_back(b.mul(b.lit(19.8), b.mul(b.sub(x2, one), b.sub(x4, one))));
    }
    Problem p;
    p.name = "woods";
    p.n = n;
    p.expr = b.build(b.sum(terms));
    p.x0 = repeat_pattern({-3.0, -1.0, -3.0, -1.0}, n);
    p.f_low = 0.0;
    p.minimizer = std::vector<double>(static_cast<std::size_t>(n), 1.0);
    return p;
}

Problem make_dixon_price(int n) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    terms.push_back(b.ipow(b.sub(b.var(0), b.lit(1.0)), 2));
    for (int i = 1; i < n; ++i) {
        std::int32_t inner = b.sub(b.mul(b.lit(2.0), b.ipow(b.var(i), 2)), b.var(i - 1));
        terms.push_back(b.mul(b.lit(static_cast<double>(i + 1)), b.ipow(inner, 2)));
    }
    Problem p;
    p.name = "dixon_price";
    p.n = n;
    p.expr = b.build(b.sum(terms));
    p.x0 = std::vector<double>(static_cast<std::size_t>(n), -1.0);
    p.f_low = 0.0;
    return p;
}

Problem make_zakharov(int n) {
    ExprBuilder b(n);
    std::vector<std::int32_t> sq, lin;
    for (int i = 0; i < n; ++i) {
        sq.push_back(b.ipow(b.var(i), 2));
        lin.push_back(b.mul(b.lit(0.5 * (i + 1)), b.var(i)));
    }
    std::int32_t s = b.sum(lin);
    std::int32_t root = b.sum({b.sum(sq), b.ipow(s, 2), b.ipow(s, 4)});
    Problem p;
    p.name = "zakharov";
    p.n = n;
    p.expr = b.build(root);
    p.x0 = std::vector<double>(static_cast<std::size_t>(n), 0.5);
    p.f_low = 0.0;
    p.minimizer = std::vector<double>(static_cast<std::size_t>(n), 0.0);
    return p;
}

Problem make_tridia(int n) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    terms.push_back(b.ipow(b.sub(b.var(0), b.lit(1.0)), 2));
    for (int i = 1; i < n; ++i) {
        std::int32_t inner = b.sub(b.mul(b.lit(2.0), b.var(i)), b.var(i - 1));
        terms.push_back(b.mul(b.lit(static_cast<double>(i + 1)), b.ipow(inner, 2)));
    }
    Problem p;
    p.name = "tridia";
    p.n = n;
    p.expr = b.build(b.sum(terms));
    p.x0 = std::vector<double>(static_cast<std::size_t>(n), 1.0);
    p.f_low = 0.0;
    // Gershgorin bound on the (constant) Hessian
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    row[0] += 2.0;
    for (int i = 1; i < n; ++i) {
        double c = 2.0 * (i + 1);
        row[static_cast<std::size_t>(i)] += 4.0 * c;      // |8(i+1)| diagonal
        row[static_cast<std::size_t>(i - 1)] += 3.0 * c;  // |2(i+1)| diag + |-4(i+1)| off
        row[static_cast<std::size_t>(i)] += 2.0 * c;      // |-4(i+1)| off
    }
    double lmax = 0.0;
    for (double r : row) lmax = std::max(lmax, r);
    p.lipschitz_hint = lmax;
    return p;
}

Problem make_liarwhd(int n) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    std::int32_t x1 = b.var(0);
    for (int i = 0; i < n; ++i) {
        std::int32_t gap = b.sub(b.ipow(b.var(i), 2), x1);
        terms.push_back(b.mul(b.lit(4.0), b.ipow(gap, 2)));
        terms.push_back(b.ipow(b.sub(b.var(i), b.lit(1.0)), 2));
    }
    Problem p;
    p.name = "liarwhd";
    p.n = n;
    p.expr = b.build(b.sum(terms));
    p.x0 = std::vector<double>(static_cast<std::size_t>(n), 4.0);
    p.f_low = 0.0;
    p.minimizer = std::vector<double>(static_cast<std::size_t>(n), 1.0);
    return p;
}

Problem make_powell4(int n) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    for (int j = 0; j < n / 4; ++j) {
        std::int32_t x1 = b.var(4 * j), x2 = b.var(4 * j + 1);
        std::int32_t x3 = b.var(4 * j + 2), x4 = b.var(4 * j + 3);
        terms.push_back(b.ipow(b.add(x1, b.mul(b.lit(10.0), x2)), 2));
        terms.push_back(b.mul(b.lit(5.0), b.ipow(b.sub(x3, x4), 2)));
        terms.push_back(b.ipow(b.sub(x2, b.mul(b.lit(2.0), x3)), 4));
        terms.push_back(b.mul(b.lit(10.0), b.ipow(b.sub(x1, x4), 4)));
    }
    Problem p;
    p.name = "powell4";
    p.n = n;
    p.expr = b.build(b.sum(terms));
    p.x0 = repeat_pattern({3.0, -1.0, 0.0, 1.0}, n);
    p.f_low = 0.0;
    p.minimizer = std::vector<double>(static_cast<std::size_t>(n), 0.0);
    return p;
}

Problem make_nqmsep(int n, double offset) {
    ExprBuilder b(n);
    std::vector<std::int32_t> terms;
    for (int i = 0; i < n; ++i) {
        std::int32_t one = b.lit(1.0);
        terms.push_back(b.ipow(b.sub(b.var(i), one), 2));
        terms.push_back(b.ipow(b.sub(b.ipow(b.var(i), 2), one), 2));
    }
    std::int32_t root = b.sum(terms);
    if (offset != 0.0) root = b.add(root, b.lit(offset));
    Problem p;
    p.name = offset == 0.0 ? "nqmsep" : "nqmsep_offset";
    p.n = n;
    p.expr = b.build(root);
    p.x0 = std::vector<double>(static_cast<std::size_t>(n), 2.0);
    p.f_low = offset;
    p.minimizer = std::vector<double>(static_cast<std::size_t>(n), 1.0);
    return p;
}

struct Maker {
    std::string name;
    int min_n, max_n, multiple;
    std::string dims;
    std::string formula;
    std::function<Problem(int)> make;
};

const std::vector<Maker>& makers() {
    static const std::vector<Maker> m = {
        {"quadratic", 1, 100, 1, "1..100",
         "0.5 sum d_i x_i^2, d_i = (1 + i mod 5)^2",
         [](int n) { return make_quadratic("quadratic", n, 5, 0.0); }},
        {"ill_quadratic", 1, 100, 1, "1..100",
         "0.5 sum d_i x_i^2, d_i = (1 + i mod 11)^2",
         [](int n) { return make_quadratic("ill_quadratic", n, 11, 0.0); }},
        {"quadratic_offset", 1, 100, 1, "1..100",
         "0.5 sum d_i x_i^2 + 100",
         [](int n) {
             Problem p = make_quadratic("quadratic_offset", n, 5, 100.0);
             return p;
         }},
        {"sumsquares", 1, 100, 1, "1..100", "sum i x_i^2", make_sumsquares},
        {"rosenbrock", 2, 100, 1, "2..100",
         "sum 100(x_{i+1} - x_i^2)^2 + (1 - x_i)^2",
         [](int n) { return make_rosenbrock(n, 0.0); }},
        {"rosenbrock_offset", 2, 100, 1, "2..100",
         "sum 100(x_{i+1} - x_i^2)^2 + (1 - x_i)^2 + 100",
         [](int n) { return make_rosenbrock(n, 100.0); }},
        {"cube", 2, 2, 1, "2", "100(x_2 - x_1^3)^2 + (1 - x_1)^2",
         [](int) { return make_cube(); }},
        {"beale", 2, 2, 1, "2",
         "(1.5 - x + xy)^2 + (2.25 - x + xy^2)^2 + (2.625 - x + xy^3)^2",
         [](int) { return make_beale(); }},
        {"himmelblau", 2, 2, 1, "2", "(x^2 + y - 11)^2 + (x + y^2 - 7)^2",
         [](int) { return make_himmelblau(); }},
        {"quartic", 1, 100, 1, "1..100", "sum (x_i - t_i)^4, t_i = (i mod 4)/4",
         make_quartic},
        {"woods", 4, 100, 4, "4..100, multiple of 4", "classic Woods function",
         make_woods},
        {"dixon_price", 2, 100, 1, "2..100",
         "(x_1 - 1)^2 + sum i(2 x_i^2 - x_{i-1})^2", make_dixon_price},
        {"zakharov", 1, 100, 1, "1..100",
         "sum x_i^2 + (sum 0.5 i x_i)^2 + (sum 0.5 i x_i)^4", make_zakharov},
        {"tridia", 2, 100, 1, "2..100",
         "(x_1 - 1)^2 + sum i(2 x_i - x_{i-1})^2", make_tridia},
        {"liarwhd", 1, 100, 1, "1..100",
         "sum 4(x_i^2 - x_1)^2 + (x_i - 1)^2", make_liarwhd},
        {"powell4", 4, 100, 4, "4..100, multiple of 4", "Powell singular function",
         make_powell4},
        {"nqmsep", 1, 100, 1, "1..100", "sum (x_i - 1)^2 + (x_i^2 - 1)^2",
         [](int n) { return make_nqmsep(n, 0.0); }},
        {"nqmsep_offset", 1, 100, 1, "1..100",
         "sum (x_i - 1)^2 + (x_i^2 - 1)^2 + 100",
         [](int n) { return make_nqmsep(n, 100.0); }},
    };
    return m;
}

} // namespace

const std::vector<ProblemInfo>& problem_registry() {
    static const std::vector<ProblemInfo> infos = [] {
        std::vector<ProblemInfo> v;
        for (const auto& m : makers()) v.push_back({m.name, m.dims, m.formula});
        return v;
    }();
    return infos;
}

Problem get_problem(const std::string& name, int n) {
    for (const auto& m : makers()) {
        if (m.name != name) continue;
        if (n < m.min_n || n > m.max_n || n % m.multiple != 0)
            throw BadDimension("problem '" + name + "' does not accept n = " +
                               std::to_string(n) + " (legal: " + m.dims + ")");
        return m.make(n);
    }
    throw UnknownProblem("unknown problem: " + name);
}

std::vector<std::pair<std::string, int>> default_suite() {
    return {
        {"quadratic", 2},      {"quadratic", 10},      {"quadratic", 50},
        {"quadratic", 100},    {"ill_quadratic", 10},  {"ill_quadratic", 30},
        {"quadratic_offset", 5}, {"quadratic_offset", 12},
        {"quadratic_offset", 20}, {"quadratic_offset", 40},
        {"sumsquares", 8},     {"sumsquares", 60},
        {"rosenbrock", 2},     {"rosenbrock", 10},     {"rosenbrock", 30},
        {"rosenbrock_offset", 4}, {"rosenbrock_offset", 16},
        {"cube", 2},           {"beale", 2},           {"himmelblau", 2},
        {"quartic", 4},        {"quartic", 25},
        {"woods", 4},          {"woods", 20},
        {"dixon_price", 5},    {"dixon_price", 25},
        {"zakharov", 3},       {"zakharov", 12},
        {"tridia", 10},        {"tridia", 40},
        {"liarwhd", 6},        {"liarwhd", 36},
        {"powell4", 4},        {"powell4", 16},
        {"nqmsep", 7},         {"nqmsep", 100},
        {"nqmsep_offset", 6},  {"nqmsep_offset", 24},
    };
}

RatInterval exact_eval(const Problem& p, const std::vector<Rational>& x) {
    RationalScalarOps ops;
    std::vector<RatInterval> xi;
    xi.reserve(x.size());
    for (const auto& v : x) xi.emplace_back(v);
    return eval_expr(p.expr, ops, std::span<const RatInterval>(xi));
}

std::vector<RatInterval> exact_grad(const Problem& p, const std::vector<Rational>& x) {
    RationalScalarOps ops;
    std::vector<RatInterval> xi;
    xi.reserve(x.size());
    for (const auto& v : x) xi.emplace_back(v);
    std::vector<RatInterval> grad;
    eval_expr_grad(p.expr, ops, std::span<const RatInterval>(xi), grad);
    return grad;
}

DefinedReal defined_eval(const Problem& p, const std::vector<double>& x) {
    DefinedScalarOps ops;
    std::vector<DefinedReal> xi(x.begin(), x.end());
    return eval_expr(p.expr, ops, std::span<const DefinedReal>(xi));
}

std::vector<DefinedReal> defined_grad(const Problem& p, const std::vector<double>& x) {
    DefinedScalarOps ops;
    std::vector<DefinedReal> xi(x.begin(), x.end());
    std::vector<DefinedReal> grad;
    eval_expr_grad(p.expr, ops, std::span<const DefinedReal>(xi), grad);
    return grad;
}

DefinedReal defined_grad_norm(const Problem& p, const std::vector<double>& x) {
    std::vector<DefinedReal> g = defined_grad(p, x);
    DefinedReal s(0.0);
    for (const auto& gi : g) s += gi * gi;
    return sqrt(s);
}

} // namespace mpr2
