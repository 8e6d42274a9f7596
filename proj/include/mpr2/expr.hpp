#pragma once

// Expression DAGs over n variables with primitives {+,-,*,/,sqrt,neg,int-pow,
// constants}. One definition serves every scalar backend: the same DAG is
// evaluated with format-rounded doubles, outward-rounded intervals,
// DefinedReals or exact rationals, and forward-mode tangents reuse the
// identical per-node formulas so results agree structurally across backends.
//
// Tangents are kept sparse (per-node union of variable dependencies,
// precomputed once). Absent entries are exact zeros; since x+0, 0*x and -x
// are exact in every backend, sparse evaluation is bitwise identical to the
// dense product-rule evaluation.

#include <cstdint>
#include <span>
#include <vector>

#include "mpr2/defined.hpp"
#include "mpr2/errors.hpp"
#include "mpr2/fpops.hpp"
#include "mpr2/interval.hpp"
#include "mpr2/rational.hpp"

namespace mpr2 {

enum class ExprOp : std::uint8_t { Var, Const, Add, Sub, Mul, Div, Neg, Sqrt };

struct ExprNode {
    ExprOp op;
    std::int32_t a = -1;
    std::int32_t b = -1;
    double value = 0.0;  // Const payload
};

class Expr {
public:
    Expr() = default;
    Expr(std::vector<ExprNode> nodes, std::int32_t root, int n_vars);

    int n_vars() const { return n_vars_; }
    const std::vector<ExprNode>& nodes() const { return nodes_; }
    std::int32_t root() const { return root_; }

    // sparse tangent pattern of node i (sorted variable indices)
    std::span<const std::int32_t> pattern(std::int32_t i) const {
        return {pattern_data_.data() + pattern_offsets_[static_cast<std::size_t>(i)],
                pattern_data_.data() + pattern_offsets_[static_cast<std::size_t>(i) + 1]};
    }
    std::size_t pattern_offset(std::int32_t i) const {
        return pattern_offsets_[static_cast<std::size_t>(i)];
    }
    std::size_t pattern_total() const { return pattern_data_.size(); }

private:
    std::vector<ExprNode> nodes_;
    std::int32_t root_ = -1;
    int n_vars_ = 0;
    std::vector<std::size_t> pattern_offsets_;
    std::vector<std::int32_t> pattern_data_;
};

class ExprBuilder {
public:
    explicit ExprBuilder(int n_vars) : n_vars_(n_vars) {}

    std::int32_t var(int i);
    std::int32_t lit(double v);
    std::int32_t add(std::int32_t a, std::int32_t b) { return binary(ExprOp::Add, a, b); }
    std::int32_t sub(std::int32_t a, std::int32_t b) { return binary(ExprOp::Sub, a, b); }
    std::int32_t mul(std::int32_t a, std::int32_t b) { return binary(ExprOp::Mul, a, b); }
    std::int32_t div(std::int32_t a, std::int32_t b) { return binary(ExprOp::Div, a, b); }
    std::int32_t neg(std::int32_t a);
    std::int32_t sqrt(std::int32_t a);
    // x^k lowered to a left-to-right multiplication chain
    std::int32_t ipow(std::int32_t a, int k);

    // sum of a list, accumulated left to right
    std::int32_t sum(const std::vector<std::int32_t>& terms);

    Expr build(std::int32_t root) { return Expr(std::move(nodes_), root, n_vars_); }

private:
    std::int32_t binary(ExprOp op, std::int32_t a, std::int32_t b);

    int n_vars_;
    std::vector<ExprNode> nodes_;
};

// ---------------------------------------------------------------------------
// Scalar backends
// ---------------------------------------------------------------------------

// Every elementary operation rounded to nearest in one format.
struct RoundedScalarOps {
    using Value = double;
    const FpEnv* env;
    FormatIndex pi;
    RoundStatus* st = nullptr;

    Value constant(double c) const { return env->round_to_format(c, pi, st); }
    Value zero() const { return 0.0; }
    Value one() const { return 1.0; }
    Value add(Value a, Value b) const { return env->round_to_format(a + b, pi, st); }
    Value sub(Value a, Value b) const { return env->round_to_format(a - b, pi, st); }
    Value mul(Value a, Value b) const { return env->round_to_format(a * b, pi, st); }
    Value div(Value a, Value b) const {
        if (b == 0.0) throw DivisionByZero("expression division by zero");
        return env->round_to_format(a / b, pi, st);
    }
    Value neg(Value a) const { return -a; }
    Value sqrt_(Value a) const {
        if (a < 0.0) throw DomainError("expression sqrt of negative value");
        return env->round_to_format(std::sqrt(a), pi, st);
    }
};

// Guaranteed enclosures, outward rounded in one format.
struct IntervalScalarOps {
    using Value = Interval;
    IntervalOps iv;

    Value constant(double c) const { return iv.enclose(c); }
    Value zero() const { return {0.0, 0.0}; }
    Value one() const { return {1.0, 1.0}; }
    Value add(const Value& a, const Value& b) const { return iv.add(a, b); }
    Value sub(const Value& a, const Value& b) const { return iv.sub(a, b); }
    Value mul(const Value& a, const Value& b) const { return iv.mul(a, b); }
    Value div(const Value& a, const Value& b) const { return iv.div(a, b); }
    Value neg(const Value& a) const { return iv.neg(a); }
    Value sqrt_(const Value& a) const { return iv.sqrt(a); }
};

// Extended-precision reference evaluation.
struct DefinedScalarOps {
    using Value = DefinedReal;

    Value constant(double c) const { return DefinedReal(c); }
    Value zero() const { return DefinedReal(0.0); }
    Value one() const { return DefinedReal(1.0); }
    Value add(const Value& a, const Value& b) const { return a + b; }
    Value sub(const Value& a, const Value& b) const { return a - b; }
    Value mul(const Value& a, const Value& b) const { return a * b; }
    Value div(const Value& a, const Value& b) const {
        if (b.is_zero()) throw DivisionByZero("expression division by zero");
        return a / b;
    }
    Value neg(const Value& a) const { return -a; }
    Value sqrt_(const Value& a) const {
        if (a.is_negative()) throw DomainError("expression sqrt of negative value");
        return sqrt(a);
    }
};

// Exact rational evaluation; sqrt of a non-square propagates an enclosure.
struct RationalScalarOps {
    using Value = RatInterval;
    int sqrt_prec_bits = 96;

    Value constant(double c) const { return RatInterval(Rational::from_double(c)); }
    Value zero() const { return RatInterval(Rational(0)); }
    Value one() const { return RatInterval(Rational(1)); }
    Value add(const Value& a, const Value& b) const { return rat_add(a, b); }
    Value sub(const Value& a, const Value& b) const { return rat_sub(a, b); }
    Value mul(const Value& a, const Value& b) const { return rat_mul(a, b); }
    Value div(const Value& a, const Value& b) const { return rat_div(a, b); }
    Value neg(const Value& a) const { return rat_neg(a); }
    Value sqrt_(const Value& a) const { return rat_sqrt(a, sqrt_prec_bits); }
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

template <class Ops>
typename Ops::Value eval_expr(const Expr& e, const Ops& ops,
                              std::span<const typename Ops::Value> x) {
    using V = typename Ops::Value;
    std::vector<V> vals(e.nodes().size(), ops.zero());
    const auto& nodes = e.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const ExprNode& nd = nodes[i];
        switch (nd.op) {
            case ExprOp::Var: vals[i] = x[static_cast<std::size_t>(nd.a)]; break;
            case ExprOp::Const: vals[i] = ops.constant(nd.value); break;
            case ExprOp::Add:
                vals[i] = ops.add(vals[static_cast<std::size_t>(nd.a)],
                                  vals[static_cast<std::size_t>(nd.b)]);
                break;
            case ExprOp::Sub:
                vals[i] = ops.sub(vals[static_cast<std::size_t>(nd.a)],
                                  vals[static_cast<std::size_t>(nd.b)]);
                break;
            case ExprOp::Mul:
                vals[i] = ops.mul(vals[static_cast<std::size_t>(nd.a)],
                                  vals[static_cast<std::size_t>(nd.b)]);
                break;
            case ExprOp::Div:
                vals[i] = ops.div(vals[static_cast<std::size_t>(nd.a)],
                                  vals[static_cast<std::size_t>(nd.b)]);
                break;
            case ExprOp::Neg:
                vals[i] = ops.neg(vals[static_cast<std::size_t>(nd.a)]);
                break;
            case ExprOp::Sqrt:
                vals[i] = ops.sqrt_(vals[static_cast<std::size_t>(nd.a)]);
                break;
            default: throw UnsupportedPrimitive("eval_expr: unknown node");
        }
    }
    return vals[static_cast<std::size_t>(e.root())];
}

// Forward-mode value + gradient. grad_out is resized to n_vars and filled
// densely (exact zeros for variables the root does not depend on).
template <class Ops>
typename Ops::Value eval_expr_grad(const Expr& e, const Ops& ops,
                                   std::span<const typename Ops::Value> x,
                                   std::vector<typename Ops::Value>& grad_out) {
    using V = typename Ops::Value;
    const auto& nodes = e.nodes();
    std::vector<V> vals(nodes.size(), ops.zero());
    std::vector<V> tans(e.pattern_total(), ops.zero());

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const ExprNode& nd = nodes[i];
        auto ni = static_cast<std::int32_t>(i);
        auto pat = e.pattern(ni);
        std::size_t base = e.pattern_offset(ni);

        // walk this node's pattern (the sorted union of the child patterns)
        // with two pointers into the children and combine per entry
        auto merge_children = [&](auto&& combine) {
            auto pa = e.pattern(nd.a);
            auto pb = e.pattern(nd.b);
            std::size_t ba = e.pattern_offset(nd.a);
            std::size_t bb = e.pattern_offset(nd.b);
            std::size_t ia = 0, ib = 0;
            for (std::size_t j = 0; j < pat.size(); ++j) {
                const V* ta = nullptr;
                const V* tb = nullptr;
                if (ia < pa.size() && pa[ia] == pat[j]) ta = &tans[ba + ia++];
                if (ib < pb.size() && pb[ib] == pat[j]) tb = &tans[bb + ib++];
                tans[base + j] = combine(ta, tb);
            }
        };

        switch (nd.op) {
            case ExprOp::Var:
                vals[i] = x[static_cast<std::size_t>(nd.a)];
                tans[base] = ops.one();
                break;
            case ExprOp::Const:
                vals[i] = ops.constant(nd.value);
                break;
            case ExprOp::Add: {
                vals[i] = ops.add(vals[static_cast<std::size_t>(nd.a)],
                                  vals[static_cast<std::size_t>(nd.b)]);
                merge_children([&](const V* ta, const V* tb) {
                    if (ta && tb) return ops.add(*ta, *tb);
                    return ta ? *ta : *tb;
                });
                break;
            }
            case ExprOp::Sub: {
                vals[i] = ops.sub(vals[static_cast<std::size_t>(nd.a)],
                                  vals[static_cast<std::size_t>(nd.b)]);
                merge_children([&](const V* ta, const V* tb) {
                    if (ta && tb) return ops.sub(*ta, *tb);
                    return ta ? *ta : ops.neg(*tb);
                });
                break;
            }
            case ExprOp::Mul: {
                const V& va = vals[static_cast<std::size_t>(nd.a)];
                const V& vb = vals[static_cast<std::size_t>(nd.b)];
                vals[i] = ops.mul(va, vb);
                merge_children([&](const V* ta, const V* tb) {
                    if (ta && tb) return ops.add(ops.mul(*ta, vb), ops.mul(va, *tb));
                    return ta ? ops.mul(*ta, vb) : ops.mul(va, *tb);
                });
                break;
            }
            case ExprOp::Div: {
                const V& va = vals[static_cast<std::size_t>(nd.a)];
                const V& vb = vals[static_cast<std::size_t>(nd.b)];
                V q = ops.div(va, vb);
                vals[i] = q;
                merge_children([&](const V* ta, const V* tb) {
                    if (ta && tb) return ops.div(ops.sub(*ta, ops.mul(q, *tb)), vb);
                    if (ta) return ops.div(*ta, vb);
                    return ops.div(ops.neg(ops.mul(q, *tb)), vb);
                });
                break;
            }
            case ExprOp::Neg: {
                vals[i] = ops.neg(vals[static_cast<std::size_t>(nd.a)]);
                std::size_t ba = e.pattern_offset(nd.a);
                for (std::size_t j = 0; j < pat.size(); ++j)
                    tans[base + j] = ops.neg(tans[ba + j]);
                break;
            }
            case ExprOp::Sqrt: {
                V s = ops.sqrt_(vals[static_cast<std::size_t>(nd.a)]);
                vals[i] = s;
                V denom = ops.mul(ops.constant(2.0), s);
                std::size_t ba = e.pattern_offset(nd.a);
                for (std::size_t j = 0; j < pat.size(); ++j)
                    tans[base + j] = ops.div(tans[ba + j], denom);
                break;
            }
            default: throw UnsupportedPrimitive("eval_expr_grad: unknown node");
        }
    }

    grad_out.assign(static_cast<std::size_t>(e.n_vars()), ops.zero());
    auto rpat = e.pattern(e.root());
    std::size_t rbase = e.pattern_offset(e.root());
    for (std::size_t j = 0; j < rpat.size(); ++j)
        grad_out[static_cast<std::size_t>(rpat[j])] = tans[rbase + j];
    return vals[static_cast<std::size_t>(e.root())];
}

} // namespace mpr2
