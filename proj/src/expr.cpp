#include "mpr2/expr.hpp"

#include <algorithm>

namespace mpr2 {

Expr::Expr(std::vector<ExprNode> nodes, std::int32_t root, int n_vars)
    : nodes_(std::move(nodes)), root_(root), n_vars_(n_vars) {
    if (root_ < 0 || root_ >= static_cast<std::int32_t>(nodes_.size()))
        throw InvalidConfig("Expr: root out of range");

    // precompute per-node variable dependency patterns (sorted unions)
    std::vector<std::vector<std::int32_t>> pats(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const ExprNode& nd = nodes_[i];
        switch (nd.op) {
            case ExprOp::Var:
                pats[i] = {nd.a};
                break;
            case ExprOp::Const:
                break;
            case ExprOp::Neg:
            case ExprOp::Sqrt:
                pats[i] = pats[static_cast<std::size_t>(nd.a)];
                break;
            default: {
                const auto& pa = pats[static_cast<std::size_t>(nd.a)];
                const auto& pb = pats[static_cast<std::size_t>(nd.b)];
                pats[i].resize(pa.size() + pb.size());
                auto end = std::set_union(pa.begin(), pa.end(), pb.begin(), pb.end(),
                                          pats[i].begin());
                pats[i].resize(static_cast<std::size_t>(end - pats[i].begin()));
            }
        }
    }
    pattern_offsets_.reserve(nodes_.size() + 1);
    pattern_offsets_.push_back(0);
    for (const auto& p : pats) {
        pattern_data_.insert(pattern_data_.end(), p.begin(), p.end());
        pattern_offsets_.push_back(pattern_data_.size());
    }
}

std::int32_t ExprBuilder::var(int i) {
    if (i < 0 || i >= n_vars_) throw InvalidConfig("ExprBuilder: variable out of range");
    nodes_.push_back({ExprOp::Var, i, -1, 0.0});
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t ExprBuilder::lit(double v) {
    nodes_.push_back({ExprOp::Const, -1, -1, v});
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t ExprBuilder::binary(ExprOp op, std::int32_t a, std::int32_t b) {
    nodes_.push_back({op, a, b, 0.0});
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t ExprBuilder::neg(std::int32_t a) {
    nodes_.push_back({ExprOp::Neg, a, -1, 0.0});
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t ExprBuilder::sqrt(std::int32_t a) {
    nodes_.push_back({ExprOp::Sqrt, a, -1, 0.0});
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t ExprBuilder::ipow(std::int32_t a, int k) {
    if (k < 0) throw InvalidConfig("ExprBuilder: negative power");
    if (k == 0) return lit(1.0);
    std::int32_t acc = a;
    for (int i = 1; i < k; ++i) acc = mul(acc, a);
    return acc;
}

std::int32_t ExprBuilder::sum(const std::vector<std::int32_t>& terms) {
    if (terms.empty()) return lit(0.0);
    std::int32_t acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
    return acc;
}

} // namespace mpr2
