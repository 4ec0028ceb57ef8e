#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "memo.hpp"
#include "partitions.hpp"
#include "signed_sum.hpp"

namespace partdecomp {

/// A partition read as an evaluation pattern: variables inside a block are
/// drawn jointly, distinct blocks independently.
using EvaluationPattern = Partition;

/// Integer combination of evaluation patterns over one ground set.
using SignedPatternSum = SignedSum<EvaluationPattern, CanonicalLess>;

/// Picks which block of a multi-block partition the recursion peels off.
using BlockChooser = std::function<std::size_t(const Partition&)>;

namespace detail {

inline SignedPatternSum product_of_disjoint(const SignedPatternSum& a, const SignedPatternSum& b) {
    SignedPatternSum out;
    for (const auto& [pa, ca] : a) {
        for (const auto& [pb, cb] : b) {
            out.add(join_disjoint(pa, pb), ca * cb);
        }
    }
    return out;
}

template <typename Recurse>
SignedPatternSum cumulant_step(const Partition& pi, std::size_t chosen, const Limits& limits,
                               Recurse&& recurse) {
    SignedPatternSum out;
    if (pi.empty()) {
        out.add(pi, 1);
        return out;
    }
    if (pi.size() > 1) {
        // K_f(pi) = K_g(pi \ B) with g = K_f({B}); patterns combine by union.
        const IndexSet block = pi.blocks()[chosen];
        return product_of_disjoint(recurse(Partition::one_block(block)), recurse(pi.without_block(block)));
    }
    const IndexSet block = pi.blocks().front();
    if (block.size() == 1) {
        out.add(pi, 1);
        return out;
    }
    // One block: E over the joint minus every finer generalized cumulant.
    out.add(pi, 1);
    for (const Partition& finer : enumerate_partitions(block, limits)) {
        if (finer.size() > 1) {
            out.add(recurse(finer), -1);
        }
    }
    return out;
}

}  // namespace detail

/// Coefficients expressing the generalized cumulant K_f(pi) as a combination
/// of pattern expectations E_alpha[f]. Memoized; recursion peels the block
/// holding the smallest index.
inline SignedPatternSum cumulant_coefficients(const Partition& pi, const Limits& limits = {}) {
    check_ground_cap(pi.ground(), limits);
    static detail::MemoTable<Partition, SignedPatternSum, CanonicalLess> memo;
    if (auto hit = memo.find(pi)) {
        return *hit;
    }
    SignedPatternSum out = detail::cumulant_step(
        pi, 0, limits, [&](const Partition& sub) { return cumulant_coefficients(sub, limits); });
    return memo.insert(pi, std::move(out));
}

/// Unmemoized variant where `choose` decides the peeled block at every level
/// of the recursion. Any choice gives the same coefficients.
inline SignedPatternSum cumulant_coefficients_with(const Partition& pi, const BlockChooser& choose,
                                                   const Limits& limits = {}) {
    check_ground_cap(pi.ground(), limits);
    const std::size_t chosen = pi.size() > 1 ? choose(pi) : 0;
    if (chosen >= std::max<std::size_t>(pi.size(), 1)) {
        throw DomainError("block chooser returned an out-of-range block");
    }
    return detail::cumulant_step(pi, chosen, limits, [&](const Partition& sub) {
        return cumulant_coefficients_with(sub, choose, limits);
    });
}

/// Change-of-basis matrix from pattern expectations to generalized
/// cumulants. Rows are K_f(pi), columns E_alpha[f], both in `order`.
struct CoefficientMatrix {
    std::vector<Partition> order;
    std::vector<std::vector<Integer>> rows;

    std::size_t dimension() const { return order.size(); }
};

inline CoefficientMatrix coefficient_matrix(int n, const Limits& limits = {}) {
    if (n < 1) {
        throw DomainError("matrix dimension needs n >= 1");
    }
    CoefficientMatrix m;
    m.order = enumerate_partitions(n, limits);
    std::map<Partition, std::size_t, CanonicalLess> column;
    for (std::size_t k = 0; k < m.order.size(); ++k) {
        column.emplace(m.order[k], k);
    }
    m.rows.assign(m.order.size(), std::vector<Integer>(m.order.size(), 0));
    for (std::size_t r = 0; r < m.order.size(); ++r) {
        for (const auto& [pattern, coef] : cumulant_coefficients(m.order[r], limits)) {
            m.rows[r][column.at(pattern)] = coef;
        }
    }
    return m;
}

/// Coefficients c_alpha with kappa(X_ground) = sum_alpha c_alpha
/// prod_{B in alpha} E[prod_{i in B} X_i], obtained by inverting the
/// moment-cumulant sum one order at a time.
inline SignedPatternSum classical_cumulant_coefficients(IndexSet ground, const Limits& limits = {}) {
    check_ground_cap(ground, limits);
    if (ground.empty()) {
        throw DomainError("a cumulant needs at least one variable");
    }
    static detail::MemoTable<std::uint64_t, SignedPatternSum> memo;
    if (auto hit = memo.find(ground.mask())) {
        return *hit;
    }
    SignedPatternSum out;
    out.add(Partition::one_block(ground), 1);
    if (ground.size() > 1) {
        for (const Partition& pi : enumerate_partitions(ground, limits)) {
            if (pi.size() == 1) {
                continue;
            }
            SignedPatternSum product;
            product.add(Partition(), 1);
            for (IndexSet b : pi.blocks()) {
                product = detail::product_of_disjoint(product, classical_cumulant_coefficients(b, limits));
            }
            out.add(product, -1);
        }
    }
    return memo.insert(ground.mask(), std::move(out));
}

}  // namespace partdecomp
