#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "cumulants.hpp"
#include "distributions.hpp"
#include "genwick.hpp"
#include "partitions.hpp"
#include "wick.hpp"

namespace partdecomp {

struct SelftestCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

namespace detail {

inline DiscreteJoint<Rational> selftest_joint(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> rows_dist(1, 4);
    std::uniform_int_distribution<int> value_dist(-2, 3);
    std::uniform_int_distribution<int> weight_dist(1, 5);
    const int rows = rows_dist(rng);
    std::set<std::vector<Rational>> support;
    while (static_cast<int>(support.size()) < rows) {
        std::vector<Rational> row;
        for (int i = 0; i < n; ++i) {
            row.emplace_back(value_dist(rng));
        }
        support.insert(row);
    }
    std::vector<int> weights;
    int total = 0;
    for (int k = 0; k < rows; ++k) {
        weights.push_back(weight_dist(rng));
        total += weights.back();
    }
    std::vector<Rational> probs;
    for (int w : weights) {
        probs.emplace_back(w, total);
    }
    return DiscreteJoint<Rational>(n, {support.begin(), support.end()}, probs);
}

// x1 * ... * xn plus x1^2, so the function is not multilinear.
inline FunctionOracle<Rational> selftest_function(int n) {
    return FunctionOracle<Rational>{n, [](std::span<const Rational> x) {
                                        Rational p = 1;
                                        for (const auto& v : x) {
                                            p *= v;
                                        }
                                        return p + x[0] * x[0];
                                    }};
}

}  // namespace detail

/// Runs the core invariant suites on ground sets up to size n with a fixed
/// seed. Exact arithmetic throughout.
inline std::vector<SelftestCheck> run_selftest(int n, std::uint64_t seed = 0) {
    if (n < 1 || n > 6) {
        throw DomainError("selftest supports 1 <= n <= 6");
    }
    std::vector<SelftestCheck> checks;
    auto record = [&](std::string name, auto&& body) {
        SelftestCheck c{std::move(name), true, {}};
        try {
            c.detail = body(c.passed);
        } catch (const std::exception& e) {
            c.passed = false;
            c.detail = e.what();
        }
        checks.push_back(std::move(c));
    };

    record("mobius_oracle", [&](bool& ok) {
        std::size_t entries = 0;
        for (int k = 1; k <= n; ++k) {
            const auto m = coefficient_matrix(k);
            for (std::size_t r = 0; r < m.dimension(); ++r) {
                for (std::size_t c = 0; c < m.dimension(); ++c) {
                    const bool refines = is_refinement(m.order[c], m.order[r]);
                    ok = ok && m.rows[r][c] == (refines ? mobius(m.order[c], m.order[r]) : Integer(0));
                    ++entries;
                }
            }
        }
        return std::to_string(entries) + " matrix entries";
    });

    const int value_n = std::min(n, 4);
    std::mt19937_64 rng(seed);
    record("reconstruction_and_refinement", [&](bool& ok) {
        int instances = 0;
        for (int k = 1; k <= value_n; ++k) {
            for (int trial = 0; trial < 5; ++trial) {
                const auto dist = detail::selftest_joint(k, rng);
                const auto f = detail::selftest_function(k);
                const auto cumulants = generalized_cumulants(f, dist);
                for (const auto& pi : enumerate_partitions(k)) {
                    Rational total = 0;
                    for (const auto& alpha : refinements(pi)) {
                        total += cumulants.at(alpha);
                    }
                    ok = ok && total == pattern_expectation(f, dist, pi);
                }
                ++instances;
            }
        }
        return std::to_string(instances) + " random joints";
    });

    record("wick_identities", [&](bool& ok) {
        for (int k = 1; k <= n; ++k) {
            const IndexSet ground = IndexSet::range(k);
            WickPolynomial total(ground);
            for (const auto& term : wick_terms(k)) {
                total.add(term.expanded());
            }
            WickPolynomial product(ground);
            product.add(WickMonomial(ground, {}), 1);
            ok = ok && total == product;
            for (int i = 1; i <= k; ++i) {
                ok = ok && compress_indices(wick_derivative(wick_product(k), i)) == wick_product(k - 1);
            }
        }
        for (int k = 1; k <= value_n; ++k) {
            const auto dist = detail::selftest_joint(k, rng);
            const auto moments = moment_table(dist);
            Rational mean = 0;
            for (std::size_t r = 0; r < dist.size(); ++r) {
                mean += dist.probs()[r] *
                        evaluate_wick<Rational>(wick_product(k), std::span<const Rational>(dist.support()[r]), moments);
            }
            ok = ok && mean == 0;
        }
        return "reconstruction, derivative and zero mean";
    });

    record("generalized_wick", [&](bool& ok) {
        for (int k = 1; k <= value_n; ++k) {
            const IndexSet all = IndexSet::range(k);
            const auto dist = detail::selftest_joint(k, rng);
            const auto f = detail::selftest_function(k);
            for (const auto& x : dist.support()) {
                Rational total = 0;
                for (std::uint64_t m = 0; m <= all.mask(); ++m) {
                    total += evaluate_signed_sum<Rational>(genwick_term(k, IndexSet::from_mask(m)), f, dist, x);
                }
                ok = ok && total == f(x);
            }
            for (std::uint64_t s = 0; s <= all.mask(); ++s) {
                for (std::uint64_t t = 0; t <= all.mask(); ++t) {
                    if ((s & t) != 0) {
                        continue;
                    }
                    const IndexSet kept = all - IndexSet::from_mask(t);
                    ok = ok && commute_expectation(genwick_product(k, IndexSet::from_mask(s)), IndexSet::from_mask(t)) ==
                                   genwick_product(static_cast<int>(kept.size()), compress(IndexSet::from_mask(s), kept));
                }
            }
        }
        return "reconstruction and commutation";
    });
    return checks;
}

}  // namespace partdecomp
