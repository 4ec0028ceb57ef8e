#include <partdecomp/distributions.hpp>
#include <partdecomp/expression.hpp>
#include <partdecomp/genwick.hpp>
#include <partdecomp/wick.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace partdecomp;

namespace {

GenPattern pat(int n, const char* averaged) {
    const Partition p = parse_partition(averaged);
    return GenPattern(p, IndexSet::range(n) - p.ground());
}

SignedGenSum gsum(int n, std::initializer_list<std::pair<const char*, int>> terms) {
    SignedGenSum s(n);
    for (const auto& [p, c] : terms) {
        s.add(pat(n, p), c);
    }
    return s;
}

std::vector<IndexSet> subsets_of(IndexSet ground) {
    std::vector<IndexSet> out;
    const std::uint64_t full = ground.mask();
    for (std::uint64_t sub = full;; sub = (sub - 1) & full) {
        out.push_back(IndexSet::from_mask(sub));
        if (sub == 0) {
            break;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("genwick_product basic cases", "[genwick]") {
    CHECK(genwick_product(2, {}) == gsum(2, {{"", 1}}));
    CHECK(genwick_product(2, {1}) == gsum(2, {{"", 1}, {"1", -1}}));
    CHECK(genwick_product(2, {1, 2}) == gsum(2, {{"", 1}, {"2", -1}, {"1", -1}, {"1|2", 2}, {"1,2", -1}}));
    CHECK(format_gen_sum(genwick_product(2, {1, 2})) == "f(x) - E_{1} - E_{2} + 2*E_{1|2} - E_{1,2}");
    CHECK(genwick_product(5, {2, 4}).coefficient(GenPattern::all_free(5)) == 1);
    CHECK_THROWS_AS(genwick_product(2, {3}), DomainError);
}

TEST_CASE("genwick_term", "[genwick]") {
    CHECK(genwick_term(2, {}) == gsum(2, {{"1,2", 1}}));
    CHECK(genwick_term(2, {1, 2}) == genwick_product(2, {1, 2}));
    CHECK(genwick_term(3, {1, 2}) ==
          gsum(3, {{"3", 1}, {"2|3", -1}, {"1|3", -1}, {"1|2|3", 2}, {"1,2|3", -1}}));
    CHECK_THROWS_AS(genwick_term(2, {4}), DomainError);
    for (int n = 1; n <= 4; ++n) {
        for (IndexSet s : subsets_of(IndexSet::range(n))) {
            for (const auto& [p, c] : genwick_term(n, s)) {
                CHECK(p.free.is_subset_of(s));
                CHECK(p.averaged.ground().is_subset_of(IndexSet::range(n)));
            }
        }
    }
}

TEST_CASE("generalized Wick terms reconstruct f", "[genwick][property]") {
    for (int n = 0; n <= 5; ++n) {
        SignedGenSum total(n);
        for (IndexSet s : subsets_of(IndexSet::range(n))) {
            total.add(genwick_term(n, s));
        }
        CHECK(total == gsum(n, {{"", 1}}));
    }
}

TEST_CASE("joint draw of every argument annihilates omega", "[genwick][property]") {
    for (int n = 1; n <= 5; ++n) {
        SignedGenSum closed(n);
        for (const auto& [p, c] : genwick_product(n, IndexSet::range(n))) {
            closed.add(GenPattern(join_disjoint(p.averaged, Partition::one_block(p.free)), IndexSet{}), c);
        }
        CHECK(closed.empty());
    }
}

TEST_CASE("genwick_term_partitioned", "[genwick]") {
    CHECK(genwick_term_partitioned(2, {}, parse_partition("1|2")) == gsum(2, {{"1|2", 1}}));
    CHECK(genwick_term_partitioned(3, {3}, parse_partition("1|2")) == gsum(3, {{"1|2", 1}, {"1|2|3", -1}}));
    CHECK(genwick_term_partitioned(2, {1, 2}, Partition()) == genwick_product(2, {1, 2}));
    CHECK(genwick_term_partitioned(3, {1, 2}, parse_partition("3")) == genwick_term(3, {1, 2}));
    CHECK_THROWS_AS(genwick_term_partitioned(3, {1}, parse_partition("2")), DomainError);
    CHECK_THROWS_AS(genwick_term_partitioned(3, {1}, parse_partition("1|2,3")), DomainError);

    // Summing over every partition of the complement recovers the term.
    for (int n = 1; n <= 4; ++n) {
        for (IndexSet s : subsets_of(IndexSet::range(n))) {
            SignedGenSum total(n);
            for (const auto& pi : enumerate_partitions(IndexSet::range(n) - s)) {
                total.add(genwick_term_partitioned(n, s, pi));
            }
            CHECK(total == genwick_term(n, s));
        }
    }
}

TEST_CASE("commute_expectation", "[genwick]") {
    CHECK(commute_expectation(genwick_product(3, {}), {2, 3}) == gsum(1, {{"", 1}}));
    CHECK(commute_expectation(genwick_product(3, {1}), {3}) == genwick_product(2, {1}));
    const auto reduced = commute_expectation(genwick_product(4, {1, 2}), {3, 4});
    CHECK(reduced.size() == 5);
    CHECK(reduced == genwick_product(2, {1, 2}));
    CHECK_THROWS_AS(commute_expectation(genwick_product(3, {1}), {1, 3}), DomainError);
    CHECK_THROWS_AS(commute_expectation(genwick_product(3, {1}), {4}), DomainError);

    for (int n = 1; n <= 4; ++n) {
        const IndexSet all = IndexSet::range(n);
        for (IndexSet s : subsets_of(all)) {
            for (IndexSet t : subsets_of(all - s)) {
                const auto lhs = commute_expectation(genwick_product(n, s), t);
                const auto rhs = genwick_product(static_cast<int>(n - t.size()), compress(s, all - t));
                CHECK(lhs == rhs);
            }
        }
    }
}

TEST_CASE("omega depends only on |S| up to relabeling", "[genwick][property]") {
    for (int n = 1; n <= 4; ++n) {
        for (IndexSet s : subsets_of(IndexSet::range(n))) {
            const int k = static_cast<int>(s.size());
            const auto omega = genwick_product(n, s);
            const auto base = genwick_product(k, IndexSet::range(k));
            CHECK(omega.size() == base.size());
            SignedGenSum mapped(k);
            for (const auto& [p, c] : omega) {
                std::vector<IndexSet> blocks;
                for (IndexSet b : p.averaged.blocks()) {
                    blocks.push_back(compress(b, s));
                }
                mapped.add(GenPattern(Partition(blocks), compress(p.free & s, s)), c);
            }
            CHECK(mapped == base);
        }
    }
}

TEST_CASE("omega of the product matches the classical Wick product", "[genwick][property]") {
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto dist = testing::random_joint(n, 4, rng);
            const auto f = testing::product_function<Rational>(n);
            const auto moments = moment_table(dist);
            const auto omega = genwick_product(n, IndexSet::range(n));
            const auto eps = wick_product(n);
            std::vector<Rational> x;
            for (int i = 0; i < n; ++i) {
                x.emplace_back(std::uniform_int_distribution<int>(-4, 4)(rng), 3);
            }
            CHECK(evaluate_signed_sum<Rational>(omega, f, dist, x) == evaluate_wick<Rational>(eps, x, moments));
        }
    }
}

TEST_CASE("derivative of omega drops the index from S", "[genwick][property]") {
    // d/dx_i omega_{f,S} = omega_{df/dx_i, S minus i}: patterns averaging x_i are
    // constant in x_i, so they cannot survive as E[df/dx_i] terms.
    const Expression f = parse_expression("exp(x1 + x2*x3)");
    std::mt19937_64 rng(23);
    const auto dist = testing::random_joint(3, 4, rng).as<double>();
    const IndexSet all = IndexSet::range(3);
    const auto omega = genwick_product(3, all);
    const auto fo = make_oracle<double>(f, 3);
    const std::vector<double> x{0.3, -0.4, 0.7};
    const double h = 1e-5;
    for (int i = 1; i <= 3; ++i) {
        IndexSet rest = all;
        rest.erase(i);
        const auto dfo = make_oracle<double>(differentiate(f, i), 3);
        auto xp = x;
        auto xm = x;
        xp[i - 1] += h;
        xm[i - 1] -= h;
        const double numeric = (evaluate_signed_sum<double>(omega, fo, dist, xp) -
                                evaluate_signed_sum<double>(omega, fo, dist, xm)) / (2 * h);
        const double symbolic = evaluate_signed_sum<double>(genwick_product(3, rest), dfo, dist, x);
        CHECK(std::abs(numeric - symbolic) <= 1e-6 * std::max(1.0, std::abs(symbolic)));
    }
}

TEST_CASE("keeping i in S breaks the derivative identity", "[genwick]") {
    // n = 1, f = x^2: d/dx (x^2 - E[X^2]) = 2x, whereas omega_{2x} = 2x - 2E[X].
    const DiscreteJoint<Rational> dist(1, {{1}, {3}}, {Rational(1, 2), Rational(1, 2)});
    const auto df = make_oracle<Rational>(parse_expression("2*x1"));
    const std::vector<Rational> x{Rational(5)};
    CHECK(evaluate_signed_sum<Rational>(genwick_product(1, {1}), df, dist, x) == 6);
    CHECK(evaluate_signed_sum<Rational>(genwick_product(1, {}), df, dist, x) == 10);
}
