#include <partdecomp/expression.hpp>
#include <partdecomp/pathpatch.hpp>

#include <catch_amalgamated.hpp>

#include <random>

#include "test_support.hpp"

using namespace partdecomp;

namespace {

// (x1, y) correlated, x2 independent of both; y is argument 3.
DiscreteJoint<Rational> toy_joint() {
    const DiscreteJoint<Rational> pair(2, {{0, 0}, {1, 1}, {1, 0}},
                                       {Rational(2, 5), Rational(2, 5), Rational(1, 5)});
    const DiscreteJoint<Rational> x2(1, {{0}, {2}}, {Rational(1, 2), Rational(1, 2)});
    // Reorder (x1, y, x2) into (x1, x2, y).
    const auto joint = independent_product(pair, x2);
    std::vector<std::vector<Rational>> rows;
    for (const auto& r : joint.support()) {
        rows.push_back({r[0], r[2], r[1]});
    }
    return DiscreteJoint<Rational>(3, rows, joint.probs());
}

// x2 correlated with y as well, so the complement matters.
DiscreteJoint<Rational> entangled_joint() {
    return DiscreteJoint<Rational>(3, {{0, 0, 0}, {1, 1, 1}, {1, 0, 1}, {0, 1, 0}},
                                   {Rational(3, 10), Rational(3, 10), Rational(1, 5), Rational(1, 5)});
}

TreeifiedFunction<Rational> treeified(const std::string& text, int n = 3, int label = 3) {
    return {make_oracle<Rational>(parse_expression(text), n), label, {}};
}

}  // namespace

TEST_CASE("patching gap on the toy network", "[pathpatch]") {
    const auto tf = treeified("x1*x3 + 0.1*x2");
    const auto report = patching_gap(tf, toy_joint(), IndexSet{1, 3});
    CHECK(report.ledger_agrees);
    CHECK(report.gap == report.decomposed_gap);
    CHECK(report.gap == 0);
    CHECK(report.admitted.size() == 2);
    CHECK(report.excluded.size() == 3);
    CHECK(report.admitted_total() == report.patched_expectation);
    CHECK(report.admitted_total() + report.decomposed_gap == report.expectation);
    CHECK(format_partition(report.patched_pattern) == "1,3|2");

    // Additive in x2, so the gap vanishes whatever the joint; an interaction
    // term makes the complement matter.
    const auto additive = patching_gap(tf, entangled_joint(), IndexSet{1, 3});
    CHECK(additive.gap == 0);
    const auto interacting = patching_gap(treeified("x1*x3 + 0.1*x2*x3"), entangled_joint(), IndexSet{1, 3});
    CHECK(interacting.ledger_agrees);
    CHECK(interacting.gap != 0);
    CHECK(interacting.gap == interacting.decomposed_gap);
    Rational co_blocked = 0;
    for (const auto& c : interacting.excluded) {
        CHECK(c.partition.block_of(2).intersects(IndexSet{1, 3}));
        co_blocked += c.value;
    }
    CHECK(co_blocked == interacting.gap);
}

TEST_CASE("exact ledger for every hypothesis", "[pathpatch][property]") {
    std::mt19937_64 rng(53);
    for (int n = 2; n <= 4; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto dist = testing::random_joint(n, 5, rng);
            const auto tf = treeified(testing::random_polynomial(n, rng), n, n);
            const std::uint64_t full = IndexSet::range(n).mask();
            for (std::uint64_t m = 1; m < full; ++m) {
                const IndexSet s = IndexSet::from_mask(m);
                if (!s.contains(n)) {
                    continue;
                }
                const auto report = patching_gap(tf, dist, s);
                CHECK(report.gap == report.decomposed_gap);
                CHECK(report.admitted_total() == report.patched_expectation);
            }
        }
    }
}

TEST_CASE("sparsity with an inert complement", "[pathpatch][property]") {
    std::mt19937_64 rng(59);
    for (int n = 2; n <= 4; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            // S = {1..k} including the label k; f ignores the rest and the
            // joint factorizes across S and its complement.
            const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
            const auto inside = testing::random_joint(k, 4, rng);
            const auto outside = testing::random_joint(n - k, 4, rng);
            const auto dist = independent_product(inside, outside);
            const auto tf = treeified(testing::random_polynomial(k, rng), n, k);
            const auto report = patching_gap(tf, dist, IndexSet::range(k));
            CHECK(report.gap == 0);
            for (const auto& c : report.excluded) {
                CHECK(c.value == 0);
            }
        }
    }
}

TEST_CASE("product distribution closes every gap", "[pathpatch]") {
    const DiscreteJoint<Rational> a(1, {{0}, {3}}, {Rational(1, 3), Rational(2, 3)});
    const auto dist = independent_product(independent_product(a, a), a);
    const auto tf = treeified("x1*x2*x3 + x1^2*x3");
    for (IndexSet s : {IndexSet{3}, IndexSet{1, 3}, IndexSet{2, 3}}) {
        CHECK(patching_gap(tf, dist, s).gap == 0);
    }
}

TEST_CASE("complement partition", "[pathpatch]") {
    std::mt19937_64 rng(61);
    const auto dist = testing::random_joint(4, 5, rng);
    const auto tf = treeified("x1*x2*x3*x4 + x2*x3", 4, 1);
    const auto split = patching_gap(tf, dist, IndexSet{1}, parse_partition("2|3,4"));
    CHECK(format_partition(split.patched_pattern) == "1|2|3,4");
    CHECK(split.ledger_agrees);
    CHECK(split.admitted.size() == 2);
    CHECK_THROWS_AS(patching_gap(tf, dist, IndexSet{1}, parse_partition("2|3")), DomainError);
}

TEST_CASE("hypothesis errors", "[pathpatch][errors]") {
    const auto tf = treeified("x1*x3 + 0.1*x2");
    CHECK_THROWS_AS(patching_gap(tf, toy_joint(), IndexSet{1, 2}), HypothesisError);
    CHECK_THROWS_AS(patching_gap(tf, toy_joint(), IndexSet{}), HypothesisError);
    CHECK_THROWS_AS(patching_gap(tf, toy_joint(), IndexSet{1, 2, 3}), HypothesisError);
    auto bad_label = tf;
    bad_label.label_index = 4;
    CHECK_THROWS_AS(patching_gap(bad_label, toy_joint(), IndexSet{1, 3}), DomainError);
    auto bad_names = tf;
    bad_names.names = {"a", "a", "y"};
    CHECK_THROWS_AS(patching_gap(bad_names, toy_joint(), IndexSet{1, 3}), DomainError);
    bad_names.names = {"a", "y"};
    CHECK_THROWS_AS(patching_gap(bad_names, toy_joint(), IndexSet{1, 3}), DomainError);
}

TEST_CASE("together importance", "[pathpatch]") {
    const auto prod2 = testing::product_function<Rational>(2);
    CHECK(together_importance(prod2, testing::d0(), 1, 2) == Rational(1, 4));

    const DiscreteJoint<Rational> a(1, {{1}, {4}}, {Rational(1, 3), Rational(2, 3)});
    const auto indep = independent_product(independent_product(a, a), a);
    const auto prod3 = testing::product_function<Rational>(3);
    CHECK(together_importance(prod3, indep, 1, 2) == 0);
    CHECK(together_importance(prod3, indep, 2, 3) == 0);

    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 10; ++trial) {
        const auto dist = testing::random_joint(3, 5, rng);
        const auto f = make_oracle<Rational>(parse_expression("x1^2*x2 - 3*x1 + x2/2"), 3);
        CHECK(together_importance(f, dist, 1, 3) == 0);
        CHECK(together_importance(f, dist, 2, 3) == 0);
    }

    CHECK_THROWS_AS(together_importance(prod2, testing::d0(), 1, 1), DomainError);
    CHECK_THROWS_AS(together_importance(prod2, testing::d0(), 1, 3), DomainError);
}
