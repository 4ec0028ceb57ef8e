#include <partdecomp/cumulants.hpp>
#include <partdecomp/distributions.hpp>

#include <catch_amalgamated.hpp>

#include <random>
#include <thread>

#include "test_support.hpp"

using namespace partdecomp;

namespace {

SignedPatternSum sum_of(std::initializer_list<std::pair<const char*, int>> terms) {
    SignedPatternSum s;
    for (const auto& [p, c] : terms) {
        s.add(parse_partition(p), c);
    }
    return s;
}

std::vector<std::vector<Integer>> ints(std::initializer_list<std::initializer_list<int>> rows) {
    std::vector<std::vector<Integer>> out;
    for (auto r : rows) {
        out.emplace_back(r.begin(), r.end());
    }
    return out;
}

}  // namespace

TEST_CASE("cumulant_coefficients golden values", "[cumulants]") {
    CHECK(cumulant_coefficients(parse_partition("1|2")) == sum_of({{"1|2", 1}}));
    CHECK(cumulant_coefficients(parse_partition("1,2")) == sum_of({{"1|2", -1}, {"1,2", 1}}));
    CHECK(cumulant_coefficients(parse_partition("1,2,3")) ==
          sum_of({{"1|2|3", 2}, {"1|2,3", -1}, {"2|1,3", -1}, {"3|1,2", -1}, {"1,2,3", 1}}));
    CHECK(cumulant_coefficients(parse_partition("1,2|3,4")) ==
          sum_of({{"3,4|1,2", 1}, {"3,4|1|2", -1}, {"3|4|1,2", -1}, {"3|4|1|2", 1}}));
    CHECK(cumulant_coefficients(parse_partition("7")) == sum_of({{"7", 1}}));
}

TEST_CASE("coefficient matrices", "[cumulants]") {
    CHECK(coefficient_matrix(1).rows == ints({{1}}));
    const auto m2 = coefficient_matrix(2);
    CHECK(m2.rows == ints({{1, 0}, {-1, 1}}));
    CHECK(format_partition(m2.order[0]) == "1|2");
    const auto m3 = coefficient_matrix(3);
    CHECK(m3.rows == ints({{1, 0, 0, 0, 0},
                           {-1, 1, 0, 0, 0},
                           {-1, 0, 1, 0, 0},
                           {-1, 0, 0, 1, 0},
                           {2, -1, -1, -1, 1}}));
    CHECK_THROWS_AS(coefficient_matrix(0), DomainError);
    CHECK_THROWS_AS(coefficient_matrix(11), SizeLimitError);
}

TEST_CASE("block choice does not change the coefficients", "[cumulants][property]") {
    const BlockChooser last = [](const Partition& p) { return p.size() - 1; };
    std::mt19937_64 rng(7);
    const BlockChooser random = [&rng](const Partition& p) {
        return std::uniform_int_distribution<std::size_t>(0, p.size() - 1)(rng);
    };
    for (int n = 1; n <= 5; ++n) {
        for (const auto& pi : enumerate_partitions(n)) {
            const auto canonical = cumulant_coefficients(pi);
            CHECK(cumulant_coefficients_with(pi, last) == canonical);
            CHECK(cumulant_coefficients_with(pi, random) == canonical);
            for (std::size_t b = 0; b < pi.size(); ++b) {
                const BlockChooser top = [&, b, depth = 0](const Partition&) mutable {
                    return depth++ == 0 ? b : 0;
                };
                CHECK(cumulant_coefficients_with(pi, top) == canonical);
            }
        }
    }
}

TEST_CASE("matrix rows sum to the one-block indicator", "[cumulants][property]") {
    for (int n = 1; n <= 6; ++n) {
        const auto m = coefficient_matrix(n);
        for (std::size_t c = 0; c < m.dimension(); ++c) {
            Integer col = 0;
            for (const auto& row : m.rows) {
                col += row[c];
            }
            CHECK(col == (c + 1 == m.dimension() ? 1 : 0));
        }
    }
}

TEST_CASE("matrix entries equal the Mobius function", "[cumulants][property]") {
    for (int n = 1; n <= 6; ++n) {
        const auto m = coefficient_matrix(n);
        for (std::size_t r = 0; r < m.dimension(); ++r) {
            for (std::size_t c = 0; c < m.dimension(); ++c) {
                const auto& pi = m.order[r];
                const auto& alpha = m.order[c];
                const Integer expected = is_refinement(alpha, pi) ? mobius(alpha, pi) : Integer(0);
                CHECK(m.rows[r][c] == expected);
                if (c > r) {
                    CHECK(m.rows[r][c] == 0);
                }
            }
            CHECK(m.rows[r][r] == 1);
        }
    }
}

TEST_CASE("classical cumulant coefficients", "[cumulants]") {
    CHECK(classical_cumulant_coefficients(IndexSet{1}) == sum_of({{"1", 1}}));
    CHECK(classical_cumulant_coefficients(IndexSet{1, 2}) == sum_of({{"1,2", 1}, {"1|2", -1}}));
    // Frozen from the Möbius formula (-1)^(k-1) (k-1)! on the top element.
    CHECK(classical_cumulant_coefficients(IndexSet{1, 2, 3}) ==
          sum_of({{"1,2,3", 1}, {"1|2,3", -1}, {"2|1,3", -1}, {"3|1,2", -1}, {"1|2|3", 2}}));
    CHECK_THROWS_AS(classical_cumulant_coefficients(IndexSet{}), DomainError);
    for (int n = 1; n <= 6; ++n) {
        const auto top = Partition::one_block(IndexSet::range(n));
        for (const auto& [alpha, c] : classical_cumulant_coefficients(IndexSet::range(n))) {
            CHECK(c == mobius(alpha, top));
        }
    }
}

TEST_CASE("classical consistency with generalized cumulants of the product", "[cumulants][property]") {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto dist = testing::random_joint(n, 5, rng);
            const auto k = generalized_cumulants(testing::product_function<Rational>(n), dist);
            for (const auto& [pi, value] : k) {
                Rational expected = 1;
                for (IndexSet b : pi.blocks()) {
                    expected *= classical_cumulant(dist, b);
                }
                CHECK(value == expected);
            }
        }
    }
}

TEST_CASE("memoized coefficients are thread safe", "[cumulants][concurrency]") {
    std::vector<std::thread> pool;
    std::vector<SignedPatternSum> results(8);
    const Partition pi = parse_partition("1,2,3,4,5,6");
    for (int t = 0; t < 8; ++t) {
        pool.emplace_back([&, t] { results[t] = cumulant_coefficients(pi); });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& r : results) {
        CHECK(r == results.front());
    }
    CHECK(results.front().size() == 203);
}
