// Generalized cumulants of f(x1, x2) = x1 * x2 under a perfectly correlated
// pair, next to the coefficient matrix that produces them.
#include <partdecomp/distributions.hpp>
#include <partdecomp/expression.hpp>

#include <iostream>

using namespace partdecomp;

int main() {
    const DiscreteJoint<Rational> d0(2, {{0, 0}, {1, 1}}, {Rational(1, 2), Rational(1, 2)});
    const auto f = make_oracle<Rational>(parse_expression("x1*x2"));

    const auto m = coefficient_matrix(2);
    for (std::size_t r = 0; r < m.dimension(); ++r) {
        std::cout << "K(" << format_partition(m.order[r]) << ") =";
        for (std::size_t c = 0; c < m.dimension(); ++c) {
            if (m.rows[r][c] != 0) {
                std::cout << " " << (m.rows[r][c] > 0 ? "+" : "") << m.rows[r][c].str() << "*E_{"
                          << format_partition(m.order[c]) << "}";
            }
        }
        std::cout << "\n";
    }
    for (const auto& [pi, k] : generalized_cumulants(f, d0)) {
        std::cout << "  " << format_partition(pi) << " -> " << to_string(k) << "\n";
    }
    std::cout << "E[f] = " << to_string(pattern_expectation(f, d0, parse_partition("1,2"))) << "\n";
}
