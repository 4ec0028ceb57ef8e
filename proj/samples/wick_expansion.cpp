// Prints the Wick product of three variables and checks its mean is zero
// under a small joint.
#include <partdecomp/distributions.hpp>
#include <partdecomp/wick.hpp>

#include <iostream>

using namespace partdecomp;

int main() {
    const auto eps = wick_product(3);
    std::cout << format_wick(eps) << "\n";

    const DiscreteJoint<Rational> dist(3, {{0, 1, 2}, {1, 1, 0}, {2, -1, 1}},
                                       {Rational(1, 2), Rational(1, 3), Rational(1, 6)});
    const auto moments = moment_table(dist);
    Rational mean = 0;
    for (std::size_t r = 0; r < dist.size(); ++r) {
        mean += dist.probs()[r] * evaluate_wick<Rational>(eps, std::span<const Rational>(dist.support()[r]), moments);
    }
    std::cout << "E[eps] = " << to_string(mean) << "\n";
}
