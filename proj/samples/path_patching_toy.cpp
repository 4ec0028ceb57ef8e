// Patching gap for the hypothesis {x1, y} on a three-path toy function,
// with the excluded cumulants that account for it.
#include <partdecomp/expression.hpp>
#include <partdecomp/pathpatch.hpp>

#include <iostream>

using namespace partdecomp;

int main() {
    const DiscreteJoint<Rational> dist(3, {{0, 0, 0}, {1, 1, 1}, {1, 0, 1}, {0, 1, 0}},
                                       {Rational(3, 10), Rational(3, 10), Rational(1, 5), Rational(1, 5)});
    for (const char* text : {"x1*x3 + 0.1*x2", "x1*x3 + 0.1*x2*x3"}) {
        const TreeifiedFunction<Rational> tf{make_oracle<Rational>(parse_expression(text)), 3, {"x1", "x2", "y"}};
        const auto report = patching_gap(tf, dist, IndexSet{1, 3});
        std::cout << text << ": E f = " << to_string(report.expectation)
                  << ", patched = " << to_string(report.patched_expectation) << ", gap = " << to_string(report.gap)
                  << "\n";
        for (const auto& c : report.excluded) {
            std::cout << "  K(" << format_partition(c.partition) << ") = " << to_string(c.value) << "\n";
        }
    }
}
