#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "distributions.hpp"

namespace partdecomp {

/// Function over n path inputs of a treeified computation, one of which is
/// the label that determines the loss.
template <Scalar T>
struct TreeifiedFunction {
    FunctionOracle<T> f;
    int label_index = 1;
    std::vector<std::string> names;

    void validate() const {
        if (label_index < 1 || label_index > f.arity) {
            throw DomainError("label index " + std::to_string(label_index) + " outside 1.." +
                              std::to_string(f.arity));
        }
        if (!names.empty()) {
            if (names.size() != static_cast<std::size_t>(f.arity)) {
                throw DomainError("expected " + std::to_string(f.arity) + " path names, got " +
                                  std::to_string(names.size()));
            }
            if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
                throw DomainError("path names must be unique");
            }
        }
    }
};

template <Scalar T>
struct Contribution {
    Partition partition;
    T value;
};

/// Outcome of testing E f against the patched expectation in which the
/// hypothesis block S and the complement blocks are sampled independently.
template <Scalar T>
struct ImportanceReport {
    IndexSet hypothesis;
    /// {S} together with the complement's blocks.
    Partition patched_pattern;
    T expectation{};
    T patched_expectation{};
    /// expectation - patched_expectation, from the two pattern expectations.
    T gap{};
    /// Sum of K_f over excluded partitions; equals `gap`.
    T decomposed_gap{};
    bool ledger_agrees = false;
    /// Refinements of the patched pattern; their K_f sum to the patched expectation.
    std::vector<Contribution<T>> admitted;
    /// Every other partition.
    std::vector<Contribution<T>> excluded;

    T admitted_total() const {
        T s = 0;
        for (const auto& c : admitted) {
            s += c.value;
        }
        return s;
    }
};

namespace detail {

template <Scalar T>
bool values_agree(const T& a, const T& b) {
    if constexpr (is_exact_v<T>) {
        return a == b;
    } else {
        return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    }
}

}  // namespace detail

/// Patching gap for hypothesis S (which must contain the label). The
/// complement is one jointly-resampled block unless `complement_partition`
/// splits it further.
template <Scalar T>
ImportanceReport<T> patching_gap(const TreeifiedFunction<T>& tf, const DiscreteJoint<T>& dist, IndexSet s,
                                 const std::optional<Partition>& complement_partition = std::nullopt,
                                 const Limits& limits = {}) {
    tf.validate();
    const int n = tf.f.arity;
    const IndexSet all = IndexSet::range(n);
    if (s.empty() || s == all || !s.is_subset_of(all)) {
        throw HypothesisError("hypothesis {" + format_index_set(s) + "} must be a nonempty proper subset of 1.." +
                              std::to_string(n));
    }
    if (!s.contains(tf.label_index)) {
        throw HypothesisError("hypothesis {" + format_index_set(s) + "} must contain the label index " +
                              std::to_string(tf.label_index));
    }
    const Partition rest = complement_partition.value_or(Partition::one_block(all - s));
    if (rest.ground() != all - s) {
        throw DomainError("complement partition must cover exactly {" + format_index_set(all - s) + "}");
    }

    ImportanceReport<T> report;
    report.hypothesis = s;
    report.patched_pattern = join_disjoint(Partition::one_block(s), rest);
    report.expectation = pattern_expectation(tf.f, dist, Partition::one_block(all));
    report.patched_expectation = pattern_expectation(tf.f, dist, report.patched_pattern);
    report.gap = report.expectation - report.patched_expectation;
    report.decomposed_gap = 0;
    for (auto& [alpha, k] : generalized_cumulants(tf.f, dist, limits)) {
        if (is_refinement(alpha, report.patched_pattern)) {
            report.admitted.push_back({alpha, k});
        } else {
            report.decomposed_gap += k;
            report.excluded.push_back({alpha, k});
        }
    }
    report.ledger_agrees = detail::values_agree(report.gap, report.decomposed_gap);
    return report;
}

/// How the pairwise importance below is defined; carried into reports.
inline constexpr const char* kTogetherImportanceDefinition =
    "sum of K_f(alpha) over all partitions alpha in which i and j share a block";

/// Sum of K_f(alpha) over partitions in which arguments i and j share a block.
template <Scalar T>
T together_importance(const std::map<Partition, T, CanonicalLess>& cumulants, int i, int j) {
    T total = 0;
    for (const auto& [alpha, k] : cumulants) {
        const IndexSet b = alpha.block_of(i);
        if (b.contains(j)) {
            total += k;
        }
    }
    return total;
}

template <Scalar T>
T together_importance(const FunctionOracle<T>& f, const DiscreteJoint<T>& dist, int i, int j,
                      const Limits& limits = {}) {
    if (i == j) {
        throw DomainError("together importance needs two distinct indices");
    }
    for (int k : {i, j}) {
        if (k < 1 || k > f.arity) {
            throw DomainError("index " + std::to_string(k) + " outside 1.." + std::to_string(f.arity));
        }
    }
    return together_importance(generalized_cumulants(f, dist, limits), i, j);
}

}  // namespace partdecomp
