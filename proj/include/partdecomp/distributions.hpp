#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cumulants.hpp"
#include "genwick.hpp"
#include "numeric.hpp"
#include "partitions.hpp"
#include "wick.hpp"

namespace partdecomp {

/// Finite-support joint distribution of n variables. Rows are kept sorted so
/// equal distributions compare equal regardless of input order.
template <Scalar T>
class DiscreteJoint {
public:
    DiscreteJoint() = default;

    DiscreteJoint(int n, std::vector<std::vector<T>> support, std::vector<T> probs) : arity_(n) {
        if (n < 1) {
            throw DomainError("a joint distribution needs at least one variable");
        }
        if (support.size() != probs.size()) {
            throw DomainError("support has " + std::to_string(support.size()) + " rows but " +
                              std::to_string(probs.size()) + " probabilities");
        }
        if (support.empty()) {
            throw DomainError("support is empty");
        }
        std::vector<std::size_t> order(support.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
        T total = 0;
        for (std::size_t k : order) {
            if (support[k].size() != static_cast<std::size_t>(n)) {
                throw ArityError("support row has " + std::to_string(support[k].size()) + " values, expected " +
                                 std::to_string(n));
            }
            if (probs[k] < 0) {
                throw DomainError("negative probability");
            }
            if (!support_.empty() && support_.back() == support[k]) {
                throw DomainError("support rows must be distinct");
            }
            total += probs[k];
            support_.push_back(std::move(support[k]));
            probs_.push_back(probs[k]);
        }
        if constexpr (is_exact_v<T>) {
            if (total != 1) {
                throw DomainError("probabilities sum to " + to_string(total) + ", not 1");
            }
        } else {
            if (!(std::abs(total - 1.0) <= 1e-12)) {
                throw DomainError("probabilities sum to " + to_string(total) + ", not 1 within 1e-12");
            }
        }
    }

    int arity() const { return arity_; }
    std::size_t size() const { return support_.size(); }
    const std::vector<std::vector<T>>& support() const { return support_; }
    const std::vector<T>& probs() const { return probs_; }

    /// Same distribution on the other backend.
    template <Scalar U>
    DiscreteJoint<U> as() const {
        std::vector<std::vector<U>> rows;
        std::vector<U> ps;
        for (std::size_t k = 0; k < size(); ++k) {
            std::vector<U> row;
            for (const T& v : support_[k]) {
                row.push_back(cast<U>(v));
            }
            rows.push_back(std::move(row));
            ps.push_back(cast<U>(probs_[k]));
        }
        return DiscreteJoint<U>(arity_, std::move(rows), std::move(ps));
    }

    friend bool operator==(const DiscreteJoint& a, const DiscreteJoint& b) {
        return a.arity_ == b.arity_ && a.support_ == b.support_ && a.probs_ == b.probs_;
    }

private:
    template <Scalar U>
    static U cast(const T& v) {
        if constexpr (std::is_same_v<T, U>) {
            return v;
        } else if constexpr (is_exact_v<T>) {
            return v.template convert_to<double>();
        } else {
            return rational_from_double(v);
        }
    }

    int arity_ = 0;
    std::vector<std::vector<T>> support_;
    std::vector<T> probs_;
};

/// Pure function of n real arguments. It must accept tuples assembled from
/// different support rows, since independent blocks mix rows.
template <Scalar T>
struct FunctionOracle {
    int arity = 0;
    std::function<T(std::span<const T>)> fn;

    T operator()(std::span<const T> x) const { return fn(x); }
};

/// Upper bound on f evaluations per exact pattern expectation.
inline constexpr double kMaxEvaluations = 1e7;

/// Distribution of the variables in `block` (columns in ascending index
/// order); equal projected rows are merged.
template <Scalar T>
DiscreteJoint<T> marginal(const DiscreteJoint<T>& dist, IndexSet block) {
    if (block.empty()) {
        throw DomainError("marginal needs a nonempty block");
    }
    if (!block.is_subset_of(IndexSet::range(dist.arity()))) {
        throw DomainError("block {" + format_index_set(block) + "} exceeds the distribution's arity");
    }
    const std::vector<int> cols = block.elements();
    std::map<std::vector<T>, T> merged;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        std::vector<T> key;
        key.reserve(cols.size());
        for (int c : cols) {
            key.push_back(dist.support()[k][c - 1]);
        }
        merged[std::move(key)] += dist.probs()[k];
    }
    std::vector<std::vector<T>> rows;
    std::vector<T> probs;
    for (auto& [row, p] : merged) {
        rows.push_back(row);
        probs.push_back(p);
    }
    return DiscreteJoint<T>(static_cast<int>(cols.size()), std::move(rows), std::move(probs));
}

/// Joint of independent a and b, with b's variables numbered after a's.
template <Scalar T>
DiscreteJoint<T> independent_product(const DiscreteJoint<T>& a, const DiscreteJoint<T>& b) {
    std::vector<std::vector<T>> rows;
    std::vector<T> probs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            std::vector<T> row = a.support()[i];
            row.insert(row.end(), b.support()[j].begin(), b.support()[j].end());
            rows.push_back(std::move(row));
            probs.push_back(a.probs()[i] * b.probs()[j]);
        }
    }
    return DiscreteJoint<T>(a.arity() + b.arity(), std::move(rows), std::move(probs));
}

namespace detail {

/// E over the blocks of `averaged` (joint within, independent across) of f,
/// with every other argument taken from `x`.
template <Scalar T>
T averaged_value(const FunctionOracle<T>& f, const DiscreteJoint<T>& dist, const Partition& averaged,
                 std::vector<T> args) {
    std::vector<DiscreteJoint<T>> margs;
    std::vector<std::vector<int>> cols;
    double cost = 1;
    for (IndexSet b : averaged.blocks()) {
        margs.push_back(marginal(dist, b));
        cols.push_back(b.elements());
        cost *= static_cast<double>(margs.back().size());
    }
    if (cost > kMaxEvaluations) {
        throw CostLimitError("pattern needs " + to_string(cost) + " evaluations, limit is 1e7");
    }
    if (margs.empty()) {
        return f(args);
    }
    // Odometer over one support row per block; weights[k] is the product of
    // the probabilities chosen for blocks 0..k.
    const std::size_t m = margs.size();
    std::vector<std::size_t> pick(m, 0);
    std::vector<T> weights(m);
    auto place = [&](std::size_t k) {
        const auto& row = margs[k].support()[pick[k]];
        for (std::size_t c = 0; c < cols[k].size(); ++c) {
            args[cols[k][c] - 1] = row[c];
        }
        weights[k] = (k == 0 ? T(1) : weights[k - 1]) * margs[k].probs()[pick[k]];
    };
    for (std::size_t k = 0; k < m; ++k) {
        place(k);
    }
    T total = 0;
    while (true) {
        total += weights[m - 1] * f(args);
        std::size_t k = m;
        while (k > 0 && pick[k - 1] + 1 == margs[k - 1].size()) {
            --k;
        }
        if (k == 0) {
            break;
        }
        ++pick[k - 1];
        place(k - 1);
        for (std::size_t j = k; j < m; ++j) {
            pick[j] = 0;
            place(j);
        }
    }
    return total;
}

template <Scalar T>
void check_arity(const FunctionOracle<T>& f, const DiscreteJoint<T>& dist) {
    if (f.arity != dist.arity()) {
        throw ArityError("function takes " + std::to_string(f.arity) + " arguments, distribution has " +
                         std::to_string(dist.arity()));
    }
}

}  // namespace detail

/// E_pattern[f]: blocks of `pattern` drawn jointly from their marginals,
/// distinct blocks independently. Exact nested sum.
template <Scalar T>
T pattern_expectation(const FunctionOracle<T>& f, const DiscreteJoint<T>& dist, const EvaluationPattern& pattern) {
    detail::check_arity(f, dist);
    if (pattern.ground() != IndexSet::range(dist.arity())) {
        throw ArityError("pattern " + format_partition(pattern) + " does not cover arguments 1.." +
                         std::to_string(dist.arity()));
    }
    return detail::averaged_value(f, dist, pattern, std::vector<T>(dist.arity(), T(0)));
}

/// Value of a generalized pattern: averaged arguments marginal-summed, free
/// arguments read from x (x[i - 1] is x_i; entries at averaged positions are
/// ignored).
template <Scalar T>
T gen_pattern_value(const FunctionOracle<T>& f, const DiscreteJoint<T>& dist, const GenPattern& pattern,
                    std::span<const T> x) {
    detail::check_arity(f, dist);
    if (pattern.arguments() != IndexSet::range(dist.arity())) {
        throw ArityError("pattern does not cover arguments 1.." + std::to_string(dist.arity()));
    }
    if (!pattern.free.empty() && static_cast<std::size_t>(pattern.free.max()) > x.size()) {
        throw LookupError("missing free value for x" + std::to_string(pattern.free.max()));
    }
    std::vector<T> args(dist.arity(), T(0));
    for (int i : pattern.free.elements()) {
        args[i - 1] = x[i - 1];
    }
    return detail::averaged_value(f, dist, pattern.averaged, std::move(args));
}

/// f with the arguments in `blocks` averaged out (jointly within each block).
/// The result keeps arity n and ignores the averaged positions.
template <Scalar T>
FunctionOracle<T> marginalize(const FunctionOracle<T>& f, const DiscreteJoint<T>& dist, const Partition& blocks) {
    detail::check_arity(f, dist);
    if (!blocks.ground().is_subset_of(IndexSet::range(dist.arity()))) {
        throw DomainError("blocks exceed the distribution's arity");
    }
    return FunctionOracle<T>{f.arity, [f, dist, blocks](std::span<const T> x) {
                                 return detail::averaged_value(f, dist, blocks, std::vector<T>(x.begin(), x.end()));
                             }};
}

/// sum_alpha c_alpha E_alpha[f] over patterns covering all n arguments.
template <Scalar T>
T evaluate_signed_sum(const SignedPatternSum& sum, const FunctionOracle<T>& f, const DiscreteJoint<T>& dist) {
    T total = 0;
    for (const auto& [pattern, c] : sum) {
        total += from_integer<T>(c) * pattern_expectation(f, dist, pattern);
    }
    return total;
}

/// sum_p c_p (value of pattern p at x).
template <Scalar T>
T evaluate_signed_sum(const SignedGenSum& sum, const FunctionOracle<T>& f, const DiscreteJoint<T>& dist,
                      std::span<const T> x) {
    if (sum.arity() != dist.arity()) {
        throw ArityError("pattern sum has arity " + std::to_string(sum.arity()) + ", distribution " +
                         std::to_string(dist.arity()));
    }
    T total = 0;
    for (const auto& [pattern, c] : sum) {
        total += from_integer<T>(c) * gen_pattern_value(f, dist, pattern, x);
    }
    return total;
}

/// K_f(pi) for every partition pi of [n], in canonical order. Each pattern
/// expectation is computed once and pushed through the coefficient matrix.
template <Scalar T>
std::map<Partition, T, CanonicalLess> generalized_cumulants(const FunctionOracle<T>& f, const DiscreteJoint<T>& dist,
                                                            const Limits& limits = {}) {
    detail::check_arity(f, dist);
    const auto parts = enumerate_partitions(dist.arity(), limits);
    std::map<Partition, T, CanonicalLess> expectations;
    for (const Partition& p : parts) {
        expectations.emplace(p, pattern_expectation(f, dist, p));
    }
    std::map<Partition, T, CanonicalLess> out;
    for (const Partition& p : parts) {
        T k = 0;
        for (const auto& [alpha, c] : cumulant_coefficients(p, limits)) {
            k += from_integer<T>(c) * expectations.at(alpha);
        }
        out.emplace(p, k);
    }
    return out;
}

/// E[prod_{i in block} X_i] under the joint.
template <Scalar T>
T joint_moment(const DiscreteJoint<T>& dist, IndexSet block) {
    if (!block.is_subset_of(IndexSet::range(dist.arity()))) {
        throw DomainError("block {" + format_index_set(block) + "} exceeds the distribution's arity");
    }
    T total = 0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        T prod = dist.probs()[k];
        for (int i : block.elements()) {
            prod *= dist.support()[k][i - 1];
        }
        total += prod;
    }
    return total;
}

/// Every nonempty joint moment of the distribution.
template <Scalar T>
MomentTable<T> moment_table(const DiscreteJoint<T>& dist) {
    MomentTable<T> out;
    const std::uint64_t full = IndexSet::range(dist.arity()).mask();
    for (std::uint64_t sub = full; sub != 0; sub = (sub - 1) & full) {
        out.emplace(IndexSet::from_mask(sub), joint_moment(dist, IndexSet::from_mask(sub)));
    }
    return out;
}

/// Classical joint cumulant kappa(X_ground).
template <Scalar T>
T classical_cumulant(const DiscreteJoint<T>& dist, IndexSet ground, const Limits& limits = {}) {
    if (!ground.is_subset_of(IndexSet::range(dist.arity()))) {
        throw DomainError("ground {" + format_index_set(ground) + "} exceeds the distribution's arity");
    }
    T total = 0;
    for (const auto& [alpha, c] : classical_cumulant_coefficients(ground, limits)) {
        T prod = from_integer<T>(c);
        for (IndexSet b : alpha.blocks()) {
            prod *= joint_moment(dist, b);
        }
        total += prod;
    }
    return total;
}

struct EstimateWithError {
    double estimate = 0;
    double stderr_ = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const EstimateWithError&, const EstimateWithError&) = default;
};

struct MonteCarloOptions {
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform in [0, 1) for draw `k` of block `b`; depends only on its inputs.
inline double counter_uniform(std::uint64_t seed, std::uint64_t block, std::uint64_t k) {
    const std::uint64_t h = splitmix64(seed ^ splitmix64(block ^ splitmix64(k ^ 0x5851f42d4c957f2dULL)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Monte Carlo estimate of E_pattern[f]. Sample k of block b draws from
/// hash(seed, b, k), so the result is bit-identical for any worker count.
inline EstimateWithError monte_carlo_pattern_expectation(const FunctionOracle<double>& f,
                                                         const DiscreteJoint<double>& dist,
                                                         const EvaluationPattern& pattern,
                                                         const MonteCarloOptions& options) {
    detail::check_arity(f, dist);
    if (options.samples < 2) {
        throw DomainError("Monte Carlo needs at least 2 samples");
    }
    if (pattern.ground() != IndexSet::range(dist.arity())) {
        throw ArityError("pattern " + format_partition(pattern) + " does not cover arguments 1.." +
                         std::to_string(dist.arity()));
    }
    struct BlockSampler {
        std::vector<int> cols;
        DiscreteJoint<double> marg;
        std::vector<double> cdf;
    };
    std::vector<BlockSampler> blocks;
    for (IndexSet b : pattern.blocks()) {
        BlockSampler s{b.elements(), marginal(dist, b), {}};
        std::partial_sum(s.marg.probs().begin(), s.marg.probs().end(), std::back_inserter(s.cdf));
        blocks.push_back(std::move(s));
    }
    auto sample_value = [&](std::uint64_t k, std::vector<double>& args) {
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const auto& s = blocks[b];
            const double u = detail::counter_uniform(options.seed, b, k) * s.cdf.back();
            std::size_t row = static_cast<std::size_t>(std::upper_bound(s.cdf.begin(), s.cdf.end(), u) - s.cdf.begin());
            row = std::min(row, s.cdf.size() - 1);
            for (std::size_t c = 0; c < s.cols.size(); ++c) {
                args[s.cols[c] - 1] = s.marg.support()[row][c];
            }
        }
        return f(args);
    };

    std::vector<double> scratch(dist.arity());
    const double shift = sample_value(0, scratch);

    constexpr std::uint64_t kChunk = 4096;
    const std::uint64_t chunks = (options.samples + kChunk - 1) / kChunk;
    std::vector<std::pair<double, double>> partial(chunks);
    auto run_chunks = [&](unsigned worker, unsigned stride) {
        std::vector<double> args(dist.arity());
        for (std::uint64_t c = worker; c < chunks; c += stride) {
            double s1 = 0;
            double s2 = 0;
            const std::uint64_t end = std::min(options.samples, (c + 1) * kChunk);
            for (std::uint64_t k = c * kChunk; k < end; ++k) {
                const double v = sample_value(k, args) - shift;
                s1 += v;
                s2 += v * v;
            }
            partial[c] = {s1, s2};
        }
    };
    const unsigned workers = std::max(1u, options.workers);
    if (workers == 1) {
        run_chunks(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(run_chunks, w, workers);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    double s1 = 0;
    double s2 = 0;
    for (const auto& [a, b] : partial) {
        s1 += a;
        s2 += b;
    }
    const double n = static_cast<double>(options.samples);
    const double mean = s1 / n;
    const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1));
    return EstimateWithError{shift + mean, std::sqrt(var / n), options.samples, options.seed};
}

}  // namespace partdecomp
