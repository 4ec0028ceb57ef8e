#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cumulants.hpp"
#include "memo.hpp"
#include "partitions.hpp"
#include "signed_sum.hpp"

namespace partdecomp {

/// Evaluation pattern of an n-argument f where some arguments are averaged
/// (jointly within each block, independently across blocks) and the rest
/// are bound to literal values x_i.
struct GenPattern {
    Partition averaged;
    IndexSet free;

    GenPattern() = default;
    GenPattern(Partition avg, IndexSet free_args) : averaged(std::move(avg)), free(free_args) {
        if (averaged.ground().intersects(free)) {
            throw DomainError("averaged and free arguments overlap");
        }
    }

    /// All n arguments bound to x.
    static GenPattern all_free(int n) { return GenPattern(Partition(), IndexSet::range(n)); }

    IndexSet arguments() const { return averaged.ground() | free; }

    friend bool operator==(const GenPattern&, const GenPattern&) = default;
};

/// Fewest averaged arguments first, then canonical partition order.
struct GenPatternLess {
    bool operator()(const GenPattern& a, const GenPattern& b) const {
        const std::size_t sa = a.averaged.ground().size();
        const std::size_t sb = b.averaged.ground().size();
        if (sa != sb) {
            return sa < sb;
        }
        if (!(a.averaged == b.averaged)) {
            return CanonicalLess{}(a.averaged, b.averaged);
        }
        return lex_less(a.free, b.free);
    }
};

/// Integer combination of generalized patterns, all over arguments 1..n.
class SignedGenSum {
public:
    using Terms = SignedSum<GenPattern, GenPatternLess>;

    SignedGenSum() = default;
    explicit SignedGenSum(int arity) : arity_(arity) {}

    void add(const GenPattern& p, const Integer& coef) {
        if (p.arguments() != IndexSet::range(arity_)) {
            throw DomainError("pattern does not cover arguments 1.." + std::to_string(arity_));
        }
        terms_.add(p, coef);
    }

    void add(const SignedGenSum& other, const Integer& scale = 1) {
        for (const auto& [p, c] : other.terms_) {
            add(p, c * scale);
        }
    }

    int arity() const { return arity_; }
    const Terms& terms() const { return terms_; }
    Integer coefficient(const GenPattern& p) const { return terms_.coefficient(p); }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    /// Union of the averaged arguments over all patterns.
    IndexSet averaged_support() const {
        IndexSet s;
        for (const auto& [p, c] : terms_) {
            s = s | p.averaged.ground();
        }
        return s;
    }

    friend bool operator==(const SignedGenSum& a, const SignedGenSum& b) {
        return a.arity_ == b.arity_ && a.terms_ == b.terms_;
    }

private:
    int arity_ = 0;
    Terms terms_;
};

/// Averages the arguments in `block` jointly in every pattern. `block` must
/// be free in every pattern.
inline SignedGenSum append_averaged_block(const SignedGenSum& sum, IndexSet block) {
    if (block.empty()) {
        return sum;
    }
    SignedGenSum out(sum.arity());
    for (const auto& [p, c] : sum) {
        if (!block.is_subset_of(p.free)) {
            throw DomainError("block {" + format_index_set(block) + "} is not free in every pattern");
        }
        out.add(GenPattern(join_disjoint(p.averaged, Partition::one_block(block)), p.free - block), c);
    }
    return out;
}

namespace detail {

inline void check_subset(int n, IndexSet s) {
    if (n < 0 || !s.is_subset_of(IndexSet::range(n))) {
        throw DomainError("subset {" + format_index_set(s) + "} is not contained in 1.." + std::to_string(n));
    }
}

}  // namespace detail

/// Generalized Wick product omega_{f, X_S} as a function of all n arguments:
/// f minus, for every proper subset U of S, omega_U with S \ U averaged.
inline SignedGenSum genwick_product(int n, IndexSet s, const Limits& limits = {}) {
    detail::check_subset(n, s);
    check_ground_cap(s, limits);
    using Key = std::pair<int, std::uint64_t>;
    static detail::MemoTable<Key, SignedGenSum> memo;
    const Key key{n, s.mask()};
    if (auto hit = memo.find(key)) {
        return *hit;
    }
    SignedGenSum out(n);
    out.add(GenPattern::all_free(n), 1);
    if (!s.empty()) {
        const std::uint64_t full = s.mask();
        for (std::uint64_t sub = (full - 1) & full;; sub = (sub - 1) & full) {
            const IndexSet u = IndexSet::from_mask(sub);
            out.add(append_averaged_block(genwick_product(n, u, limits), s - u), -1);
            if (sub == 0) {
                break;
            }
        }
    }
    return memo.insert(key, std::move(out));
}

/// Generalized Wick term W_f(S): omega_S with the complement averaged
/// jointly. Summing over all S reproduces f.
inline SignedGenSum genwick_term(int n, IndexSet s, const Limits& limits = {}) {
    detail::check_subset(n, s);
    return append_averaged_block(genwick_product(n, s, limits), IndexSet::range(n) - s);
}

/// Generalized cumulant of omega_S over a partition `pi` of the complement:
/// K_{omega_S}(pi). Summing over every partition of the complement gives
/// genwick_term(n, S).
inline SignedGenSum genwick_term_partitioned(int n, IndexSet s, const Partition& pi, const Limits& limits = {}) {
    detail::check_subset(n, s);
    const IndexSet complement = IndexSet::range(n) - s;
    if (pi.ground() != complement) {
        throw DomainError("partition must cover exactly the complement {" + format_index_set(complement) + "}");
    }
    const SignedGenSum omega = genwick_product(n, s, limits);
    SignedGenSum out(n);
    for (const auto& [alpha, c] : cumulant_coefficients(pi, limits)) {
        for (const auto& [p, d] : omega) {
            out.add(GenPattern(join_disjoint(p.averaged, alpha), p.free - alpha.ground()), c * d);
        }
    }
    return out;
}

/// Marginalizes the arguments in T out of an omega sum: T is averaged
/// jointly in every pattern and then dropped, and the surviving arguments
/// are relabeled order-preserving onto 1..m. For omega_{f,S} this yields
/// omega_{g,S'} with g = E_T f.
inline SignedGenSum commute_expectation(const SignedGenSum& sum, IndexSet t) {
    const IndexSet all = IndexSet::range(sum.arity());
    if (!t.is_subset_of(all)) {
        throw DomainError("marginalized set {" + format_index_set(t) + "} exceeds the arity");
    }
    if (t.intersects(sum.averaged_support())) {
        throw DomainError("marginalized set {" + format_index_set(t) + "} overlaps the averaged set");
    }
    const IndexSet kept = all - t;
    const SignedGenSum appended = append_averaged_block(sum, t);
    SignedGenSum out(static_cast<int>(kept.size()));
    for (const auto& [p, c] : appended) {
        std::vector<IndexSet> blocks;
        for (IndexSet b : p.averaged.blocks()) {
            if (b != t) {
                blocks.push_back(compress(b, kept));
            }
        }
        out.add(GenPattern(Partition(std::move(blocks)), compress(p.free, kept)), c);
    }
    return out;
}

inline std::string format_gen_pattern(const GenPattern& p) {
    if (p.averaged.empty()) {
        return "f(x)";
    }
    return "E_{" + format_partition(p.averaged) + "}";
}

/// e.g. "f(x) - E_{1} - E_{2} + 2*E_{1|2} - E_{1,2}"
inline std::string format_gen_sum(const SignedGenSum& sum) {
    if (sum.empty()) {
        return "0";
    }
    std::string out;
    bool first = true;
    for (const auto& [p, c] : sum) {
        const Integer mag = abs(c);
        if (first) {
            out += c < 0 ? "-" : "";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (mag != 1) {
            out += mag.str() + "*";
        }
        out += format_gen_pattern(p);
        first = false;
    }
    return out;
}

inline std::string format_gen_sum_latex(const SignedGenSum& sum) {
    if (sum.empty()) {
        return "0";
    }
    std::string out;
    bool first = true;
    for (const auto& [p, c] : sum) {
        const Integer mag = abs(c);
        if (first) {
            out += c < 0 ? "-" : "";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (mag != 1) {
            out += mag.str();
        }
        if (p.averaged.empty()) {
            out += "f(x_{1}, \\ldots, x_{" + std::to_string(sum.arity()) + "})";
        } else {
            std::string label;
            for (std::size_t k = 0; k < p.averaged.size(); ++k) {
                if (k > 0) {
                    label += "|";
                }
                for (int i : p.averaged.blocks()[k].elements()) {
                    label += std::to_string(i);
                }
            }
            out += "\\mathbb{E}_{" + label + "}";
        }
        first = false;
    }
    return out;
}

}  // namespace partdecomp
