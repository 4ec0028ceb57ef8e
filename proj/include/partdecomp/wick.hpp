#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "memo.hpp"
#include "numeric.hpp"
#include "partitions.hpp"
#include "signed_sum.hpp"

namespace partdecomp {

/// E[prod_{i in indices} X_i]; always nonempty inside a monomial.
using MomentFactor = IndexSet;

/// Literal product of the free x-variables times a product of joint-moment
/// factors. Factors are kept lexicographically sorted and must be pairwise
/// disjoint and disjoint from `free`.
struct WickMonomial {
    IndexSet free;
    std::vector<MomentFactor> factors;

    WickMonomial() = default;
    WickMonomial(IndexSet free_vars, std::vector<MomentFactor> moment_factors)
        : free(free_vars), factors(std::move(moment_factors)) {
        std::sort(factors.begin(), factors.end(), IndexSetLess{});
        IndexSet seen = free;
        for (MomentFactor f : factors) {
            if (f.empty()) {
                throw DomainError("moment factor must be nonempty");
            }
            if (f.intersects(seen)) {
                throw DomainError("wick monomial factors must be pairwise disjoint");
            }
            seen = seen | f;
        }
    }

    /// Every index the monomial mentions.
    IndexSet support() const {
        IndexSet s = free;
        for (MomentFactor f : factors) {
            s = s | f;
        }
        return s;
    }

    WickMonomial times_moment(MomentFactor f) const {
        std::vector<MomentFactor> next = factors;
        next.push_back(f);
        return WickMonomial(free, std::move(next));
    }

    friend bool operator==(const WickMonomial&, const WickMonomial&) = default;
};

/// (|free| descending, free lexicographic, factors lexicographic).
struct WickMonomialLess {
    bool operator()(const WickMonomial& a, const WickMonomial& b) const {
        if (a.free.size() != b.free.size()) {
            return a.free.size() > b.free.size();
        }
        if (a.free != b.free) {
            return lex_less(a.free, b.free);
        }
        return std::lexicographical_compare(a.factors.begin(), a.factors.end(), b.factors.begin(),
                                            b.factors.end(), IndexSetLess{});
    }
};

/// Integer combination of Wick monomials in the variables of `ground`.
class WickPolynomial {
public:
    using Terms = SignedSum<WickMonomial, WickMonomialLess>;

    WickPolynomial() = default;
    explicit WickPolynomial(IndexSet ground) : ground_(ground) {}

    void add(const WickMonomial& m, const Integer& coef) {
        if (!m.support().is_subset_of(ground_)) {
            throw DomainError("monomial mentions indices outside the polynomial's ground set");
        }
        terms_.add(m, coef);
    }

    void add(const WickPolynomial& other, const Integer& scale = 1) {
        for (const auto& [m, c] : other.terms_) {
            add(m, c * scale);
        }
    }

    IndexSet ground() const { return ground_; }
    const Terms& terms() const { return terms_; }
    Integer coefficient(const WickMonomial& m) const { return terms_.coefficient(m); }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    /// Each monomial multiplied by the moment factor E[X_f]; the ground set
    /// grows to include f.
    WickPolynomial times_moment(MomentFactor f) const {
        WickPolynomial out(ground_ | f);
        for (const auto& [m, c] : terms_) {
            out.add(m.times_moment(f), c);
        }
        return out;
    }

    friend bool operator==(const WickPolynomial& a, const WickPolynomial& b) {
        return a.ground_ == b.ground_ && a.terms_ == b.terms_;
    }

private:
    IndexSet ground_;
    Terms terms_;
};

/// Wick product epsilon over an arbitrary index set: the literal product
/// minus every lower Wick term. Memoized on the index set.
inline WickPolynomial wick_product(IndexSet ground, const Limits& limits = {}) {
    check_ground_cap(ground, limits);
    static detail::MemoTable<std::uint64_t, WickPolynomial> memo;
    if (auto hit = memo.find(ground.mask())) {
        return *hit;
    }
    WickPolynomial out(ground);
    out.add(WickMonomial(ground, {}), 1);
    if (ground.empty()) {
        return memo.insert(ground.mask(), std::move(out));
    }
    // Proper subsets U of ground, via the standard submask walk.
    const std::uint64_t full = ground.mask();
    for (std::uint64_t sub = (full - 1) & full;; sub = (sub - 1) & full) {
        const IndexSet u = IndexSet::from_mask(sub);
        out.add(wick_product(u, limits).times_moment(ground - u), -1);
        if (sub == 0) {
            break;
        }
    }
    return memo.insert(ground.mask(), std::move(out));
}

inline WickPolynomial wick_product(int n, const Limits& limits = {}) {
    return wick_product(IndexSet::range(n), limits);
}

/// One summand E[X_{[n] \ S}] * epsilon_S of the Wick decomposition. An
/// empty `moment` stands for the constant 1.
struct WickTerm {
    IndexSet subset;
    MomentFactor moment;
    WickPolynomial epsilon;

    WickPolynomial expanded() const { return moment.empty() ? epsilon : epsilon.times_moment(moment); }
};

/// All 2^n Wick terms of x_1 ... x_n, ordered by subset size then
/// lexicographically.
inline std::vector<WickTerm> wick_terms(int n, const Limits& limits = {}) {
    const IndexSet ground = IndexSet::range(n);
    check_ground_cap(ground, limits);
    std::vector<WickTerm> out;
    const std::uint64_t full = ground.mask();
    for (std::uint64_t sub = full;; sub = (sub - 1) & full) {
        const IndexSet s = IndexSet::from_mask(sub);
        out.push_back(WickTerm{s, ground - s, wick_product(s, limits)});
        if (sub == 0) {
            break;
        }
    }
    std::sort(out.begin(), out.end(), [](const WickTerm& a, const WickTerm& b) {
        if (a.subset.size() != b.subset.size()) {
            return a.subset.size() < b.subset.size();
        }
        return lex_less(a.subset, b.subset);
    });
    return out;
}

/// Joint moments keyed by index set.
template <Scalar T>
using MomentTable = std::map<MomentFactor, T, IndexSetLess>;

inline std::string format_moment(MomentFactor f) {
    std::string out = "E[";
    for (int i : f.elements()) {
        out += "X" + std::to_string(i);
    }
    return out + "]";
}

/// Value of the polynomial at x (x[i - 1] holds x_i) with moment factors
/// looked up in `moments`.
template <Scalar T>
T evaluate_wick(const WickPolynomial& poly, std::span<const T> x, const MomentTable<T>& moments) {
    if (static_cast<std::size_t>(poly.ground().max()) > x.size()) {
        throw ArityError("evaluation point has " + std::to_string(x.size()) + " values, polynomial needs " +
                         std::to_string(poly.ground().max()));
    }
    T total = 0;
    for (const auto& [m, c] : poly) {
        T term = from_integer<T>(c);
        for (int i : m.free.elements()) {
            term *= x[i - 1];
        }
        for (MomentFactor f : m.factors) {
            auto it = moments.find(f);
            if (it == moments.end()) {
                throw LookupError("missing moment " + format_moment(f));
            }
            term *= it->second;
        }
        total += term;
    }
    return total;
}

/// Formal partial derivative in x_i.
inline WickPolynomial wick_derivative(const WickPolynomial& poly, int i) {
    if (!poly.ground().contains(i)) {
        throw DomainError("derivative index " + std::to_string(i) + " is not a variable of the polynomial");
    }
    IndexSet rest = poly.ground();
    rest.erase(i);
    WickPolynomial out(rest);
    for (const auto& [m, c] : poly) {
        if (!m.free.contains(i)) {
            continue;
        }
        IndexSet free = m.free;
        free.erase(i);
        out.add(WickMonomial(free, m.factors), c);
    }
    return out;
}

/// Order-preserving relabeling of the ground set onto 1..|ground|.
inline WickPolynomial compress_indices(const WickPolynomial& poly) {
    const IndexSet g = poly.ground();
    WickPolynomial out(IndexSet::range(static_cast<int>(g.size())));
    for (const auto& [m, c] : poly) {
        std::vector<MomentFactor> factors;
        for (MomentFactor f : m.factors) {
            factors.push_back(compress(f, g));
        }
        out.add(WickMonomial(compress(m.free, g), std::move(factors)), c);
    }
    return out;
}

/// e.g. "x1*x2 - E[X2]*x1 - E[X1]*x2 + 2*E[X1]*E[X2] - E[X1X2]"
inline std::string format_wick(const WickPolynomial& poly) {
    if (poly.empty()) {
        return "0";
    }
    std::string out;
    bool first = true;
    for (const auto& [m, c] : poly) {
        Integer mag = abs(c);
        if (first) {
            out += c < 0 ? "-" : "";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        std::vector<std::string> parts;
        if (mag != 1) {
            parts.push_back(mag.str());
        }
        for (MomentFactor f : m.factors) {
            parts.push_back(format_moment(f));
        }
        for (int i : m.free.elements()) {
            parts.push_back("x" + std::to_string(i));
        }
        if (parts.empty()) {
            parts.push_back("1");
        }
        for (std::size_t k = 0; k < parts.size(); ++k) {
            out += (k ? "*" : "") + parts[k];
        }
        first = false;
    }
    return out;
}

inline std::string format_wick_latex(const WickPolynomial& poly) {
    if (poly.empty()) {
        return "0";
    }
    std::string out;
    bool first = true;
    for (const auto& [m, c] : poly) {
        Integer mag = abs(c);
        if (first) {
            out += c < 0 ? "-" : "";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        std::string body;
        if (mag != 1) {
            body += mag.str();
        }
        for (MomentFactor f : m.factors) {
            body += "\\mathbb{E}[";
            for (int i : f.elements()) {
                body += "X_{" + std::to_string(i) + "}";
            }
            body += "]";
        }
        for (int i : m.free.elements()) {
            body += "x_{" + std::to_string(i) + "}";
        }
        out += body.empty() ? "1" : body;
        first = false;
    }
    return out;
}

}  // namespace partdecomp
