#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace partdecomp {

/// Largest index an IndexSet can hold; indices are 1-based.
inline constexpr int kMaxIndex = 64;

/// Default bound on the ground-set size of anything that enumerates
/// partitions (Bell(10) = 115975).
inline constexpr std::size_t kDefaultGroundCap = 10;

struct Limits {
    std::size_t ground_cap = kDefaultGroundCap;
};

/// Sorted set of 1-based argument indices, stored as a bit mask.
class IndexSet {
public:
    constexpr IndexSet() = default;

    IndexSet(std::initializer_list<int> indices) {
        for (int i : indices) {
            insert(i);
        }
    }

    static constexpr IndexSet from_mask(std::uint64_t mask) {
        IndexSet s;
        s.mask_ = mask;
        return s;
    }

    /// {1, ..., n}
    static IndexSet range(int n) {
        if (n < 0 || n > kMaxIndex) {
            throw DomainError("ground size " + std::to_string(n) + " outside [0, 64]");
        }
        return from_mask(n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
    }

    void insert(int i) {
        check_index(i);
        mask_ |= bit(i);
    }

    void erase(int i) {
        check_index(i);
        mask_ &= ~bit(i);
    }

    bool contains(int i) const { return i >= 1 && i <= kMaxIndex && (mask_ & bit(i)) != 0; }

    constexpr std::uint64_t mask() const { return mask_; }
    std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
    bool empty() const { return mask_ == 0; }

    /// Smallest index; 0 for the empty set.
    int min() const { return empty() ? 0 : std::countr_zero(mask_) + 1; }
    /// Largest index; 0 for the empty set.
    int max() const { return empty() ? 0 : kMaxIndex - std::countl_zero(mask_); }

    std::vector<int> elements() const {
        std::vector<int> out;
        out.reserve(size());
        for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
            out.push_back(std::countr_zero(m) + 1);
        }
        return out;
    }

    bool is_subset_of(IndexSet other) const { return (mask_ & ~other.mask_) == 0; }
    bool intersects(IndexSet other) const { return (mask_ & other.mask_) != 0; }

    friend IndexSet operator|(IndexSet a, IndexSet b) { return from_mask(a.mask_ | b.mask_); }
    friend IndexSet operator&(IndexSet a, IndexSet b) { return from_mask(a.mask_ & b.mask_); }
    /// Set difference.
    friend IndexSet operator-(IndexSet a, IndexSet b) { return from_mask(a.mask_ & ~b.mask_); }
    friend bool operator==(IndexSet a, IndexSet b) = default;

    /// Lexicographic order on the ascending element sequences; a proper
    /// prefix sorts first.
    friend bool lex_less(IndexSet a, IndexSet b) {
        std::uint64_t x = a.mask_;
        std::uint64_t y = b.mask_;
        while (x != 0 && y != 0) {
            int ex = std::countr_zero(x);
            int ey = std::countr_zero(y);
            if (ex != ey) {
                return ex < ey;
            }
            x &= x - 1;
            y &= y - 1;
        }
        return x == 0 && y != 0;
    }

private:
    static void check_index(int i) {
        if (i < 1 || i > kMaxIndex) {
            throw DomainError("index " + std::to_string(i) + " outside [1, 64]");
        }
    }
    static constexpr std::uint64_t bit(int i) { return std::uint64_t{1} << (i - 1); }

    std::uint64_t mask_ = 0;
};

/// Order-preserving relabeling of `s` (a subset of `ground`) onto 1..|ground|.
inline IndexSet compress(IndexSet s, IndexSet ground) {
    if (!s.is_subset_of(ground)) {
        throw DomainError("cannot relabel indices outside the ground set");
    }
    IndexSet out;
    for (int e : s.elements()) {
        const std::uint64_t below = ground.mask() & ((std::uint64_t{1} << (e - 1)) - 1);
        out.insert(std::popcount(below) + 1);
    }
    return out;
}

/// Strict weak order for IndexSet keys (lexicographic on elements).
struct IndexSetLess {
    bool operator()(IndexSet a, IndexSet b) const { return lex_less(a, b); }
};

/// "1,2,3"
inline std::string format_index_set(IndexSet s) {
    std::string out;
    for (int i : s.elements()) {
        if (!out.empty()) {
            out += ',';
        }
        out += std::to_string(i);
    }
    return out;
}

/// Set partition of its ground set. Blocks are nonempty, pairwise disjoint
/// and kept ordered by their minimum element, so equal partitions compare
/// equal member-wise.
class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<IndexSet> blocks) : blocks_(std::move(blocks)) {
        IndexSet seen;
        for (IndexSet b : blocks_) {
            if (b.empty()) {
                throw DomainError("partition block is empty");
            }
            if (b.intersects(seen)) {
                throw DomainError("partition blocks overlap on {" + format_index_set(b & seen) + "}");
            }
            seen = seen | b;
        }
        ground_ = seen;
        std::sort(blocks_.begin(), blocks_.end(),
                  [](IndexSet a, IndexSet b) { return a.min() < b.min(); });
    }

    Partition(std::initializer_list<std::initializer_list<int>> blocks)
        : Partition(to_sets(blocks)) {}

    static Partition one_block(IndexSet ground) {
        if (ground.empty()) {
            return Partition();
        }
        return Partition(std::vector<IndexSet>{ground});
    }

    static Partition singletons(IndexSet ground) {
        std::vector<IndexSet> blocks;
        for (int i : ground.elements()) {
            blocks.push_back(IndexSet{i});
        }
        return Partition(std::move(blocks));
    }

    const std::vector<IndexSet>& blocks() const { return blocks_; }
    IndexSet ground() const { return ground_; }
    std::size_t size() const { return blocks_.size(); }
    bool empty() const { return blocks_.empty(); }

    /// Block containing index i; empty set if i is outside the ground set.
    IndexSet block_of(int i) const {
        for (IndexSet b : blocks_) {
            if (b.contains(i)) {
                return b;
            }
        }
        return {};
    }

    /// Union of two partitions over disjoint ground sets.
    friend Partition join_disjoint(const Partition& a, const Partition& b) {
        if (a.ground_.intersects(b.ground_)) {
            throw DomainError("cannot combine partitions over overlapping ground sets");
        }
        std::vector<IndexSet> blocks = a.blocks_;
        blocks.insert(blocks.end(), b.blocks_.begin(), b.blocks_.end());
        return Partition(std::move(blocks));
    }

    /// The partition with block `b` removed.
    Partition without_block(IndexSet b) const {
        std::vector<IndexSet> rest;
        for (IndexSet x : blocks_) {
            if (x != b) {
                rest.push_back(x);
            }
        }
        return Partition(std::move(rest));
    }

    friend bool operator==(const Partition& a, const Partition& b) { return a.blocks_ == b.blocks_; }

private:
    static std::vector<IndexSet> to_sets(std::initializer_list<std::initializer_list<int>> blocks) {
        std::vector<IndexSet> out;
        for (auto b : blocks) {
            out.emplace_back(b);
        }
        return out;
    }

    std::vector<IndexSet> blocks_;
    IndexSet ground_;
};

/// Canonical total order: more blocks first (finest first), ties broken
/// lexicographically on the block sequence.
struct CanonicalLess {
    bool operator()(const Partition& a, const Partition& b) const {
        if (a.size() != b.size()) {
            return a.size() > b.size();
        }
        return std::lexicographical_compare(a.blocks().begin(), a.blocks().end(),
                                            b.blocks().begin(), b.blocks().end(),
                                            [](IndexSet x, IndexSet y) { return lex_less(x, y); });
    }
};

struct PartitionHash {
    std::size_t operator()(const Partition& p) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (IndexSet b : p.blocks()) {
            h ^= std::hash<std::uint64_t>{}(b.mask()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

/// Bell numbers via the Bell triangle; exact for any n.
inline Integer bell_number(std::size_t n) {
    std::vector<Integer> row{1};
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<Integer> next{row.back()};
        next.reserve(row.size() + 1);
        for (const Integer& v : row) {
            next.push_back(next.back() + v);
        }
        row = std::move(next);
    }
    return row.front();
}

inline void check_ground_cap(IndexSet ground, const Limits& limits) {
    if (ground.size() > limits.ground_cap) {
        throw SizeLimitError("ground set of size " + std::to_string(ground.size()) + " exceeds cap " +
                             std::to_string(limits.ground_cap) + " (Bell(" +
                             std::to_string(ground.size()) + ") = " + bell_number(ground.size()).str() +
                             " partitions)");
    }
}

/// All partitions of `ground` in canonical order. The empty ground set has
/// exactly one (empty) partition.
inline std::vector<Partition> enumerate_partitions(IndexSet ground, const Limits& limits = {}) {
    check_ground_cap(ground, limits);
    const std::vector<int> elems = ground.elements();
    const std::size_t n = elems.size();
    std::vector<Partition> out;
    if (n == 0) {
        out.emplace_back();
        return out;
    }
    // Restricted growth strings: label[k] <= 1 + max(label[0..k-1]).
    std::vector<std::size_t> label(n, 0);
    std::vector<std::size_t> prefix_max(n, 0);
    while (true) {
        std::vector<IndexSet> blocks(prefix_max[n - 1] + 1);
        for (std::size_t k = 0; k < n; ++k) {
            blocks[label[k]].insert(elems[k]);
        }
        out.emplace_back(std::move(blocks));

        std::size_t k = n - 1;
        while (k > 0 && label[k] > prefix_max[k - 1]) {
            --k;
        }
        if (k == 0) {
            break;
        }
        ++label[k];
        prefix_max[k] = std::max(prefix_max[k - 1], label[k]);
        for (std::size_t j = k + 1; j < n; ++j) {
            label[j] = 0;
            prefix_max[j] = prefix_max[k];
        }
    }
    std::sort(out.begin(), out.end(), CanonicalLess{});
    return out;
}

inline std::vector<Partition> enumerate_partitions(int n, const Limits& limits = {}) {
    return enumerate_partitions(IndexSet::range(n), limits);
}

/// True iff every block of `alpha` lies inside some block of `pi`.
inline bool is_refinement(const Partition& alpha, const Partition& pi) {
    if (alpha.ground() != pi.ground()) {
        throw DomainError("refinement needs a common ground set");
    }
    return std::all_of(alpha.blocks().begin(), alpha.blocks().end(), [&](IndexSet b) {
        return b.is_subset_of(pi.block_of(b.min()));
    });
}

/// Every partition finer than or equal to `pi`, in canonical order; built as
/// the product of per-block partition sets.
inline std::vector<Partition> refinements(const Partition& pi, const Limits& limits = {}) {
    check_ground_cap(pi.ground(), limits);
    std::vector<Partition> acc{Partition()};
    for (IndexSet b : pi.blocks()) {
        std::vector<Partition> next;
        const auto parts = enumerate_partitions(b, limits);
        next.reserve(acc.size() * parts.size());
        for (const Partition& head : acc) {
            for (const Partition& p : parts) {
                next.push_back(join_disjoint(head, p));
            }
        }
        acc = std::move(next);
    }
    std::sort(acc.begin(), acc.end(), CanonicalLess{});
    return acc;
}

/// Möbius function of the partition lattice,
/// prod over blocks B of pi of (-1)^(k_B - 1) (k_B - 1)!, with k_B the number
/// of blocks of alpha inside B.
inline Integer mobius(const Partition& alpha, const Partition& pi) {
    if (!is_refinement(alpha, pi)) {
        throw DomainError("mobius needs alpha to refine pi");
    }
    Integer out = 1;
    for (IndexSet big : pi.blocks()) {
        long k = std::count_if(alpha.blocks().begin(), alpha.blocks().end(),
                               [&](IndexSet b) { return b.is_subset_of(big); });
        for (long j = 2; j < k; ++j) {
            out *= j;
        }
        if ((k - 1) % 2 != 0) {
            out = -out;
        }
    }
    return out;
}

/// Blocks separated by '|', indices within a block by ','; blocks ordered by
/// minimum element, e.g. "1|2,3".
inline std::string format_partition(const Partition& pi) {
    std::string out;
    for (std::size_t k = 0; k < pi.blocks().size(); ++k) {
        if (k > 0) {
            out += '|';
        }
        out += format_index_set(pi.blocks()[k]);
    }
    return out;
}

/// Inverse of format_partition. Whitespace around tokens is ignored; blocks
/// may be listed in any order. The empty string is the empty partition.
inline Partition parse_partition(std::string_view text) {
    std::vector<IndexSet> blocks;
    IndexSet current;
    IndexSet seen;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) {
            ++pos;
        }
    };
    skip_ws();
    if (pos == text.size()) {
        return Partition();
    }
    while (true) {
        skip_ws();
        std::size_t start = pos;
        int value = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            value = value * 10 + (text[pos] - '0');
            if (value > kMaxIndex) {
                throw ParseError("index exceeds 64", start);
            }
            ++pos;
        }
        if (pos == start) {
            if (pos < text.size() && (text[pos] == '|' || text[pos] == ',')) {
                throw ParseError("empty block or missing index", pos);
            }
            throw ParseError(pos == text.size() ? "unexpected end of partition" : "expected an index", pos);
        }
        if (value == 0) {
            throw ParseError("indices are 1-based", start);
        }
        if (seen.contains(value)) {
            throw ParseError("duplicate index " + std::to_string(value), start);
        }
        seen.insert(value);
        current.insert(value);
        skip_ws();
        if (pos == text.size()) {
            blocks.push_back(current);
            break;
        }
        if (text[pos] == '|') {
            blocks.push_back(current);
            current = IndexSet();
        } else if (text[pos] != ',') {
            throw ParseError(std::string("unexpected character '") + text[pos] + "'", pos);
        }
        ++pos;
    }
    return Partition(std::move(blocks));
}

/// Comma-separated index list, e.g. "1,3". Empty text is the empty set.
inline IndexSet parse_index_set(std::string_view text) {
    Partition p = parse_partition(text);
    if (p.size() > 1) {
        throw ParseError("expected a single comma-separated index list", text.find('|'));
    }
    return p.ground();
}

}  // namespace partdecomp
