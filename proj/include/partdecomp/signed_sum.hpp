#pragma once

#include <map>
#include <utility>

#include "numeric.hpp"

namespace partdecomp {

/// Sparse integer combination of keys. Zero coefficients are never stored,
/// so two sums are equal iff their term maps are equal.
template <typename Key, typename Less>
class SignedSum {
public:
    using Terms = std::map<Key, Integer, Less>;

    SignedSum() = default;

    void add(const Key& key, const Integer& coef) {
        if (coef == 0) {
            return;
        }
        auto [it, inserted] = terms_.try_emplace(key, coef);
        if (!inserted) {
            it->second += coef;
            if (it->second == 0) {
                terms_.erase(it);
            }
        }
    }

    void add(const SignedSum& other, const Integer& scale = 1) {
        for (const auto& [k, c] : other.terms_) {
            add(k, c * scale);
        }
    }

    /// Coefficient of `key`, zero when absent.
    Integer coefficient(const Key& key) const {
        auto it = terms_.find(key);
        return it == terms_.end() ? Integer(0) : it->second;
    }

    const Terms& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    friend bool operator==(const SignedSum& a, const SignedSum& b) { return a.terms_ == b.terms_; }

private:
    Terms terms_;
};

}  // namespace partdecomp
