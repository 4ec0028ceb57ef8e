#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>

namespace partdecomp::detail {

/// Process-wide memo table safe under concurrent lookup and insert. Values
/// are computed outside the lock; a racing duplicate insert keeps the first
/// value, and all values for a key are identical anyway.
template <typename Key, typename Value, typename Less = std::less<Key>>
class MemoTable {
public:
    std::optional<Value> find(const Key& key) const {
        std::shared_lock lock(mutex_);
        auto it = table_.find(key);
        if (it == table_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    const Value& insert(const Key& key, Value value) {
        std::unique_lock lock(mutex_);
        return table_.try_emplace(key, std::move(value)).first->second;
    }

private:
    mutable std::shared_mutex mutex_;
    std::map<Key, Value, Less> table_;
};

}  // namespace partdecomp::detail
