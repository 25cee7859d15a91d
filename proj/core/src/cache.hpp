#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>

namespace longmem::detail {

// Small keyed cache with least-recently-used eviction.  Lookups of resident
// entries share a read lock; factories run under the write lock so a value is
// computed once even when several threads miss at the same time.
template <class Key, class Value>
class LruCache {
public:
    explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

    std::shared_ptr<const Value> get(const Key& key,
                                     const std::function<std::shared_ptr<const Value>()>& make) {
        {
            std::shared_lock lock(mutex_);
            auto it = entries_.find(key);
            if (it != entries_.end()) {
                it->second.last_used.store(++clock_, std::memory_order_relaxed);
                return it->second.value;
            }
        }
        std::unique_lock lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            it->second.last_used.store(++clock_, std::memory_order_relaxed);
            return it->second.value;
        }
        std::shared_ptr<const Value> value = make();  // may throw; nothing inserted then
        auto& entry = entries_[key];
        entry.value = value;
        entry.last_used.store(++clock_, std::memory_order_relaxed);
        while (entries_.size() > capacity_) {
            auto victim = entries_.begin();
            for (auto jt = entries_.begin(); jt != entries_.end(); ++jt) {
                if (jt->second.last_used.load(std::memory_order_relaxed) <
                    victim->second.last_used.load(std::memory_order_relaxed)) {
                    victim = jt;
                }
            }
            entries_.erase(victim);
        }
        return value;
    }

    void clear() {
        std::unique_lock lock(mutex_);
        entries_.clear();
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

private:
    struct Entry {
        std::shared_ptr<const Value> value;
        std::atomic<std::uint64_t> last_used{0};
    };

    mutable std::shared_mutex mutex_;
    std::map<Key, Entry> entries_;
    std::atomic<std::uint64_t> clock_{0};
    std::size_t capacity_;
};

}
