#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>

#include <evoscape/rng.hpp>
#include <evoscape/types.hpp>

namespace evoscape {

/// Bounded store of previously selected behavior vectors. New entries
/// are admitted at random (the novelty-search convention); once the
/// capacity is reached the oldest entry is evicted.
class Archive {
public:
    struct Entry {
        Vector behavior;
        std::int64_t insertion_step;
    };

    explicit Archive(Index capacity = 1200, Scalar admission_prob = 0.10)
        : capacity_(capacity), admission_prob_(admission_prob) {
        if (capacity_ < 1)
            throw std::invalid_argument("Archive: capacity must be >= 1");
        if (admission_prob_ < 0 || admission_prob_ > 1)
            throw std::invalid_argument("Archive: admission_prob must be in [0, 1]");
    }

    /// With probability admission_prob, appends (b, step) and evicts
    /// the oldest entry if over capacity. Returns true on admission.
    bool maybe_admit(const ConstVectorRef& b, std::int64_t step, Rng& rng) {
        std::uniform_real_distribution<Scalar> uniform(0.0, 1.0);
        if (uniform(rng) >= admission_prob_)
            return false;
        entries_.push_back(Entry{b, step});
        if (static_cast<Index>(entries_.size()) > capacity_)
            entries_.pop_front();
        return true;
    }

    Index size() const { return static_cast<Index>(entries_.size()); }
    Index capacity() const { return capacity_; }
    Scalar admission_prob() const { return admission_prob_; }
    const Entry& operator[](Index i) const { return entries_[static_cast<std::size_t>(i)]; }

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

private:
    std::deque<Entry> entries_;
    Index capacity_;
    Scalar admission_prob_;
};

} // namespace evoscape
