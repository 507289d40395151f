#pragma once

#include <cstdint>
#include <vector>

namespace episim::detail {

/// Fenwick tree over nonnegative integer weights, 0-based positions.
class FenwickTree {
public:
    explicit FenwickTree(std::size_t n = 0) : tree_(n + 1, 0), top_(1)
    {
        while (top_ * 2 <= n)
            top_ *= 2;
    }

    void add(std::size_t i, std::int64_t delta)
    {
        total_ += delta;
        for (++i; i < tree_.size(); i += i & (~i + 1))
            tree_[i] += delta;
    }

    std::int64_t total() const { return total_; }

    /// Smallest position whose inclusive prefix sum exceeds `target`
    /// (0 <= target < total()).
    std::size_t find(std::int64_t target) const
    {
        std::size_t pos = 0;
        for (std::size_t step = top_; step > 0; step >>= 1) {
            const std::size_t next = pos + step;
            if (next < tree_.size() && tree_[next] <= target) {
                pos = next;
                target -= tree_[next];
            }
        }
        return pos;
    }

private:
    std::vector<std::int64_t> tree_;
    std::size_t top_;
    std::int64_t total_ = 0;
};

} // namespace episim::detail
