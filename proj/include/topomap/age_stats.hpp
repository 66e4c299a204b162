#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace topomap {

/// Multiset of current edge ages plus a record of deleted ages.
///
/// Current ages live in a per-age count array backed by a Fenwick tree, so
/// the k-th smallest age is found in O(log max_age). Deleted ages are kept as
/// an exact integer sum and count; their mean is derived on demand.
class AgeStats {
public:
    void insert(std::uint32_t age);
    void erase(std::uint32_t age);
    void move(std::uint32_t from, std::uint32_t to);

    void record_deletion(std::uint32_t age);
    void restore_deletions(std::uint64_t count, std::uint64_t age_sum);

    /// Number of current ages, |Gamma|.
    std::size_t size() const { return size_; }
    std::uint64_t deleted_count() const { return deleted_count_; }
    std::uint64_t deleted_sum() const { return deleted_sum_; }
    /// Arithmetic mean of all deleted ages; 0 when nothing was deleted.
    double deleted_mean() const;

    /// k-th smallest current age, 0-based. Requires k < size().
    std::uint32_t nth(std::size_t k) const;

    /// Linear-interpolation quantile of the current ages.
    double quantile(double q) const;

    /// counts[a] = number of current edges of age a.
    std::span<const std::uint64_t> histogram() const { return counts_; }

private:
    void grow_to(std::size_t min_capacity);
    void fenwick_add(std::size_t index, std::int64_t delta);

    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> tree_;  // 1-based Fenwick over counts_
    std::size_t size_ = 0;
    std::uint64_t deleted_count_ = 0;
    std::uint64_t deleted_sum_ = 0;
};

}  // namespace topomap
