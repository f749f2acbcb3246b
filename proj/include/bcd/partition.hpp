#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bcd/param_store.hpp"

namespace bcd {

enum class Ordering { ascending, descending, random_reshuffle };

std::string to_string(Ordering o);
Ordering ordering_from_string(const std::string& s);

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

// A block is usually one contiguous range; module-grouped partitions may pool
// several ranges. `id` is the block's original index, stable under reordering.
struct Block {
    int id = 0;
    std::vector<IndexRange> ranges;

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& r : ranges) n += r.size();
        return n;
    }
};

// Ordered disjoint blocks covering [0, d).
struct BlockPartition {
    std::vector<Block> blocks;
    Ordering ordering = Ordering::ascending;
    std::uint64_t epoch_seed = 0;

    std::size_t dim() const {
        std::size_t d = 0;
        for (const auto& b : blocks) d += b.size();
        return d;
    }
    int block_count() const { return static_cast<int>(blocks.size()); }
};

// D contiguous ranges; the first (d mod D) blocks get one extra element.
BlockPartition partition_uniform(std::size_t d, int D);

// One block per group of named layout entries. Every layout name must appear
// in exactly one group.
BlockPartition partition_by_modules(const std::vector<MatrixSpec>& layout,
                                    const std::vector<std::vector<std::string>>& groups);

// Visit order for block-epoch t: ascending keeps the stored order, descending
// reverses it, random_reshuffle draws a fresh Fisher-Yates permutation from
// (seed, t). Block contents are untouched.
BlockPartition order_blocks(const BlockPartition& p, Ordering scheme, std::uint64_t seed,
                            int t = 0);

// throws unless blocks are disjoint and tile [0, d) exactly
void validate_partition(const BlockPartition& p, std::size_t d);

}  // namespace bcd
