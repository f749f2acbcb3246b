#include "bcd/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "bcd/rng.hpp"

namespace bcd {

std::string to_string(Ordering o) {
    switch (o) {
        case Ordering::ascending: return "ascending";
        case Ordering::descending: return "descending";
        case Ordering::random_reshuffle: return "random_reshuffle";
    }
    return "ascending";
}

Ordering ordering_from_string(const std::string& s) {
    if (s == "ascending") return Ordering::ascending;
    if (s == "descending") return Ordering::descending;
    if (s == "random_reshuffle" || s == "reshuffle") return Ordering::random_reshuffle;
    throw std::invalid_argument("unknown ordering '" + s + "'");
}

BlockPartition partition_uniform(std::size_t d, int D) {
    if (D < 1) throw std::invalid_argument("block count must be at least 1");
    if (static_cast<std::size_t>(D) > d)
        throw std::invalid_argument("block count exceeds parameter dimension");
    BlockPartition p;
    const std::size_t base = d / static_cast<std::size_t>(D);
    const std::size_t extra = d % static_cast<std::size_t>(D);
    std::size_t begin = 0;
    for (int i = 0; i < D; ++i) {
        const std::size_t len = base + (static_cast<std::size_t>(i) < extra ? 1 : 0);
        p.blocks.push_back(Block{i, {IndexRange{begin, begin + len}}});
        begin += len;
    }
    return p;
}

BlockPartition partition_by_modules(const std::vector<MatrixSpec>& layout,
                                    const std::vector<std::vector<std::string>>& groups) {
    std::vector<bool> assigned(layout.size(), false);
    BlockPartition p;
    int id = 0;
    for (const auto& group : groups) {
        Block block;
        block.id = id++;
        for (const auto& name : group) {
            std::size_t idx = layout.size();
            for (std::size_t j = 0; j < layout.size(); ++j)
                if (layout[j].name == name) { idx = j; break; }
            if (idx == layout.size())
                throw std::invalid_argument("unknown parameter name '" + name + "'");
            if (assigned[idx])
                throw std::invalid_argument("parameter '" + name + "' assigned to more than one group");
            assigned[idx] = true;
            block.ranges.push_back(IndexRange{layout[idx].offset, layout[idx].offset + layout[idx].size()});
        }
        if (block.ranges.empty()) throw std::invalid_argument("empty group");
        // merge adjacent extents so contiguous groups stay a single range
        std::sort(block.ranges.begin(), block.ranges.end(),
                  [](const IndexRange& a, const IndexRange& b) { return a.begin < b.begin; });
        std::vector<IndexRange> merged;
        for (const auto& r : block.ranges) {
            if (!merged.empty() && merged.back().end == r.begin)
                merged.back().end = r.end;
            else
                merged.push_back(r);
        }
        block.ranges = std::move(merged);
        p.blocks.push_back(std::move(block));
    }
    for (std::size_t j = 0; j < layout.size(); ++j)
        if (!assigned[j])
            throw std::invalid_argument("unassigned parameter '" + layout[j].name + "'");
    return p;
}

BlockPartition order_blocks(const BlockPartition& p, Ordering scheme, std::uint64_t seed, int t) {
    BlockPartition out = p;
    out.ordering = scheme;
    out.epoch_seed = seed;
    const std::size_t D = p.blocks.size();
    std::vector<std::size_t> order(D);
    std::iota(order.begin(), order.end(), std::size_t{0});
    switch (scheme) {
        case Ordering::ascending:
            break;
        case Ordering::descending:
            std::reverse(order.begin(), order.end());
            break;
        case Ordering::random_reshuffle: {
            CounterRng rng(seed, rng_stream::order);
            rng.set_counter(static_cast<std::uint64_t>(t) << 32);
            for (std::size_t i = D; i > 1; --i)
                std::swap(order[i - 1], order[rng.next_below(i)]);
            break;
        }
    }
    out.blocks.clear();
    out.blocks.reserve(D);
    for (std::size_t pos : order) out.blocks.push_back(p.blocks[pos]);
    return out;
}

void validate_partition(const BlockPartition& p, std::size_t d) {
    if (p.blocks.empty()) throw std::invalid_argument("partition has no blocks");
    std::vector<IndexRange> all;
    for (const auto& b : p.blocks) {
        if (b.ranges.empty()) throw std::invalid_argument("partition has an empty block");
        for (const auto& r : b.ranges) {
            if (r.begin >= r.end || r.end > d)
                throw std::invalid_argument("block range out of bounds");
            all.push_back(r);
        }
    }
    std::sort(all.begin(), all.end(),
              [](const IndexRange& a, const IndexRange& b) { return a.begin < b.begin; });
    std::size_t expected = 0;
    for (const auto& r : all) {
        if (r.begin != expected)
            throw std::invalid_argument("partition ranges overlap or leave a gap");
        expected = r.end;
    }
    if (expected != d) throw std::invalid_argument("partition does not cover the parameter vector");
}

}  // namespace bcd
