// MSD radix top-k engine for a single task.
//
// Phase 1 iterates count/select passes over digit windows until the pivot
// (the k-th key) is isolated; phase 2 rescans the input and keeps everything
// on the selected side of the pivot. Work is split into block_size-element
// partitions over grid_size workers, with worker-private histograms merged
// once per worker and buffered burst writes claiming ranges from a single
// shared cursor.

#ifndef RTK_ENGINE_HPP
#define RTK_ENGINE_HPP

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rtk/keycodec.hpp"

namespace rtk {

struct rank_out_of_range : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct invariant_violation : std::logic_error {
    using std::logic_error::logic_error;
};

struct empty_input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class BufferPolicy {
    Naive,           // capacity block_size, flush whenever non-empty at partition end
    FlushEfficient,  // capacity 2*block_size, flush only when occupancy > block_size
};

struct EngineConfig {
    unsigned d = 12;
    std::size_t block_size = 1024;
    unsigned grid_size = 4;
    BufferPolicy buffer_policy = BufferPolicy::FlushEfficient;
    std::size_t pack_size = 16;
    bool hierarchical_atomics = true;
    // largest specialized fixed-capacity filter buffer; larger k falls back
    // to the reusable FlushEfficient path
    std::size_t filter_fixed_ceiling = 4096;

    std::size_t radix() const { return std::size_t{1} << d; }

    void validate() const {
        if (d < 1 || d > 16) throw std::invalid_argument("digit width must be in [1, 16]");
        if (block_size < 1) throw std::invalid_argument("block_size must be >= 1");
        if (grid_size < 1) throw std::invalid_argument("grid_size must be >= 1");
        if (pack_size < 4 || (pack_size & (pack_size - 1)) != 0)
            throw std::invalid_argument("pack_size must be a power of two >= element width");
    }
};

using Histogram = std::vector<std::uint64_t>;

// Work counters. Per-worker vectors are touched only by their owning worker;
// scalar fields are updated by the coordinating thread or under the merge lock.
struct Instrumentation {
    std::vector<std::uint64_t> flushes_per_worker;
    std::vector<std::uint64_t> partitions_per_worker;
    std::vector<std::uint64_t> matched_per_worker;
    std::uint64_t global_merges = 0;
    std::uint64_t elements_scanned = 0;
    std::uint64_t modeled_transactions = 0;
    std::uint64_t passes = 0;

    void reset(unsigned grid_size) {
        flushes_per_worker.assign(grid_size, 0);
        partitions_per_worker.assign(grid_size, 0);
        matched_per_worker.assign(grid_size, 0);
        global_merges = 0;
        elements_scanned = 0;
        modeled_transactions = 0;
        passes = 0;
    }

    std::uint64_t total_flushes() const {
        return std::accumulate(flushes_per_worker.begin(), flushes_per_worker.end(),
                               std::uint64_t{0});
    }
    std::uint64_t total_partitions() const {
        return std::accumulate(partitions_per_worker.begin(), partitions_per_worker.end(),
                               std::uint64_t{0});
    }
};

template <typename T>
struct TopKResult {
    std::vector<T> values;
    std::vector<std::uint64_t> indices;
    T pivot{};
};

namespace detail {

template <typename Fn>
void run_workers(unsigned grid_size, Fn&& body) {
    if (grid_size == 1) {
        body(0u);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(grid_size);
    for (unsigned w = 0; w < grid_size; ++w) workers.emplace_back(body, w);
    for (auto& t : workers) t.join();
}

inline void ensure_worker_slots(Instrumentation& instr, unsigned grid_size) {
    if (instr.flushes_per_worker.size() != grid_size) {
        instr.flushes_per_worker.assign(grid_size, 0);
        instr.partitions_per_worker.assign(grid_size, 0);
        instr.matched_per_worker.assign(grid_size, 0);
    }
}

inline std::size_t partition_count(std::size_t n, std::size_t block_size) {
    return (n + block_size - 1) / block_size;
}

// Staging buffer shared by selectCandidate- and filter-style scans. A flush
// claims a contiguous range from the shared cursor and copies the run out.
template <typename Item, typename Sink>
class WriteBuffer {
public:
    WriteBuffer(std::size_t capacity, std::atomic<std::uint64_t>& cursor, Sink sink,
                std::uint64_t& flush_counter)
        : capacity_(capacity), cursor_(cursor), sink_(sink), flushes_(flush_counter) {
        staged_.reserve(capacity);
    }

    bool push(Item item) {
        if (staged_.size() == capacity_) return false;
        staged_.push_back(item);
        return true;
    }

    std::size_t occupancy() const { return staged_.size(); }

    void flush() {
        if (staged_.empty()) return;
        std::uint64_t base = cursor_.fetch_add(staged_.size(), std::memory_order_relaxed);
        sink_(base, staged_);
        staged_.clear();
        ++flushes_;
    }

private:
    std::size_t capacity_;
    std::atomic<std::uint64_t>& cursor_;
    Sink sink_;
    std::uint64_t& flushes_;
    std::vector<Item> staged_;
};

}  // namespace detail

// Histogram of digit values over the current window. Workers accumulate
// private shards and merge each shard into the shared histogram exactly once;
// with hierarchical_atomics off every element updates the shared histogram
// directly (ablation baseline).
inline Histogram count_bins(std::span<const RadixKey> candidates, DigitWindow window,
                            const EngineConfig& cfg, Instrumentation& instr) {
    detail::ensure_worker_slots(instr, cfg.grid_size);
    const std::size_t radix = cfg.radix();
    const std::size_t partitions = detail::partition_count(candidates.size(), cfg.block_size);

    Histogram histogram(radix, 0);
    std::mutex merge_mutex;

    if (cfg.hierarchical_atomics) {
        detail::run_workers(cfg.grid_size, [&](unsigned w) {
            Histogram shard(radix, 0);
            for (std::size_t p = w; p < partitions; p += cfg.grid_size) {
                std::size_t begin = p * cfg.block_size;
                std::size_t end = std::min(begin + cfg.block_size, candidates.size());
                for (std::size_t i = begin; i < end; ++i)
                    ++shard[extract_digit(candidates[i], window)];
            }
            std::lock_guard lock(merge_mutex);
            for (std::size_t b = 0; b < radix; ++b) histogram[b] += shard[b];
            ++instr.global_merges;
        });
    } else {
        auto shared = std::make_unique<std::atomic<std::uint64_t>[]>(radix);
        for (std::size_t b = 0; b < radix; ++b) shared[b].store(0, std::memory_order_relaxed);
        detail::run_workers(cfg.grid_size, [&](unsigned w) {
            std::uint64_t updates = 0;
            for (std::size_t p = w; p < partitions; p += cfg.grid_size) {
                std::size_t begin = p * cfg.block_size;
                std::size_t end = std::min(begin + cfg.block_size, candidates.size());
                for (std::size_t i = begin; i < end; ++i) {
                    shared[extract_digit(candidates[i], window)].fetch_add(
                        1, std::memory_order_relaxed);
                    ++updates;
                }
            }
            std::lock_guard lock(merge_mutex);
            instr.global_merges += updates;
        });
        for (std::size_t b = 0; b < radix; ++b)
            histogram[b] = shared[b].load(std::memory_order_relaxed);
    }

    instr.elements_scanned += candidates.size();
    return histogram;
}

struct BinSelection {
    std::uint32_t bin = 0;
    std::uint64_t k_new = 0;
};

// Scans bins from the highest digit downward and stops at the bin whose
// cumulative count first reaches k. k_new is the residual rank inside it.
inline BinSelection select_bin(const Histogram& histogram, std::uint64_t k) {
    std::uint64_t total = std::accumulate(histogram.begin(), histogram.end(), std::uint64_t{0});
    if (k == 0 || k > total) throw rank_out_of_range("select_bin: rank outside histogram total");
    std::uint64_t cumulative = 0;
    for (std::size_t b = histogram.size(); b-- > 0;) {
        cumulative += histogram[b];
        if (cumulative >= k)
            return {static_cast<std::uint32_t>(b), k - (cumulative - histogram[b])};
    }
    throw rank_out_of_range("select_bin: unreachable");
}

// Keeps the candidates whose digit equals bin, in unspecified order. Matches
// are staged per worker and burst-written per cfg.buffer_policy.
inline std::vector<RadixKey> select_candidates(std::span<const RadixKey> candidates,
                                               std::uint32_t bin, DigitWindow window,
                                               const EngineConfig& cfg, Instrumentation& instr) {
    detail::ensure_worker_slots(instr, cfg.grid_size);
    const std::size_t partitions = detail::partition_count(candidates.size(), cfg.block_size);

    std::vector<RadixKey> out(candidates.size());
    std::atomic<std::uint64_t> cursor{0};

    detail::run_workers(cfg.grid_size, [&](unsigned w) {
        auto sink = [&](std::uint64_t base, const std::vector<RadixKey>& run) {
            std::copy(run.begin(), run.end(), out.begin() + base);
        };
        const std::size_t capacity =
            cfg.buffer_policy == BufferPolicy::Naive ? cfg.block_size : 2 * cfg.block_size;
        detail::WriteBuffer<RadixKey, decltype(sink)> buffer(capacity, cursor, sink,
                                                             instr.flushes_per_worker[w]);
        for (std::size_t p = w; p < partitions; p += cfg.grid_size) {
            std::size_t begin = p * cfg.block_size;
            std::size_t end = std::min(begin + cfg.block_size, candidates.size());
            for (std::size_t i = begin; i < end; ++i) {
                if (extract_digit(candidates[i], window) == bin) {
                    if (!buffer.push(candidates[i]))
                        throw invariant_violation("select_candidates: buffer overflow");
                    ++instr.matched_per_worker[w];
                }
            }
            ++instr.partitions_per_worker[w];
            if (cfg.buffer_policy == BufferPolicy::Naive) {
                buffer.flush();
            } else if (buffer.occupancy() > cfg.block_size) {
                buffer.flush();
            }
        }
        buffer.flush();  // final drain
    });

    out.resize(cursor.load());
    return out;
}

struct PivotSelection {
    RadixKey pivot_key;
    std::uint64_t k_at_pivot = 0;
};

// Phase 1: iterate count/select passes until a single candidate survives or
// the digit window is exhausted (all survivors are then bit-identical).
inline PivotSelection radix_select(std::span<const RadixKey> input_keys, std::uint64_t k,
                                   const EngineConfig& cfg, Instrumentation& instr) {
    cfg.validate();
    if (k == 0 || k > input_keys.size())
        throw rank_out_of_range("radix_select: k outside [1, n]");

    std::vector<RadixKey> candidates(input_keys.begin(), input_keys.end());
    std::uint64_t k_remaining = k;
    DigitWindow window = DigitWindow::first(cfg.d);

    while (candidates.size() > 1 && !window.exhausted()) {
        Histogram histogram = count_bins(candidates, window, cfg, instr);
        BinSelection sel = select_bin(histogram, k_remaining);
        k_remaining = sel.k_new;
        candidates = select_candidates(candidates, sel.bin, window, cfg, instr);
        window = window.next(cfg.d);
        ++instr.passes;
    }
    return {candidates.front(), k_remaining};
}

// Phase 2: keep every element strictly above the pivot and fill the remaining
// slots with pivot-equal elements by ascending original index. Small k runs a
// fixed-capacity buffer flushed once per worker; large k reuses the
// FlushEfficient policy.
template <typename T>
TopKResult<T> filter(std::span<const T> input, RadixKey pivot_key, std::uint64_t k,
                     SelectionOrder order, const EngineConfig& cfg, Instrumentation& instr) {
    detail::ensure_worker_slots(instr, cfg.grid_size);
    const std::size_t partitions = detail::partition_count(input.size(), cfg.block_size);
    const bool fixed_path = k <= cfg.filter_fixed_ceiling;

    struct Match {
        T value;
        std::uint64_t index;
    };

    TopKResult<T> result;
    result.values.resize(k);
    result.indices.resize(k);
    result.pivot = decode_key<T>(pivot_key, order);

    std::atomic<std::uint64_t> cursor{0};
    std::atomic<bool> overflow{false};
    std::vector<std::vector<std::uint64_t>> equal_indices(cfg.grid_size);

    detail::run_workers(cfg.grid_size, [&](unsigned w) {
        auto sink = [&](std::uint64_t base, const std::vector<Match>& run) {
            for (std::size_t i = 0; i < run.size(); ++i) {
                std::uint64_t at = base + i;
                if (at >= k) {
                    overflow.store(true, std::memory_order_relaxed);
                    return;
                }
                result.values[at] = run[i].value;
                result.indices[at] = run[i].index;
            }
        };
        std::size_t capacity;
        if (fixed_path) {
            capacity = std::max<std::size_t>(128, std::bit_ceil(k));
        } else {
            capacity = 2 * cfg.block_size;
        }
        detail::WriteBuffer<Match, decltype(sink)> buffer(capacity, cursor, sink,
                                                          instr.flushes_per_worker[w]);
        for (std::size_t p = w; p < partitions && !overflow.load(std::memory_order_relaxed);
             p += cfg.grid_size) {
            std::size_t begin = p * cfg.block_size;
            std::size_t end = std::min(begin + cfg.block_size, input.size());
            for (std::size_t i = begin; i < end; ++i) {
                RadixKey key = encode_key(input[i], order);
                if (key > pivot_key) {
                    if (!buffer.push({input[i], i})) {
                        // a single worker exceeding k matches means the pivot
                        // cannot be the k-th key
                        overflow.store(true, std::memory_order_relaxed);
                        break;
                    }
                    ++instr.matched_per_worker[w];
                } else if (key == pivot_key) {
                    equal_indices[w].push_back(i);
                }
            }
            ++instr.partitions_per_worker[w];
            if (!fixed_path && buffer.occupancy() > cfg.block_size) buffer.flush();
        }
        buffer.flush();
    });

    std::uint64_t greater = cursor.load();
    if (overflow.load() || greater > k)
        throw invariant_violation("filter: more than k elements above the pivot");

    std::vector<std::uint64_t> ties;
    for (auto& chunk : equal_indices) ties.insert(ties.end(), chunk.begin(), chunk.end());
    std::sort(ties.begin(), ties.end());
    std::uint64_t need = k - greater;
    if (ties.size() < need)
        throw invariant_violation("filter: pivot-equal elements cannot fill k slots");
    for (std::uint64_t i = 0; i < need; ++i) {
        result.indices[greater + i] = ties[i];
        result.values[greater + i] = input[ties[i]];
    }
    return result;
}

// Sorts a result by (key descending in selection order, index ascending),
// the canonical form compared across runs and against the oracle.
template <typename T>
void normalize_result(TopKResult<T>& result, SelectionOrder order) {
    std::vector<std::size_t> perm(result.values.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        RadixKey ka = encode_key(result.values[a], order);
        RadixKey kb = encode_key(result.values[b], order);
        if (ka.bits != kb.bits) return ka.bits > kb.bits;
        return result.indices[a] < result.indices[b];
    });
    std::vector<T> values(result.values.size());
    std::vector<std::uint64_t> indices(result.indices.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        values[i] = result.values[perm[i]];
        indices[i] = result.indices[perm[i]];
    }
    result.values = std::move(values);
    result.indices = std::move(indices);
}

template <typename T>
TopKResult<T> topk(std::span<const T> input, std::uint64_t k, SelectionOrder order,
                   const EngineConfig& cfg, Instrumentation& instr) {
    if (input.empty()) throw empty_input_error("topk: empty input");
    if (k == 0 || k > input.size()) throw rank_out_of_range("topk: k outside [1, n]");

    std::vector<RadixKey> keys(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) keys[i] = encode_key(input[i], order);

    PivotSelection pivot = radix_select(keys, k, cfg, instr);
    TopKResult<T> result = filter(input, pivot.pivot_key, k, order, cfg, instr);
    normalize_result(result, order);
    return result;
}

template <typename T>
TopKResult<T> topk(std::span<const T> input, std::uint64_t k, SelectionOrder order,
                   const EngineConfig& cfg) {
    Instrumentation instr;
    instr.reset(cfg.grid_size);
    return topk(input, k, order, cfg, instr);
}

}  // namespace rtk

#endif  // RTK_ENGINE_HPP
