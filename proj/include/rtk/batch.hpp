// Batched execution over a concatenated input: task rescheduling for the
// later, smaller passes, plus the packed-load transaction cost model with
// on-demand left padding of task offsets.

#ifndef RTK_BATCH_HPP
#define RTK_BATCH_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtk/engine.hpp"
#include "rtk/keycodec.hpp"

namespace rtk {

template <typename T>
struct BatchInput {
    std::vector<T> data;                  // concatenated task payloads
    std::vector<std::uint64_t> offsets;   // start position of each task, in elements
    std::vector<std::uint64_t> lengths;
    std::vector<std::uint64_t> ks;

    std::size_t task_count() const { return lengths.size(); }

    std::span<const T> task_view(std::size_t i) const {
        return std::span<const T>(data).subspan(offsets[i], lengths[i]);
    }

    void validate() const {
        if (lengths.empty()) throw std::invalid_argument("batch: no tasks");
        if (offsets.size() != lengths.size() || ks.size() != lengths.size())
            throw std::invalid_argument("batch: descriptor arrays disagree");
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            std::uint64_t next = i + 1 < offsets.size() ? offsets[i + 1] : data.size();
            if (offsets[i] + lengths[i] > next)
                throw std::invalid_argument("batch: task " + std::to_string(i) +
                                            " overlaps its successor");
            if (ks[i] == 0 || ks[i] > lengths[i])
                throw std::invalid_argument("batch: task " + std::to_string(i) +
                                            " has k outside [1, n]");
        }
    }

    static BatchInput concatenate(std::vector<std::vector<T>> tasks,
                                  std::vector<std::uint64_t> ks) {
        BatchInput batch;
        batch.ks = std::move(ks);
        for (auto& t : tasks) {
            batch.offsets.push_back(batch.data.size());
            batch.lengths.push_back(t.size());
            batch.data.insert(batch.data.end(), t.begin(), t.end());
        }
        batch.validate();
        return batch;
    }
};

struct PaddedOffset {
    std::uint64_t surrogate = 0;     // pack-aligned element position, <= offset
    std::uint64_t lead_padding = 0;  // elements to skip in the first pack
};

inline PaddedOffset padded_offset(std::uint64_t offset, std::size_t elem_bytes,
                                  std::size_t pack_size) {
    if (pack_size % elem_bytes != 0)
        throw std::invalid_argument("padded_offset: pack_size must be a multiple of elem_bytes");
    std::uint64_t surrogate = offset * elem_bytes / pack_size * pack_size / elem_bytes;
    return {surrogate, offset - surrogate};
}

namespace detail {

// Widest power-of-two load width (bytes) usable at this byte address.
inline std::size_t alignment_width(std::uint64_t byte_addr, std::size_t elem_bytes,
                                   std::size_t pack_size) {
    std::size_t w = pack_size;
    while (w > elem_bytes && byte_addr % w != 0) w /= 2;
    return w;
}

}  // namespace detail

// Modeled memory load transactions for one task: full loads of the widest
// width the start address allows, plus one transaction per leftover element.
// With padding every task starts at a pack-aligned surrogate, so full
// pack_size loads cover the padded span.
inline std::uint64_t task_transactions(std::uint64_t offset, std::uint64_t length,
                                       std::size_t elem_bytes, std::size_t pack_size,
                                       bool padding_enabled) {
    std::uint64_t span_bytes;
    std::size_t load_width;
    if (padding_enabled) {
        PaddedOffset padded = padded_offset(offset, elem_bytes, pack_size);
        span_bytes = (padded.lead_padding + length) * elem_bytes;
        load_width = pack_size;
    } else {
        span_bytes = length * elem_bytes;
        load_width = detail::alignment_width(offset * elem_bytes, elem_bytes, pack_size);
    }
    return span_bytes / load_width + span_bytes % load_width / elem_bytes;
}

inline std::uint64_t transaction_count(std::span<const std::uint64_t> offsets,
                                       std::span<const std::uint64_t> lengths,
                                       std::size_t elem_bytes, std::size_t pack_size,
                                       bool padding_enabled) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i)
        total += task_transactions(offsets[i], lengths[i], elem_bytes, pack_size,
                                   padding_enabled);
    return total;
}

template <typename T>
std::uint64_t transaction_count(const BatchInput<T>& batch, std::size_t pack_size,
                                bool padding_enabled) {
    return transaction_count(std::span<const std::uint64_t>(batch.offsets),
                             std::span<const std::uint64_t>(batch.lengths), sizeof(T),
                             pack_size, padding_enabled);
}

struct BatchOptions {
    bool rescheduling = true;
    bool padding = true;
};

struct BatchRunInfo {
    std::vector<std::uint64_t> task_passes;
    std::uint64_t phase_b_rounds = 0;
};

namespace detail {

struct LiveTask {
    std::size_t id;
    std::vector<RadixKey> candidates;
    std::uint64_t k_remaining;
    DigitWindow window;
};

// One rescheduled pass level: every live task advances one digit window,
// with workers claiming (task, partition) pairs from a shared queue.
inline void phase_b_level(std::vector<LiveTask>& live, const EngineConfig& cfg,
                          Instrumentation& instr) {
    struct WorkItem {
        std::uint32_t task;
        std::uint32_t partition;
    };
    std::vector<WorkItem> items;
    for (std::uint32_t t = 0; t < live.size(); ++t) {
        std::size_t parts = partition_count(live[t].candidates.size(), cfg.block_size);
        for (std::uint32_t p = 0; p < parts; ++p) items.push_back({t, p});
    }

    const std::size_t radix = cfg.radix();
    std::vector<Histogram> histograms(live.size(), Histogram(radix, 0));
    std::mutex merge_mutex;

    {
        std::atomic<std::size_t> next{0};
        run_workers(cfg.grid_size, [&](unsigned) {
            std::vector<Histogram> shards(live.size());
            for (;;) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= items.size()) break;
                auto [t, p] = items[i];
                auto& task = live[t];
                if (shards[t].empty()) shards[t].assign(radix, 0);
                std::size_t begin = std::size_t{p} * cfg.block_size;
                std::size_t end = std::min(begin + cfg.block_size, task.candidates.size());
                for (std::size_t j = begin; j < end; ++j)
                    ++shards[t][extract_digit(task.candidates[j], task.window)];
            }
            std::lock_guard lock(merge_mutex);
            for (std::size_t t = 0; t < live.size(); ++t) {
                if (shards[t].empty()) continue;
                for (std::size_t b = 0; b < radix; ++b) histograms[t][b] += shards[t][b];
                ++instr.global_merges;
            }
        });
    }

    std::vector<BinSelection> selections(live.size());
    for (std::size_t t = 0; t < live.size(); ++t) {
        instr.elements_scanned += live[t].candidates.size();
        selections[t] = select_bin(histograms[t], live[t].k_remaining);
        live[t].k_remaining = selections[t].k_new;
    }

    std::vector<std::vector<RadixKey>> outputs(live.size());
    std::vector<std::unique_ptr<std::atomic<std::uint64_t>>> cursors;
    for (std::size_t t = 0; t < live.size(); ++t) {
        outputs[t].resize(live[t].candidates.size());
        cursors.push_back(std::make_unique<std::atomic<std::uint64_t>>(0));
    }

    {
        std::atomic<std::size_t> next{0};
        const std::size_t capacity =
            cfg.buffer_policy == BufferPolicy::Naive ? cfg.block_size : 2 * cfg.block_size;
        run_workers(cfg.grid_size, [&](unsigned w) {
            using Sink = std::function<void(std::uint64_t, const std::vector<RadixKey>&)>;
            std::vector<std::optional<WriteBuffer<RadixKey, Sink>>> buffers(live.size());
            for (;;) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= items.size()) break;
                auto [t, p] = items[i];
                auto& task = live[t];
                if (!buffers[t]) {
                    Sink sink = [&outputs, t](std::uint64_t base,
                                              const std::vector<RadixKey>& run) {
                        std::copy(run.begin(), run.end(), outputs[t].begin() + base);
                    };
                    buffers[t].emplace(capacity, *cursors[t], std::move(sink),
                                       instr.flushes_per_worker[w]);
                }
                std::size_t begin = std::size_t{p} * cfg.block_size;
                std::size_t end = std::min(begin + cfg.block_size, task.candidates.size());
                for (std::size_t j = begin; j < end; ++j) {
                    if (extract_digit(task.candidates[j], task.window) == selections[t].bin) {
                        buffers[t]->push(task.candidates[j]);
                        ++instr.matched_per_worker[w];
                    }
                }
                ++instr.partitions_per_worker[w];
                if (cfg.buffer_policy == BufferPolicy::Naive) {
                    buffers[t]->flush();
                } else if (buffers[t]->occupancy() > cfg.block_size) {
                    buffers[t]->flush();
                }
            }
            for (auto& buffer : buffers)
                if (buffer) buffer->flush();
        });
    }

    for (std::size_t t = 0; t < live.size(); ++t) {
        outputs[t].resize(cursors[t]->load());
        live[t].candidates = std::move(outputs[t]);
        live[t].window = live[t].window.next(cfg.d);
    }
}

}  // namespace detail

// Per-task results are identical (as normalized multisets) to running topk
// task by task. With rescheduling, phase A runs the first pass of each task
// at full worker width and phase B stacks the remaining passes of all tasks
// level by level.
template <typename T>
std::vector<TopKResult<T>> batch_topk(const BatchInput<T>& batch, SelectionOrder order,
                                      const EngineConfig& cfg, const BatchOptions& opts,
                                      Instrumentation& instr, BatchRunInfo* info = nullptr) {
    batch.validate();
    cfg.validate();
    detail::ensure_worker_slots(instr, cfg.grid_size);
    instr.modeled_transactions += transaction_count(batch, cfg.pack_size, opts.padding);

    const std::size_t task_count = batch.task_count();
    std::vector<TopKResult<T>> results(task_count);
    std::vector<std::uint64_t> task_passes(task_count, 0);

    auto run_task = [&](std::size_t t, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            throw std::runtime_error("task " + std::to_string(t) + ": " + e.what());
        }
    };

    std::uint64_t phase_b_rounds = 0;

    if (!opts.rescheduling) {
        for (std::size_t t = 0; t < task_count; ++t) {
            run_task(t, [&] {
                std::uint64_t before = instr.passes;
                results[t] = topk(batch.task_view(t), batch.ks[t], order, cfg, instr);
                task_passes[t] = instr.passes - before;
            });
        }
    } else {
        std::vector<detail::LiveTask> live;
        std::vector<PivotSelection> pivots(task_count);
        std::vector<bool> done(task_count, false);

        // Phase A: first pass of each task, full width, one task at a time.
        for (std::size_t t = 0; t < task_count; ++t) {
            run_task(t, [&] {
                auto view = batch.task_view(t);
                std::vector<RadixKey> keys(view.size());
                for (std::size_t i = 0; i < view.size(); ++i)
                    keys[i] = encode_key(view[i], order);

                detail::LiveTask state{t, std::move(keys), batch.ks[t],
                                       DigitWindow::first(cfg.d)};
                if (state.candidates.size() > 1 && !state.window.exhausted()) {
                    Histogram histogram =
                        count_bins(state.candidates, state.window, cfg, instr);
                    BinSelection sel = select_bin(histogram, state.k_remaining);
                    state.k_remaining = sel.k_new;
                    state.candidates =
                        select_candidates(state.candidates, sel.bin, state.window, cfg, instr);
                    state.window = state.window.next(cfg.d);
                    ++task_passes[t];
                    ++instr.passes;
                }
                if (state.candidates.size() <= 1 || state.window.exhausted()) {
                    pivots[t] = {state.candidates.front(), state.k_remaining};
                    done[t] = true;
                } else {
                    live.push_back(std::move(state));
                }
            });
        }

        // Phase B: one level per remaining pass, all live tasks together.
        while (!live.empty()) {
            detail::phase_b_level(live, cfg, instr);
            ++phase_b_rounds;
            std::vector<detail::LiveTask> still_live;
            for (auto& task : live) {
                ++task_passes[task.id];
                ++instr.passes;
                if (task.candidates.size() <= 1 || task.window.exhausted()) {
                    pivots[task.id] = {task.candidates.front(), task.k_remaining};
                    done[task.id] = true;
                } else {
                    still_live.push_back(std::move(task));
                }
            }
            live = std::move(still_live);
        }

        for (std::size_t t = 0; t < task_count; ++t) {
            run_task(t, [&] {
                results[t] = filter(batch.task_view(t), pivots[t].pivot_key, batch.ks[t],
                                    order, cfg, instr);
                normalize_result(results[t], order);
            });
        }
    }

    if (info) {
        info->task_passes = std::move(task_passes);
        info->phase_b_rounds = phase_b_rounds;
    }
    return results;
}

template <typename T>
std::vector<TopKResult<T>> batch_topk(const BatchInput<T>& batch, SelectionOrder order,
                                      const EngineConfig& cfg, const BatchOptions& opts = {}) {
    Instrumentation instr;
    instr.reset(cfg.grid_size);
    return batch_topk(batch, order, cfg, opts, instr);
}

}  // namespace rtk

#endif  // RTK_BATCH_HPP
