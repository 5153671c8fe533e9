// Adaptive scaling against adversarial inputs: subtracting a randomly drawn
// element shifts clustered values toward zero, spreading their exponents so
// the first digit window separates them again. Selection then runs on
// y_i = x_i - a_s and results are re-read from the original input by index.

#ifndef RTK_SCALING_HPP
#define RTK_SCALING_HPP

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "rtk/engine.hpp"
#include "rtk/keycodec.hpp"

namespace rtk {

enum class ScaleMode { Off, Always, Adaptive };

struct ScalePolicy {
    ScaleMode mode = ScaleMode::Off;
    double trigger_fraction = 0.5;  // Adaptive: restart once if the pivot bin
                                    // holds more than this fraction after pass 1
    std::uint64_t seed = 0;
};

struct ScaleInfo {
    bool scaled = false;
    float a_s = 0.0f;
    std::uint64_t a_index = 0;
};

inline std::pair<float, std::uint64_t> draw_scale(std::span<const float> input,
                                                  std::mt19937_64& rng) {
    if (input.empty()) throw empty_input_error("draw_scale: empty input");
    std::uint64_t index = rng() % input.size();
    return {input[index], index};
}

inline TopKResult<float> scaled_topk(std::span<const float> input, std::uint64_t k,
                                     SelectionOrder order, const EngineConfig& cfg,
                                     const ScalePolicy& policy, Instrumentation& instr,
                                     ScaleInfo* info = nullptr) {
    if (input.empty()) throw empty_input_error("scaled_topk: empty input");
    if (k == 0 || k > input.size()) throw rank_out_of_range("scaled_topk: k outside [1, n]");

    bool scale = policy.mode == ScaleMode::Always;
    if (policy.mode == ScaleMode::Adaptive) {
        // one extra counting pass, then restart-once if the pivot bin is fat
        std::vector<RadixKey> keys(input.size());
        for (std::size_t i = 0; i < input.size(); ++i) keys[i] = encode_key(input[i], order);
        Histogram histogram = count_bins(keys, DigitWindow::first(cfg.d), cfg, instr);
        BinSelection sel = select_bin(histogram, k);
        scale = static_cast<double>(histogram[sel.bin]) >
                policy.trigger_fraction * static_cast<double>(input.size());
    }

    if (!scale) {
        if (info) *info = {};
        return topk(input, k, order, cfg, instr);
    }

    std::mt19937_64 rng(policy.seed);
    auto [a_s, a_index] = draw_scale(input, rng);
    if (info) *info = {true, a_s, a_index};

    std::vector<float> shifted(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) shifted[i] = input[i] - a_s;

    TopKResult<float> result = topk(std::span<const float>(shifted), k, order, cfg, instr);
    // indices address the original input; values are re-read for bit-exactness
    for (std::size_t i = 0; i < result.indices.size(); ++i)
        result.values[i] = input[result.indices[i]];
    result.pivot = result.values.empty() ? 0.0f : result.values.back();
    return result;
}

inline TopKResult<float> scaled_topk(std::span<const float> input, std::uint64_t k,
                                     SelectionOrder order, const EngineConfig& cfg,
                                     const ScalePolicy& policy) {
    Instrumentation instr;
    instr.reset(cfg.grid_size);
    return scaled_topk(input, k, order, cfg, policy, instr);
}

}  // namespace rtk

#endif  // RTK_SCALING_HPP
