// Sort-and-choose reference implementations used to check the engine.

#ifndef RTK_ORACLE_HPP
#define RTK_ORACLE_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "rtk/engine.hpp"
#include "rtk/keycodec.hpp"

namespace rtk {

// Full sort by (key, index), take k from the selected end. Tie rule matches
// the engine's filter: pivot-equal elements are taken by ascending index.
template <typename T>
TopKResult<T> oracle_topk(std::span<const T> input, std::uint64_t k, SelectionOrder order) {
    if (input.empty()) throw empty_input_error("oracle_topk: empty input");
    if (k == 0 || k > input.size()) throw rank_out_of_range("oracle_topk: k outside [1, n]");

    std::vector<std::uint64_t> perm(input.size());
    std::iota(perm.begin(), perm.end(), std::uint64_t{0});
    std::stable_sort(perm.begin(), perm.end(), [&](std::uint64_t a, std::uint64_t b) {
        return encode_key(input[a], order).bits > encode_key(input[b], order).bits;
    });

    TopKResult<T> result;
    result.values.reserve(k);
    result.indices.reserve(k);
    for (std::uint64_t i = 0; i < k; ++i) {
        result.values.push_back(input[perm[i]]);
        result.indices.push_back(perm[i]);
    }
    result.pivot = input[perm[k - 1]];
    return result;
}

template <typename T>
T oracle_kth(std::span<const T> input, std::uint64_t k, SelectionOrder order) {
    if (k == 0 || k > input.size()) throw rank_out_of_range("oracle_kth: k outside [1, n]");
    std::vector<T> copy(input.begin(), input.end());
    std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end(), [&](T a, T b) {
        return encode_key(a, order).bits > encode_key(b, order).bits;
    });
    return copy[k - 1];
}

}  // namespace rtk

#endif  // RTK_ORACLE_HPP
