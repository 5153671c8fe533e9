#ifndef RTK_TEST_UTIL_HPP
#define RTK_TEST_UTIL_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "rtk/engine.hpp"
#include "rtk/keycodec.hpp"
#include "rtk/oracle.hpp"

namespace rtk::testutil {

template <typename T>
std::vector<std::uint32_t> key_multiset(const std::vector<T>& values, SelectionOrder order) {
    std::vector<std::uint32_t> keys;
    keys.reserve(values.size());
    for (T v : values) keys.push_back(encode_key(v, order).bits);
    std::sort(keys.begin(), keys.end());
    return keys;
}

// Result matches the sort-and-choose oracle: same value multiset, every index
// points at a matching value, indices pairwise distinct.
template <typename T>
bool matches_oracle(std::span<const T> input, const TopKResult<T>& got, std::uint64_t k,
                    SelectionOrder order) {
    TopKResult<T> expected = oracle_topk(input, k, order);
    if (key_multiset(got.values, order) != key_multiset(expected.values, order)) return false;
    if (encode_key(got.pivot, order).bits != encode_key(expected.pivot, order).bits)
        return false;
    std::vector<std::uint64_t> indices = got.indices;
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) return false;
    for (std::size_t i = 0; i < got.indices.size(); ++i) {
        if (got.indices[i] >= input.size()) return false;
        if (encode_key(input[got.indices[i]], order).bits !=
            encode_key(got.values[i], order).bits)
            return false;
    }
    return true;
}

}  // namespace rtk::testutil

#endif  // RTK_TEST_UTIL_HPP
