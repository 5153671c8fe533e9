// Order-preserving bit encodings for radix selection.
//
// Values are mapped to 32-bit unsigned keys whose unsigned order equals the
// selection order, so every pass of the engine can compare raw digit values.
// Floats use the usual sign-flip scheme: positives get the sign bit set,
// negatives are fully complemented. Smallest-first selection complements the
// whole key so the engine always scans for the maximum side.

#ifndef RTK_KEYCODEC_HPP
#define RTK_KEYCODEC_HPP

#include <bit>
#include <cstdint>

namespace rtk {

inline constexpr unsigned kKeyBits = 32;

enum class SelectionOrder { Largest, Smallest };

struct RadixKey {
    std::uint32_t bits = 0;

    friend constexpr bool operator==(RadixKey a, RadixKey b) { return a.bits == b.bits; }
    friend constexpr bool operator<(RadixKey a, RadixKey b) { return a.bits < b.bits; }
    friend constexpr bool operator>(RadixKey a, RadixKey b) { return a.bits > b.bits; }
};

// Bit slice [low, high) currently examined by the engine. The first window
// covers the most significant digit; advance() moves toward bit 0 and clamps
// so the final window may be narrower than d.
struct DigitWindow {
    unsigned low = 0;
    unsigned high = 0;

    constexpr unsigned width() const { return high - low; }
    constexpr bool exhausted() const { return high == 0; }

    static constexpr DigitWindow first(unsigned digit_bits, unsigned key_bits = kKeyBits) {
        return {key_bits > digit_bits ? key_bits - digit_bits : 0, key_bits};
    }

    constexpr DigitWindow next(unsigned digit_bits) const {
        return {low > digit_bits ? low - digit_bits : 0, low};
    }
};

constexpr std::uint32_t extract_digit(RadixKey key, DigitWindow w) {
    return (key.bits >> w.low) & (w.width() >= 32 ? 0xFFFFFFFFu : ((1u << w.width()) - 1u));
}

template <typename T>
struct KeyCodec;

template <>
struct KeyCodec<float> {
    static RadixKey encode(float v, SelectionOrder order) {
        std::uint32_t raw = std::bit_cast<std::uint32_t>(v);
        std::uint32_t bits = (raw & 0x80000000u) ? ~raw : (raw | 0x80000000u);
        if (order == SelectionOrder::Smallest) bits = ~bits;
        return {bits};
    }

    static float decode(RadixKey key, SelectionOrder order) {
        std::uint32_t bits = key.bits;
        if (order == SelectionOrder::Smallest) bits = ~bits;
        std::uint32_t raw = (bits & 0x80000000u) ? (bits ^ 0x80000000u) : ~bits;
        return std::bit_cast<float>(raw);
    }
};

template <>
struct KeyCodec<std::uint32_t> {
    static RadixKey encode(std::uint32_t v, SelectionOrder order) {
        return {order == SelectionOrder::Largest ? v : ~v};
    }

    static std::uint32_t decode(RadixKey key, SelectionOrder order) {
        return order == SelectionOrder::Largest ? key.bits : ~key.bits;
    }
};

template <typename T>
RadixKey encode_key(T v, SelectionOrder order) {
    return KeyCodec<T>::encode(v, order);
}

template <typename T>
T decode_key(RadixKey key, SelectionOrder order) {
    return KeyCodec<T>::decode(key, order);
}

}  // namespace rtk

#endif  // RTK_KEYCODEC_HPP
