// Binary dataset formats.
//
// Single array ("RTK1"): magic, u8 dtype code (0=f32, 1=u32, 2=f16),
// u64 little-endian element count, raw little-endian payload.
// Batch container ("RTKB"): magic, u32 task count, per-task u64 lengths,
// then the concatenated payloads. Offsets are derived from the lengths,
// preserving any misalignment.

#ifndef RTK_IO_HPP
#define RTK_IO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rtk {

enum class DType : std::uint8_t { F32 = 0, U32 = 1, F16 = 2 };

struct Dataset {
    DType dtype = DType::F32;
    std::vector<float> f32;
    std::vector<std::uint32_t> u32;

    std::size_t size() const { return dtype == DType::F32 ? f32.size() : u32.size(); }
};

struct BatchFile {
    std::vector<std::uint64_t> lengths;
    std::vector<std::uint8_t> payload;  // raw element bytes, tasks concatenated

    std::vector<std::uint64_t> derived_offsets() const {
        std::vector<std::uint64_t> offsets;
        std::uint64_t at = 0;
        for (std::uint64_t len : lengths) {
            offsets.push_back(at);
            at += len;
        }
        return offsets;
    }
};

void write_dataset(const std::string& path, std::span<const float> values);
void write_dataset(const std::string& path, std::span<const std::uint32_t> values);
Dataset read_dataset(const std::string& path);

void write_batch(const std::string& path, const std::vector<std::uint64_t>& lengths,
                 std::span<const std::uint8_t> payload);
BatchFile read_batch(const std::string& path);

// Index of the first NaN, or -1 if none.
std::int64_t find_nan(std::span<const float> values);

}  // namespace rtk

#endif  // RTK_IO_HPP
