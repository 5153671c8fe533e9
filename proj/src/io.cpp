#include "rtk/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rtk {

namespace {

constexpr char kArrayMagic[4] = {'R', 'T', 'K', '1'};
constexpr char kBatchMagic[4] = {'R', 'T', 'K', 'B'};

void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void read_bytes(std::ifstream& in, void* data, std::size_t size, const std::string& path) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (in.gcount() != static_cast<std::streamsize>(size))
        throw std::runtime_error(path + ": truncated file");
}

void write_array(const std::string& path, DType dtype, const void* data, std::uint64_t count,
                 std::size_t elem_bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    write_bytes(out, kArrayMagic, 4);
    std::uint8_t code = static_cast<std::uint8_t>(dtype);
    write_bytes(out, &code, 1);
    write_bytes(out, &count, 8);
    write_bytes(out, data, count * elem_bytes);
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace

void write_dataset(const std::string& path, std::span<const float> values) {
    write_array(path, DType::F32, values.data(), values.size(), sizeof(float));
}

void write_dataset(const std::string& path, std::span<const std::uint32_t> values) {
    write_array(path, DType::U32, values.data(), values.size(), sizeof(std::uint32_t));
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    char magic[4];
    read_bytes(in, magic, 4, path);
    if (std::memcmp(magic, kArrayMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic, not an RTK1 dataset");
    std::uint8_t code;
    std::uint64_t count;
    read_bytes(in, &code, 1, path);
    read_bytes(in, &count, 8, path);

    Dataset ds;
    switch (static_cast<DType>(code)) {
        case DType::F32:
            ds.dtype = DType::F32;
            ds.f32.resize(count);
            read_bytes(in, ds.f32.data(), count * sizeof(float), path);
            break;
        case DType::U32:
            ds.dtype = DType::U32;
            ds.u32.resize(count);
            read_bytes(in, ds.u32.data(), count * sizeof(std::uint32_t), path);
            break;
        case DType::F16:
            throw std::runtime_error(path + ": f16 datasets are not supported by this build");
        default:
            throw std::runtime_error(path + ": unknown dtype code " + std::to_string(code));
    }
    return ds;
}

void write_batch(const std::string& path, const std::vector<std::uint64_t>& lengths,
                 std::span<const std::uint8_t> payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    write_bytes(out, kBatchMagic, 4);
    std::uint32_t count = static_cast<std::uint32_t>(lengths.size());
    write_bytes(out, &count, 4);
    write_bytes(out, lengths.data(), lengths.size() * 8);
    write_bytes(out, payload.data(), payload.size());
    if (!out) throw std::runtime_error(path + ": write failed");
}

BatchFile read_batch(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    char magic[4];
    read_bytes(in, magic, 4, path);
    if (std::memcmp(magic, kBatchMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic, not an RTKB batch");
    std::uint32_t count;
    read_bytes(in, &count, 4, path);
    BatchFile batch;
    batch.lengths.resize(count);
    read_bytes(in, batch.lengths.data(), count * 8ull, path);
    in.seekg(0, std::ios::end);
    auto end = in.tellg();
    std::streamoff header = 4 + 4 + static_cast<std::streamoff>(count) * 8;
    batch.payload.resize(static_cast<std::size_t>(end - header));
    in.seekg(header);
    read_bytes(in, batch.payload.data(), batch.payload.size(), path);
    return batch;
}

std::int64_t find_nan(std::span<const float> values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::isnan(values[i])) return static_cast<std::int64_t>(i);
    return -1;
}

}  // namespace rtk
