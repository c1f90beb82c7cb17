#include "axflow/weights_io.hpp"

#include <cstring>

#include "binio.hpp"

namespace axflow {

namespace {
constexpr char kWeightsMagic[4] = {'F', '1', 'D', 'W'};
constexpr std::uint64_t kMaxElems = 1ull << 31;
constexpr int kMaxRank = 8;
}  // namespace

void save_weights(const WeightSet& weights, const std::string& path) {
    auto os = binio::open_out(path);
    os.write(kWeightsMagic, 4);
    binio::put_u32(os, static_cast<std::uint32_t>(weights.size()));
    for (const auto& [name, grid] : weights) {
        if (name.empty() || name.size() > 0xffff)
            throw ValueError("save_weights: bad tensor name length for '" + name + "'");
        binio::put_u16(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        unsigned char rank = static_cast<unsigned char>(grid.ndim());
        os.write(reinterpret_cast<const char*>(&rank), 1);
        for (int i = 0; i < grid.ndim(); ++i)
            binio::put_u32(os, static_cast<std::uint32_t>(grid.dim(i)));
        binio::put_f32_array(os, grid.data(), grid.size());
    }
    if (!os) throw IoError("short write: " + path);
}

WeightSet load_weights(const std::string& path) {
    auto is = binio::open_in(path);
    char magic[4];
    if (!is.read(magic, 4)) throw ParseError(path + ": truncated header, expected F1DW magic");
    if (std::memcmp(magic, kWeightsMagic, 4) != 0)
        throw ParseError(path + ": bad magic, expected F1DW");
    std::uint32_t count;
    if (!binio::get_u32(is, count)) throw ParseError(path + ": truncated header");
    if (count > 4096) throw ParseError(path + ": implausible tensor count " + std::to_string(count));

    WeightSet out;
    for (std::uint32_t t = 0; t < count; ++t) {
        std::uint16_t name_len;
        if (!binio::get_u16(is, name_len) || name_len == 0)
            throw ParseError(path + ": truncated tensor name");
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw ParseError(path + ": truncated tensor name");
        unsigned char rank;
        if (!is.read(reinterpret_cast<char*>(&rank), 1))
            throw ParseError(path + ": truncated tensor '" + name + "'");
        if (rank == 0 || rank > kMaxRank)
            throw ParseError(path + ": bad rank " + std::to_string(rank) + " for '" + name + "'");
        std::vector<int> dims(rank);
        std::uint64_t elems = 1;
        for (int i = 0; i < rank; ++i) {
            std::uint32_t e;
            if (!binio::get_u32(is, e)) throw ParseError(path + ": truncated extents for '" + name + "'");
            if (e == 0) throw ParseError(path + ": zero extent for '" + name + "'");
            elems *= e;
            if (elems > kMaxElems)
                throw ParseError(path + ": extent overflow for '" + name + "'");
            dims[static_cast<std::size_t>(i)] = static_cast<int>(e);
        }
        Grid g(dims);
        if (!binio::get_f32_array(is, g.data(), g.size()))
            throw ParseError(path + ": truncated payload for '" + name + "'");
        if (!out.emplace(std::move(name), std::move(g)).second)
            throw ParseError(path + ": duplicate tensor name");
    }
    return out;
}

const Grid& weight(const WeightSet& weights, const std::string& name) {
    auto it = weights.find(name);
    if (it == weights.end()) throw ValueError("missing weight tensor '" + name + "'");
    return it->second;
}

}  // namespace axflow
