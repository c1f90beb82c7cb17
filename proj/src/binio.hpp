#pragma once

// Little-endian binary file helpers shared by the format readers/writers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "axflow/grid.hpp"

namespace axflow::binio {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path);
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    return is;
}

inline void put_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_i32(std::ostream& os, std::int32_t v) { put_u32(os, static_cast<std::uint32_t>(v)); }

inline void put_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

inline bool get_u16(std::istream& is, std::uint16_t& v) {
    unsigned char b[2];
    if (!is.read(reinterpret_cast<char*>(b), 2)) return false;
    v = static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    return true;
}

inline bool get_u32(std::istream& is, std::uint32_t& v) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

inline bool get_i32(std::istream& is, std::int32_t& v) {
    std::uint32_t u;
    if (!get_u32(is, u)) return false;
    v = static_cast<std::int32_t>(u);
    return true;
}

inline bool get_f32(std::istream& is, float& v) {
    std::uint32_t u;
    if (!get_u32(is, u)) return false;
    std::memcpy(&v, &u, 4);
    return true;
}

// Bulk f32 payload; fast path on little-endian hosts, element-wise swap
// otherwise.
inline void put_f32_array(std::ostream& os, const float* p, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(float)));
    } else {
        for (std::size_t i = 0; i < n; ++i) put_f32(os, p[i]);
    }
}

inline bool get_f32_array(std::istream& is, float* p, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        return static_cast<bool>(
            is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(float))));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            if (!get_f32(is, p[i])) return false;
        return true;
    }
}

}  // namespace axflow::binio
