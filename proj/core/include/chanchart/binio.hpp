#pragma once

// Little-endian primitive (de)serialization used by the CCD1/CCM1 formats.
// Byte order is composed explicitly so files are identical across hosts.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

#include "chanchart/errors.hpp"

namespace chanchart::binio {

inline void put_bytes(std::ostream& os, const unsigned char* p, std::size_t n) {
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename UInt>
void write_uint_le(std::ostream& os, UInt v) {
    unsigned char buf[sizeof(UInt)];
    for (std::size_t i = 0; i < sizeof(UInt); ++i)
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
    put_bytes(os, buf, sizeof(UInt));
}

inline void write_u8(std::ostream& os, std::uint8_t v) { write_uint_le(os, v); }
inline void write_u16(std::ostream& os, std::uint16_t v) { write_uint_le(os, v); }
inline void write_u32(std::ostream& os, std::uint32_t v) { write_uint_le(os, v); }
inline void write_u64(std::ostream& os, std::uint64_t v) { write_uint_le(os, v); }
inline void write_f32(std::ostream& os, float v) { write_uint_le(os, std::bit_cast<std::uint32_t>(v)); }
inline void write_f64(std::ostream& os, double v) { write_uint_le(os, std::bit_cast<std::uint64_t>(v)); }

template <typename UInt>
UInt read_uint_le(std::istream& is, const char* what) {
    unsigned char buf[sizeof(UInt)];
    is.read(reinterpret_cast<char*>(buf), sizeof(UInt));
    if (!is)
        throw FormatError(std::string("truncated file while reading ") + what);
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i)
        v |= static_cast<UInt>(buf[i]) << (8 * i);
    return v;
}

inline std::uint8_t read_u8(std::istream& is, const char* what) { return read_uint_le<std::uint8_t>(is, what); }
inline std::uint16_t read_u16(std::istream& is, const char* what) { return read_uint_le<std::uint16_t>(is, what); }
inline std::uint32_t read_u32(std::istream& is, const char* what) { return read_uint_le<std::uint32_t>(is, what); }
inline std::uint64_t read_u64(std::istream& is, const char* what) { return read_uint_le<std::uint64_t>(is, what); }
inline float read_f32(std::istream& is, const char* what) { return std::bit_cast<float>(read_uint_le<std::uint32_t>(is, what)); }
inline double read_f64(std::istream& is, const char* what) { return std::bit_cast<double>(read_uint_le<std::uint64_t>(is, what)); }

} // namespace chanchart::binio
