#pragma once

// Little-endian primitives for the checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "semnav/error.hpp"

namespace semnav::binio {

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void write_u8(std::ostream& out, std::uint8_t v) { out.write(reinterpret_cast<const char*>(&v), 1); }

inline void write_f64(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    bits = to_little(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
}

inline void read_exact(std::istream& in, char* dst, std::size_t n, const std::string& what) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw IoError("truncated " + what);
}

inline std::uint32_t read_u32(std::istream& in, const std::string& what) {
    std::uint32_t v = 0;
    read_exact(in, reinterpret_cast<char*>(&v), sizeof(v), what);
    return to_little(v);
}

inline std::uint8_t read_u8(std::istream& in, const std::string& what) {
    std::uint8_t v = 0;
    read_exact(in, reinterpret_cast<char*>(&v), 1, what);
    return v;
}

inline double read_f64(std::istream& in, const std::string& what) {
    std::uint64_t bits = 0;
    read_exact(in, reinterpret_cast<char*>(&bits), sizeof(bits), what);
    return std::bit_cast<double>(to_little(bits));
}

/// Row-major dump of a matrix (vectors are single-column matrices).
template <typename Derived>
void write_matrix(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(out, m(r, c));
    }
}

template <typename Derived>
void read_matrix(std::istream& in, Eigen::MatrixBase<Derived>& m, const std::string& what) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f64(in, what);
    }
}

}  // namespace semnav::binio
