#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kglab {

// A binary string of length <= 63, stored MSB-first so that numeric order
// on equal lengths coincides with lexicographic order on the strings.
struct Bits {
    int len = 0;
    std::uint64_t value = 0;

    Bits() = default;
    Bits(int n, std::uint64_t v) : len(n), value(v) {
        assert(n >= 0 && n < 64);
        assert(n == 63 || v < (std::uint64_t{1} << n));
    }

    static Bits epsilon() { return Bits{}; }

    static Bits parse(const std::string& s) {
        if (s.size() >= 64) throw std::invalid_argument("bit string too long: " + s);
        Bits b;
        for (char c : s) {
            if (c != '0' && c != '1') throw std::invalid_argument("bad bit string: " + s);
            b = b.append(c - '0');
        }
        return b;
    }

    std::string str() const {
        std::string s(static_cast<std::size_t>(len), '0');
        for (int i = 0; i < len; ++i)
            if (value >> (len - 1 - i) & 1) s[static_cast<std::size_t>(i)] = '1';
        return s;
    }

    Bits append(int bit) const {
        assert(bit == 0 || bit == 1);
        return Bits(len + 1, value << 1 | static_cast<std::uint64_t>(bit));
    }

    Bits prefix(int k) const {
        assert(k >= 0 && k <= len);
        return Bits(k, value >> (len - k));
    }

    int bit(int i) const { return static_cast<int>(value >> (len - 1 - i) & 1); }

    bool is_prefix_of(const Bits& other) const {
        return len <= other.len && other.prefix(len) == *this;
    }

    friend bool operator==(const Bits&, const Bits&) = default;
    // Length-major order; within a length this is lexicographic.
    friend auto operator<=>(const Bits&, const Bits&) = default;
};

}  // namespace kglab
