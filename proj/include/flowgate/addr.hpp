#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace flowgate {

namespace detail {
inline int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace detail

// Six-octet MAC address. Canonical text form is lowercase colon-separated;
// parsing accepts either case.
struct MacAddr {
    std::array<uint8_t, 6> octets{};

    auto operator<=>(const MacAddr&) const = default;

    static std::optional<MacAddr> parse(std::string_view text) {
        if (text.size() != 17) return std::nullopt;
        MacAddr m;
        for (int i = 0; i < 6; ++i) {
            int hi = detail::hex_digit(text[i * 3]);
            int lo = detail::hex_digit(text[i * 3 + 1]);
            if (hi < 0 || lo < 0) return std::nullopt;
            if (i < 5 && text[i * 3 + 2] != ':') return std::nullopt;
            m.octets[i] = static_cast<uint8_t>(hi << 4 | lo);
        }
        return m;
    }

    std::string to_string() const {
        char buf[18];
        std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", octets[0], octets[1],
                      octets[2], octets[3], octets[4], octets[5]);
        return buf;
    }
};

// IPv4 address kept as four octets in wire order.
struct Ipv4Addr {
    std::array<uint8_t, 4> octets{};

    auto operator<=>(const Ipv4Addr&) const = default;

    uint32_t to_u32() const {
        return static_cast<uint32_t>(octets[0]) << 24 | static_cast<uint32_t>(octets[1]) << 16 |
               static_cast<uint32_t>(octets[2]) << 8 | octets[3];
    }

    static Ipv4Addr from_u32(uint32_t v) {
        return {{static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                 static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)}};
    }

    static std::optional<Ipv4Addr> parse(std::string_view text) {
        Ipv4Addr a;
        int octet = 0;
        int value = 0;
        int digits = 0;
        for (char c : text) {
            if (c == '.') {
                if (digits == 0 || octet == 3) return std::nullopt;
                a.octets[octet++] = static_cast<uint8_t>(value);
                value = 0;
                digits = 0;
            } else if (c >= '0' && c <= '9') {
                value = value * 10 + (c - '0');
                if (value > 255 || ++digits > 3) return std::nullopt;
            } else {
                return std::nullopt;
            }
        }
        if (octet != 3 || digits == 0) return std::nullopt;
        a.octets[3] = static_cast<uint8_t>(value);
        return a;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", octets[0], octets[1], octets[2], octets[3]);
        return buf;
    }
};

}  // namespace flowgate

template <>
struct std::hash<flowgate::MacAddr> {
    std::size_t operator()(const flowgate::MacAddr& m) const noexcept {
        uint64_t v = 0;
        for (auto o : m.octets) v = v << 8 | o;
        return std::hash<uint64_t>{}(v);
    }
};
