#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "flowgate/addr.hpp"
#include "flowgate/packet.hpp"

namespace flowgate {

// A detector-to-controller security event: the alert text plus the metadata
// of the frame that triggered it.
struct AlertEvent {
    std::optional<int> cls;  // parsed from the msg prefix when present
    std::string msg;
    MacAddr src_mac;
    MacAddr dst_mac;
    Ipv4Addr src_ip;
    Ipv4Addr dst_ip;
    uint8_t proto = 0;
    uint32_t sid = 0;  // 0 when unknown (wire-received alerts carry no sid)
    uint64_t timestamp = 0;

    bool operator==(const AlertEvent&) const = default;
};

// Extracts the treatment class from a leading "Class <n>" (case-insensitive,
// Portuguese "Classe" tolerated). Anything else is unclassified.
inline std::optional<int> classify_alert(std::string_view msg) {
    static constexpr std::string_view kWord = "class";
    if (msg.size() < kWord.size()) return std::nullopt;
    for (std::size_t i = 0; i < kWord.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(msg[i])) != kWord[i]) return std::nullopt;
    std::size_t pos = kWord.size();
    if (pos < msg.size() && (msg[pos] == 'e' || msg[pos] == 'E')) ++pos;
    std::size_t digits_start = pos;
    while (digits_start < msg.size() && msg[digits_start] == ' ') ++digits_start;
    if (digits_start == pos) return std::nullopt;  // requires at least one space
    std::size_t digits_end = digits_start;
    int value = 0;
    while (digits_end < msg.size() && std::isdigit(static_cast<unsigned char>(msg[digits_end]))) {
        value = value * 10 + (msg[digits_end] - '0');
        ++digits_end;
    }
    if (digits_end == digits_start) return std::nullopt;
    return value;
}

// Builds the event the controller consumes from an alert message and the
// triggering frame.
inline AlertEvent alert_from_frame(std::string msg, uint32_t sid, uint64_t timestamp,
                                   const EthernetFrame& frame) {
    AlertEvent event;
    event.cls = classify_alert(msg);
    event.msg = std::move(msg);
    event.sid = sid;
    event.timestamp = timestamp;
    event.src_mac = frame.src;
    event.dst_mac = frame.dst;
    if (const auto* ip = frame.ipv4()) {
        event.src_ip = ip->src;
        event.dst_ip = ip->dst;
        event.proto = ip->proto;
    }
    return event;
}

}  // namespace flowgate
