#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "flowgate/alert.hpp"
#include "flowgate/packet.hpp"
#include "flowgate/rules.hpp"

namespace flowgate {

constexpr uint64_t kTicksPerSecond = 1'000'000;  // microsecond virtual time

class VirtualClock {
public:
    uint64_t now() const { return now_; }
    // Monotonically non-decreasing; stale ticks are clamped.
    void advance_to(uint64_t tick) {
        if (tick > now_) now_ = tick;
    }

private:
    uint64_t now_ = 0;
};

// Per (sid, track key) tumbling window. Counting stops once the window
// has fired, so each window yields at most one alert.
struct ThresholdWindow {
    uint64_t start = 0;
    uint32_t count = 0;
    bool fired = false;
};

using ThresholdState = std::map<std::pair<uint32_t, uint32_t>, ThresholdWindow>;

namespace detail {

inline std::optional<uint8_t> icmp_type_of(const Ipv4Packet& ip) {
    if (ip.proto != kProtoIcmp) return std::nullopt;
    if (const IcmpEcho* echo = ip.icmp()) return echo->icmp_type;
    if (const auto* raw = std::get_if<std::vector<uint8_t>>(&ip.payload); raw && !raw->empty())
        return (*raw)[0];
    return std::nullopt;
}

inline bool rule_matches(const Rule& rule, const EthernetFrame& frame) {
    const Ipv4Packet* ip = frame.ipv4();
    if (!ip) return false;

    switch (rule.proto) {
        case RuleProto::Icmp:
            if (ip->proto != kProtoIcmp) return false;
            break;
        case RuleProto::Tcp:
            if (ip->proto != kProtoTcp) return false;
            break;
        case RuleProto::Udp:
            if (ip->proto != kProtoUdp) return false;
            break;
        case RuleProto::Ip:
            break;
    }
    if (!rule.src_addr.matches(ip->src) || !rule.dst_addr.matches(ip->dst)) return false;

    std::optional<uint16_t> src_port, dst_port;
    if (const TcpSegment* tcp = ip->tcp()) {
        src_port = tcp->src_port;
        dst_port = tcp->dst_port;
    }
    if (!rule.src_port.matches(src_port) || !rule.dst_port.matches(dst_port)) return false;

    if (rule.itype) {
        auto type = icmp_type_of(*ip);
        if (!type || *type != *rule.itype) return false;
    }
    if (rule.flags) {
        const TcpSegment* tcp = ip->tcp();
        if (!tcp || tcp->flags != *rule.flags) return false;  // exact flag-set equality
    }
    return true;
}

}  // namespace detail

// First matching rule (file order) produces the packet's alert; later rules
// with detection_filter still count the packet but any fire is suppressed
// (the window is spent either way).
inline std::vector<AlertEvent> match_packet(const std::vector<Rule>& rules,
                                            const EthernetFrame& frame,
                                            const VirtualClock& clock, ThresholdState& state) {
    std::vector<AlertEvent> alerts;
    for (const Rule& rule : rules) {
        if (!detail::rule_matches(rule, frame)) continue;

        if (!rule.filter) {
            if (alerts.empty())
                alerts.push_back(alert_from_frame(rule.msg, rule.sid, clock.now(), frame));
            continue;
        }

        const Ipv4Packet* ip = frame.ipv4();
        uint32_t key = rule.filter->track == DetectionFilter::Track::BySrc ? ip->src.to_u32()
                                                                           : ip->dst.to_u32();
        ThresholdWindow& window = state[{rule.sid, key}];
        uint64_t duration = uint64_t{rule.filter->seconds} * kTicksPerSecond;
        if (window.count == 0 || clock.now() >= window.start + duration)
            window = ThresholdWindow{clock.now(), 0, false};
        if (window.fired) continue;
        ++window.count;
        if (window.count >= rule.filter->count) {
            window.fired = true;
            if (alerts.empty())
                alerts.push_back(alert_from_frame(rule.msg, rule.sid, clock.now(), frame));
        }
    }
    return alerts;
}

// Stateful wrapper owning the clock and threshold windows for one tap.
class Detector {
public:
    explicit Detector(std::vector<Rule> rules) : rules_(std::move(rules)) {}

    std::vector<AlertEvent> process(uint64_t tick, const EthernetFrame& frame) {
        clock_.advance_to(tick);
        return match_packet(rules_, frame, clock_, state_);
    }

    const VirtualClock& clock() const { return clock_; }
    const std::vector<Rule>& rules() const { return rules_; }

private:
    std::vector<Rule> rules_;
    VirtualClock clock_;
    ThresholdState state_;
};

struct TapPacket {
    uint64_t tick = 0;
    EthernetFrame frame;
};

struct TapSummary {
    uint64_t packets_seen = 0;
    uint64_t alerts_emitted = 0;
    bool sink_closed = false;
};

// Evaluates every frame in order; alerts go to the sink in emission order.
// A sink returning false stops the tap cleanly (summary still returned).
template <typename Sink>
TapSummary run_tap(const std::vector<TapPacket>& tap, const std::vector<Rule>& rules,
                   Sink&& sink) {
    Detector detector(rules);
    TapSummary summary;
    for (const TapPacket& packet : tap) {
        ++summary.packets_seen;
        for (const AlertEvent& alert : detector.process(packet.tick, packet.frame)) {
            if (!sink(alert)) {
                summary.sink_closed = true;
                return summary;
            }
            ++summary.alerts_emitted;
        }
    }
    return summary;
}

}  // namespace flowgate
