#pragma once

// Shared fixtures for the test suite: tiny frame builders, a temp-dir RAII
// helper, randomized message/rule generators, and the reference oracles the
// property tests compare against. The oracles are deliberately written as
// their plain-English definitions (filter, then max, then min; explicit
// subset rule; window chain over the whole stream) rather than mirroring
// the production code paths.

#include <sys/stat.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowgate/flow_switch.hpp"
#include "flowgate/ofl.hpp"
#include "flowgate/packet.hpp"
#include "flowgate/rules.hpp"

namespace testsupport {

using namespace flowgate;

inline MacAddr mac(std::string_view text) {
    auto m = MacAddr::parse(text);
    if (!m) throw std::runtime_error("bad test MAC: " + std::string(text));
    return *m;
}

inline Ipv4Addr ip(std::string_view text) {
    auto a = Ipv4Addr::parse(text);
    if (!a) throw std::runtime_error("bad test IP: " + std::string(text));
    return *a;
}

// The registered-host set used across controller and scenario tests.
inline const std::vector<std::string>& whitelist_macs() {
    static const std::vector<std::string> macs = {
        "08:00:27:a2:b7:bd", "08:00:27:32:e9:4d", "00:90:f5:c4:0e:8f",
        "00:1d:72:71:03:3a", "68:5b:35:b4:fc:bf",
    };
    return macs;
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "flowgate-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes whitelist/blacklist files into dir and returns their paths.
inline std::pair<std::filesystem::path, std::filesystem::path> write_lists(
    const std::filesystem::path& dir, const std::vector<std::string>& white,
    const std::vector<std::string>& black) {
    auto wl = dir / "whitelist.txt";
    auto bl = dir / "blacklist.txt";
    std::string wtext, btext;
    for (const auto& m : white) wtext += m + "\n";
    for (const auto& m : black) btext += m + "\n";
    write_file(wl, wtext);
    write_file(bl, btext);
    return {wl, bl};
}

inline EthernetFrame icmp_echo_frame(const MacAddr& src_mac, const MacAddr& dst_mac,
                                     const Ipv4Addr& src_ip, const Ipv4Addr& dst_ip,
                                     uint8_t icmp_type = 8, uint16_t sequence = 1) {
    IcmpEcho echo;
    echo.icmp_type = icmp_type;
    echo.identifier = 0x1234;
    echo.sequence = sequence;
    echo.data.assign(56, 0xA5);

    Ipv4Packet ipp;
    ipp.identification = 0x0100;
    ipp.ttl = 64;
    ipp.proto = kProtoIcmp;
    ipp.src = src_ip;
    ipp.dst = dst_ip;
    ipp.payload = std::move(echo);

    EthernetFrame frame;
    frame.dst = dst_mac;
    frame.src = src_mac;
    frame.ethertype = kEtherIpv4;
    frame.payload = std::move(ipp);
    finalize(frame);
    return frame;
}

inline EthernetFrame tcp_flag_frame(const MacAddr& src_mac, const MacAddr& dst_mac,
                                    const Ipv4Addr& src_ip, const Ipv4Addr& dst_ip,
                                    uint16_t src_port, uint16_t dst_port, uint8_t flags) {
    TcpSegment tcp;
    tcp.src_port = src_port;
    tcp.dst_port = dst_port;
    tcp.seq = 0x01020304;
    tcp.flags = flags;
    tcp.window = 1024;

    Ipv4Packet ipp;
    ipp.identification = 0x0200;
    ipp.ttl = 64;
    ipp.proto = kProtoTcp;
    ipp.src = src_ip;
    ipp.dst = dst_ip;
    ipp.payload = std::move(tcp);

    EthernetFrame frame;
    frame.dst = dst_mac;
    frame.src = src_mac;
    frame.ethertype = kEtherIpv4;
    frame.payload = std::move(ipp);
    finalize(frame);
    return frame;
}

// ---------------------------------------------------------------------------
// Reference oracles.

// Matching decision restated as filter -> max priority -> min install_seq.
inline std::optional<size_t> oracle_best_index(const std::vector<FlowEntry>& entries,
                                               uint32_t port, const MacAddr& src,
                                               const MacAddr& dst) {
    std::vector<size_t> candidates;
    for (size_t i = 0; i < entries.size(); ++i) {
        const ofl::Match& m = entries[i].match;
        bool port_ok = !m.in_port || *m.in_port == port;
        bool src_ok = !m.eth_src || *m.eth_src == src;
        bool dst_ok = !m.eth_dst || *m.eth_dst == dst;
        if (port_ok && src_ok && dst_ok) candidates.push_back(i);
    }
    if (candidates.empty()) return std::nullopt;
    uint16_t top = 0;
    for (size_t i : candidates) top = std::max(top, entries[i].priority);
    std::optional<size_t> best;
    for (size_t i : candidates) {
        if (entries[i].priority != top) continue;
        if (!best || entries[i].install_seq < entries[*best].install_seq) best = i;
    }
    return best;
}

// Non-strict selection as an explicit subset rule: every field the selector
// pins must be pinned to the same value by the entry.
inline std::set<uint64_t> oracle_selected_cookies(const std::vector<FlowEntry>& entries,
                                                  const ofl::Match& sel) {
    std::set<uint64_t> out;
    for (const auto& e : entries) {
        bool in_port_ok = !sel.in_port || (e.match.in_port && *e.match.in_port == *sel.in_port);
        bool src_ok = !sel.eth_src || (e.match.eth_src && *e.match.eth_src == *sel.eth_src);
        bool dst_ok = !sel.eth_dst || (e.match.eth_dst && *e.match.eth_dst == *sel.eth_dst);
        if (in_port_ok && src_ok && dst_ok) out.insert(e.cookie);
    }
    return out;
}

// Output ports for one action list, mirror copy first.
inline std::vector<uint32_t> oracle_emission_ports(const SwitchConfig& cfg, uint32_t in_port,
                                                   const std::vector<ofl::Action>& actions) {
    std::vector<uint32_t> ports;
    if (cfg.mirror_port) ports.push_back(*cfg.mirror_port);
    for (const auto& a : actions) {
        if (a.port == ofl::kFloodPort) {
            for (uint32_t p = 1; p <= cfg.num_ports; ++p)
                if (p != in_port && (!cfg.mirror_port || p != *cfg.mirror_port))
                    ports.push_back(p);
        } else if (a.port >= 1 && a.port <= cfg.num_ports &&
                   (!cfg.mirror_port || a.port != *cfg.mirror_port)) {
            ports.push_back(a.port);
        }
    }
    return ports;
}

// Tumbling-window threshold restated as a window chain built over the whole
// (sorted, single-key) tick sequence: a window opens at the first event at or
// past the previous window's end, counts until it reaches n (one fire), and
// ignores the rest of its span.
inline std::vector<size_t> oracle_fire_indices(const std::vector<uint64_t>& ticks, uint32_t n,
                                               uint64_t duration) {
    std::vector<size_t> fires;
    size_t i = 0;
    while (i < ticks.size()) {
        uint64_t window_end = ticks[i] + duration;
        uint32_t count = 0;
        bool fired = false;
        size_t j = i;
        while (j < ticks.size() && ticks[j] < window_end) {
            if (!fired) {
                ++count;
                if (count >= n) {
                    fires.push_back(j);
                    fired = true;
                }
            }
            ++j;
        }
        i = j;
    }
    return fires;
}

// ---------------------------------------------------------------------------
// Randomized generators (seeded; shared by unit tests and the gate binary).

inline uint32_t pick(std::mt19937& rng, uint32_t bound) { return rng() % bound; }

inline MacAddr random_mac(std::mt19937& rng, uint32_t pool = 0) {
    if (pool) return MacAddr{{0x02, 0, 0, 0, 0, static_cast<uint8_t>(pick(rng, pool))}};
    MacAddr m;
    for (auto& o : m.octets) o = static_cast<uint8_t>(rng());
    return m;
}

inline std::vector<uint8_t> random_bytes(std::mt19937& rng, size_t max_len) {
    std::vector<uint8_t> out(pick(rng, static_cast<uint32_t>(max_len + 1)));
    for (auto& b : out) b = static_cast<uint8_t>(rng());
    return out;
}

inline ofl::Match random_match(std::mt19937& rng, uint32_t port_bound = 16,
                               uint32_t mac_pool = 0) {
    ofl::Match m;
    if (pick(rng, 2)) m.in_port = 1 + pick(rng, port_bound);
    if (pick(rng, 2)) m.eth_src = random_mac(rng, mac_pool);
    if (pick(rng, 2)) m.eth_dst = random_mac(rng, mac_pool);
    return m;
}

inline std::vector<ofl::Action> random_actions(std::mt19937& rng, uint32_t max_count,
                                               uint32_t port_bound, bool allow_flood) {
    std::vector<ofl::Action> actions(pick(rng, max_count + 1));
    for (auto& a : actions) {
        if (allow_flood && pick(rng, 6) == 0)
            a.port = ofl::kFloodPort;
        else
            a.port = pick(rng, port_bound + 1);  // 0..bound, invalid 0 included
    }
    return actions;
}

inline ofl::Message random_ofl_message(std::mt19937& rng) {
    switch (pick(rng, 6)) {
        case 0: return ofl::Hello{rng()};
        case 1: return ofl::EchoRequest{rng()};
        case 2: return ofl::EchoReply{rng()};
        case 3: {
            ofl::PacketInMsg m;
            m.xid = rng();
            m.in_port = pick(rng, 48);
            m.reason = ofl::PacketInReason::NoMatch;
            m.frame = random_bytes(rng, 400);
            return m;
        }
        case 4: {
            ofl::PacketOutMsg m;
            m.xid = rng();
            m.in_port = pick(rng, 48);
            m.actions = random_actions(rng, 3, 47, true);
            m.frame = random_bytes(rng, 400);
            return m;
        }
        default: {
            ofl::FlowMod m;
            m.xid = rng();
            m.cookie = static_cast<uint64_t>(rng()) << 32 | rng();
            switch (pick(rng, 3)) {
                case 0: m.command = ofl::FlowModCommand::Add; break;
                case 1: m.command = ofl::FlowModCommand::Modify; break;
                default: m.command = ofl::FlowModCommand::Delete; break;
            }
            m.priority = static_cast<uint16_t>(rng());
            m.match = random_match(rng);
            m.actions = random_actions(rng, 3, 47, true);
            return m;
        }
    }
}

inline std::string random_alert_text(std::mt19937& rng, size_t max_len = 255) {
    static const char kChars[] =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 -_.:!\"'";
    std::string out(pick(rng, static_cast<uint32_t>(max_len + 1)), ' ');
    for (auto& c : out) c = kChars[pick(rng, sizeof(kChars) - 1)];
    return out;
}

inline Rule random_rule(std::mt19937& rng) {
    Rule r;
    switch (pick(rng, 4)) {
        case 0: r.proto = RuleProto::Icmp; break;
        case 1: r.proto = RuleProto::Tcp; break;
        case 2: r.proto = RuleProto::Udp; break;
        default: r.proto = RuleProto::Ip; break;
    }
    auto rand_addr = [&rng]() {
        AddrSpec s;
        uint32_t k = pick(rng, 3);
        if (k == 0) return s;
        s.addr = Ipv4Addr::from_u32(rng());
        if (k == 2) s.prefix = static_cast<uint8_t>(pick(rng, 33));
        return s;
    };
    r.src_addr = rand_addr();
    r.dst_addr = rand_addr();
    if (pick(rng, 2)) r.src_port.port = static_cast<uint16_t>(rng());
    if (pick(rng, 2)) r.dst_port.port = static_cast<uint16_t>(rng());

    static const char* kWords[] = {"Class",  "Classe", "SCAN", "Nmap", "XMAS",
                                   "ICMP",   "DoS",    "probe", "flood", "detected"};
    uint32_t words = 1 + pick(rng, 4);
    for (uint32_t i = 0; i < words; ++i) {
        if (i) r.msg += ' ';
        r.msg += kWords[pick(rng, 10)];
        if (pick(rng, 3) == 0) r.msg += " " + std::to_string(pick(rng, 100));
    }

    if (r.proto == RuleProto::Icmp && pick(rng, 2)) r.itype = static_cast<uint8_t>(pick(rng, 256));
    if (r.proto == RuleProto::Tcp && pick(rng, 2))
        r.flags = static_cast<uint8_t>(1 + pick(rng, 63));  // nonzero six-bit mask
    if (pick(rng, 2)) {
        DetectionFilter f;
        f.track = pick(rng, 2) ? DetectionFilter::Track::BySrc : DetectionFilter::Track::ByDst;
        f.count = 1 + pick(rng, 1000);
        f.seconds = 1 + pick(rng, 600);
        r.filter = f;
    }
    r.sid = rng();
    return r;
}

// Feeds `bytes` to `push` in random chunks of 1..max_chunk bytes.
template <typename Push>
inline void feed_chunked(std::mt19937& rng, const std::vector<uint8_t>& bytes, size_t max_chunk,
                         Push&& push) {
    size_t pos = 0;
    while (pos < bytes.size()) {
        size_t n = 1 + pick(rng, static_cast<uint32_t>(max_chunk));
        n = std::min(n, bytes.size() - pos);
        push(std::span<const uint8_t>(bytes.data() + pos, n));
        pos += n;
    }
}

}  // namespace testsupport
