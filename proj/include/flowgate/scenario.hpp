#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowgate/access_list.hpp"
#include "flowgate/config.hpp"
#include "flowgate/controller.hpp"
#include "flowgate/detector.hpp"
#include "flowgate/event_store.hpp"
#include "flowgate/flow_switch.hpp"
#include "flowgate/packet.hpp"
#include "flowgate/rules.hpp"

namespace flowgate {

struct HostBinding {
    uint32_t port = 0;
    MacAddr mac;
    Ipv4Addr ip;
};

// Port layout: attacker 1, victim 2, mirror 3, honeypot 4 by default.
struct Topology {
    uint32_t num_ports = 4;
    uint32_t mirror_port = 3;
    uint32_t honeypot_port = 4;
    uint32_t attacker_port = 1;
    uint32_t victim_port = 2;
    std::vector<HostBinding> hosts;

    const HostBinding* host_on(uint32_t port) const {
        for (const auto& h : hosts)
            if (h.port == port) return &h;
        return nullptr;
    }
    const HostBinding* host_with_ip(const Ipv4Addr& ip) const {
        for (const auto& h : hosts)
            if (h.ip == ip) return &h;
        return nullptr;
    }
};

struct Injection {
    uint64_t tick = 0;
    uint32_t port = 0;
    std::vector<uint8_t> bytes;
};

namespace gen {

namespace detail {
inline std::vector<uint8_t> echo_frame(const HostBinding& src, const MacAddr& dst_mac,
                                       const Ipv4Addr& dst_ip, uint8_t icmp_type,
                                       uint16_t sequence, uint16_t ip_id) {
    IcmpEcho echo;
    echo.icmp_type = icmp_type;
    echo.identifier = 0x4242;
    echo.sequence = sequence;
    echo.data.resize(56);
    for (size_t b = 0; b < echo.data.size(); ++b) echo.data[b] = static_cast<uint8_t>(b & 0xFF);

    Ipv4Packet ip;
    ip.identification = ip_id;
    ip.flags = 2;  // DF
    ip.ttl = 64;
    ip.proto = kProtoIcmp;
    ip.src = src.ip;
    ip.dst = dst_ip;
    ip.payload = std::move(echo);

    EthernetFrame frame;
    frame.dst = dst_mac;
    frame.src = src.mac;
    frame.ethertype = kEtherIpv4;
    frame.payload = std::move(ip);
    finalize(frame);
    return build_frame(frame);
}
}  // namespace detail

// ICMP echo requests, one per simulated second: ttl 64, 56-byte payload,
// sequence numbers counting from 1 (total_length 84 on the wire).
inline std::vector<Injection> ping(const HostBinding& src, const MacAddr& dst_mac,
                                   const Ipv4Addr& dst_ip, uint32_t count,
                                   uint64_t start_tick = 0) {
    std::vector<Injection> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
        out.push_back({start_tick + uint64_t{i} * kTicksPerSecond, src.port,
                       detail::echo_frame(src, dst_mac, dst_ip, 8,
                                          static_cast<uint16_t>(i + 1),
                                          static_cast<uint16_t>(0x1c00 + i))});
    return out;
}

// XMAS probes (FIN|PSH|URG = 0x29), one segment per target port, 10 ms
// apart: bare 40-byte IPv4 packets with ttl 49.
inline std::vector<Injection> xmas_scan(const HostBinding& src, const MacAddr& dst_mac,
                                        const Ipv4Addr& dst_ip,
                                        const std::vector<uint16_t>& ports,
                                        uint64_t start_tick = 0) {
    std::vector<Injection> out;
    out.reserve(ports.size());
    for (size_t i = 0; i < ports.size(); ++i) {
        TcpSegment tcp;
        tcp.src_port = 54321;
        tcp.dst_port = ports[i];
        tcp.seq = 0x1a2b3c4d;
        tcp.flags = kTcpXmasFlags;
        tcp.window = 1024;

        Ipv4Packet ip;
        ip.identification = static_cast<uint16_t>(0x77AA + i);
        ip.ttl = 49;
        ip.proto = kProtoTcp;
        ip.src = src.ip;
        ip.dst = dst_ip;
        ip.payload = std::move(tcp);

        EthernetFrame frame;
        frame.dst = dst_mac;
        frame.src = src.mac;
        frame.ethertype = kEtherIpv4;
        frame.payload = std::move(ip);
        finalize(frame);

        out.push_back({start_tick + uint64_t{i} * 10'000, src.port, build_frame(frame)});
    }
    return out;
}

// SYN flood at a fixed rate: ttl 255, tos 64, DF set, 40-byte packets.
// With rand_source the source IPs come from the seeded generator while the
// source MAC stays the host's (mitigation keys on the MAC).
inline std::vector<Injection> syn_flood(const HostBinding& src, const MacAddr& dst_mac,
                                        const Ipv4Addr& dst_ip, uint16_t dst_port,
                                        uint32_t rate, uint32_t duration_s, bool rand_source,
                                        uint32_t seed, uint64_t start_tick = 0) {
    std::mt19937 rng(seed);
    uint64_t spacing = kTicksPerSecond / rate;
    uint64_t count = uint64_t{rate} * duration_s;
    std::vector<Injection> out;
    out.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        TcpSegment tcp;
        tcp.src_port = static_cast<uint16_t>(1024 + (i % 64000));
        tcp.dst_port = dst_port;
        tcp.seq = rng();
        tcp.flags = kTcpSyn;
        tcp.window = 512;

        Ipv4Packet ip;
        ip.tos = 64;
        ip.identification = static_cast<uint16_t>(rng());
        ip.flags = 2;
        ip.ttl = 255;
        ip.proto = kProtoTcp;
        ip.src = rand_source ? Ipv4Addr::from_u32(rng()) : src.ip;
        ip.dst = dst_ip;
        ip.payload = std::move(tcp);

        EthernetFrame frame;
        frame.dst = dst_mac;
        frame.src = src.mac;
        frame.ethertype = kEtherIpv4;
        frame.payload = std::move(ip);
        finalize(frame);

        out.push_back({start_tick + i * spacing, src.port, build_frame(frame)});
    }
    return out;
}

}  // namespace gen

struct TrafficStep {
    enum class Kind { Ping, Xmas, SynFlood };
    Kind kind = Kind::Ping;
    uint32_t src_port = 0;
    Ipv4Addr dst_ip;
    uint32_t count = 1;            // ping
    std::vector<uint16_t> ports;   // xmas
    uint16_t dst_port = 80;        // syn_flood
    uint32_t rate = 1000;          // syn_flood
    uint32_t duration_s = 1;       // syn_flood
    bool rand_source = false;      // syn_flood
    std::optional<uint32_t> seed;  // syn_flood override
    uint64_t start_tick = 0;
};

struct ExpectCheck {
    enum class Op { Eq, Ne, Le, Ge, Lt, Gt, Contains, Excludes };
    std::string metric;  // or "blacklist" for Contains/Excludes
    Op op = Op::Eq;
    int64_t value = 0;
    MacAddr mac;  // Contains/Excludes
    std::string text;

    bool is_mac_check() const { return op == Op::Contains || op == Op::Excludes; }
};

struct ScenarioSpec {
    std::string name;
    std::filesystem::path origin;
    Topology topology;
    std::vector<MacAddr> whitelist;
    std::vector<MacAddr> blacklist;
    std::filesystem::path rules_path;
    std::filesystem::path event_store;  // optional; CLI may override
    uint32_t seed = 1;
    bool bootstrap = true;
    std::vector<TrafficStep> steps;
    std::vector<ExpectCheck> expects;
};

struct ScenarioResult {
    std::map<int, uint64_t> alerts;  // class (0 = unclassified) → count
    uint64_t packets_injected = 0;
    uint64_t detector_packets = 0;
    uint64_t first_attack_tick = 0;
    std::optional<uint64_t> alert_tick;
    std::optional<uint64_t> mitigation_complete_tick;
    uint64_t mitigation_commands = 0;
    uint64_t victim_leak_after_mitigation = 0;
    uint64_t honeypot_received = 0;
    bool digest_changed_by_alerts = false;
    bool followup_rejected = false;
    std::vector<MacAddr> blacklist_added;
    std::vector<MacAddr> blacklist_final;
    uint64_t attacker_flows = 0;             // final entries involving the attacker MAC
    bool attacker_flows_honeypot_only = true;
    std::string final_digest;
    std::filesystem::path event_log;

    uint64_t alerts_for(int cls) const {
        auto it = alerts.find(cls);
        return it == alerts.end() ? 0 : it->second;
    }
    uint64_t alerts_total() const {
        uint64_t total = 0;
        for (const auto& [cls, n] : alerts) total += n;
        return total;
    }
};

struct CheckOutcome {
    std::string text;
    bool pass = false;
    std::string actual;
};

namespace detail {

inline Result<ExpectCheck, ConfigError> parse_check(const std::string& value,
                                                    const std::filesystem::path& origin,
                                                    size_t line) {
    std::istringstream in(value);
    std::string metric, op_text, rhs;
    if (!(in >> metric >> op_text >> rhs))
        return ConfigError{origin, line, "check needs '<metric> <op> <value>'"};
    std::string extra;
    if (in >> extra) return ConfigError{origin, line, "trailing text in check: " + extra};

    ExpectCheck check;
    check.metric = metric;
    check.text = value;
    if (metric == "blacklist") {
        if (op_text == "contains")
            check.op = ExpectCheck::Op::Contains;
        else if (op_text == "excludes")
            check.op = ExpectCheck::Op::Excludes;
        else
            return ConfigError{origin, line, "blacklist checks use contains/excludes"};
        auto mac = MacAddr::parse(rhs);
        if (!mac) return ConfigError{origin, line, "not a MAC address: " + rhs};
        check.mac = *mac;
        return check;
    }
    if (op_text == "==")
        check.op = ExpectCheck::Op::Eq;
    else if (op_text == "!=")
        check.op = ExpectCheck::Op::Ne;
    else if (op_text == "<=")
        check.op = ExpectCheck::Op::Le;
    else if (op_text == ">=")
        check.op = ExpectCheck::Op::Ge;
    else if (op_text == "<")
        check.op = ExpectCheck::Op::Lt;
    else if (op_text == ">")
        check.op = ExpectCheck::Op::Gt;
    else
        return ConfigError{origin, line, "unknown comparator '" + op_text + "'"};
    auto num = parse_int<int64_t>(rhs);
    if (!num) return ConfigError{origin, line, "not an integer: " + rhs};
    check.value = *num;
    return check;
}

inline std::optional<uint64_t> tick_from_seconds(const std::string& s) {
    // Fractional seconds accepted ("1.5"); microsecond resolution.
    size_t dot = s.find('.');
    std::string whole = dot == std::string::npos ? s : s.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    uint64_t ticks = 0;
    if (!whole.empty()) {
        auto w = parse_int<uint64_t>(whole);
        if (!w) return std::nullopt;
        ticks = *w * kTicksPerSecond;
    }
    if (!frac.empty()) {
        if (frac.size() > 6) frac.resize(6);
        while (frac.size() < 6) frac.push_back('0');
        auto f = parse_int<uint64_t>(frac);
        if (!f) return std::nullopt;
        ticks += *f;
    }
    return ticks;
}

inline Result<TrafficStep, ConfigError> parse_step(const std::string& value,
                                                   const std::filesystem::path& origin,
                                                   size_t line) {
    std::istringstream in(value);
    std::string kind;
    if (!(in >> kind)) return ConfigError{origin, line, "empty traffic step"};

    TrafficStep step;
    if (kind == "ping")
        step.kind = TrafficStep::Kind::Ping;
    else if (kind == "xmas")
        step.kind = TrafficStep::Kind::Xmas;
    else if (kind == "syn_flood")
        step.kind = TrafficStep::Kind::SynFlood;
    else
        return ConfigError{origin, line, "unknown traffic kind '" + kind + "'"};

    std::string token;
    bool have_src = false, have_dst = false;
    while (in >> token) {
        size_t eq = token.find('=');
        if (eq == std::string::npos)
            return ConfigError{origin, line, "expected key=value, got '" + token + "'"};
        std::string key = token.substr(0, eq);
        std::string val = token.substr(eq + 1);
        if (key == "src") {
            auto p = parse_int<uint32_t>(val);
            if (!p || *p == 0) return ConfigError{origin, line, "bad src port: " + val};
            step.src_port = *p;
            have_src = true;
        } else if (key == "dst") {
            auto ip = Ipv4Addr::parse(val);
            if (!ip) return ConfigError{origin, line, "bad dst ip: " + val};
            step.dst_ip = *ip;
            have_dst = true;
        } else if (key == "count") {
            auto n = parse_int<uint32_t>(val);
            if (!n || *n == 0) return ConfigError{origin, line, "bad count: " + val};
            step.count = *n;
        } else if (key == "ports") {
            std::istringstream list(val);
            std::string item;
            while (std::getline(list, item, ',')) {
                auto p = parse_int<uint16_t>(item);
                if (!p) return ConfigError{origin, line, "bad port list entry: " + item};
                step.ports.push_back(*p);
            }
            if (step.ports.empty()) return ConfigError{origin, line, "empty port list"};
        } else if (key == "dport") {
            auto p = parse_int<uint16_t>(val);
            if (!p) return ConfigError{origin, line, "bad dport: " + val};
            step.dst_port = *p;
        } else if (key == "rate") {
            auto r = parse_int<uint32_t>(val);
            if (!r || *r == 0) return ConfigError{origin, line, "bad rate: " + val};
            step.rate = *r;
        } else if (key == "duration") {
            auto d = parse_int<uint32_t>(val);
            if (!d || *d == 0) return ConfigError{origin, line, "bad duration: " + val};
            step.duration_s = *d;
        } else if (key == "rand_source") {
            if (val != "true" && val != "false")
                return ConfigError{origin, line, "rand_source is true or false"};
            step.rand_source = val == "true";
        } else if (key == "seed") {
            auto s = parse_int<uint32_t>(val);
            if (!s) return ConfigError{origin, line, "bad seed: " + val};
            step.seed = *s;
        } else if (key == "start") {
            auto t = tick_from_seconds(val);
            if (!t) return ConfigError{origin, line, "bad start time: " + val};
            step.start_tick = *t;
        } else {
            return ConfigError{origin, line, "unknown step key '" + key + "'"};
        }
    }
    if (!have_src) return ConfigError{origin, line, "traffic step needs src="};
    if (!have_dst) return ConfigError{origin, line, "traffic step needs dst="};
    if (step.kind == TrafficStep::Kind::Xmas && step.ports.empty())
        return ConfigError{origin, line, "xmas step needs ports="};
    return step;
}

}  // namespace detail

inline Result<ScenarioSpec, ConfigError> load_scenario(const std::filesystem::path& path) {
    auto ini = IniFile::load(path);
    if (!ini.ok()) return ini.error();
    const IniFile& file = ini.value();

    ScenarioSpec spec;
    spec.name = path.stem().string();
    spec.origin = path;

    for (const auto& entry : file.entries()) {
        const std::string& sec = entry.section;
        const std::string& key = entry.key;
        const std::string& value = entry.value;

        if (sec == "topology") {
            if (key == "ports" || key == "mirror_port" || key == "honeypot_port" ||
                key == "attacker" || key == "victim") {
                auto n = detail::parse_int<uint32_t>(value);
                if (!n || *n == 0)
                    return ConfigError{path, entry.line, key + " must be a positive integer"};
                if (key == "ports")
                    spec.topology.num_ports = *n;
                else if (key == "mirror_port")
                    spec.topology.mirror_port = *n;
                else if (key == "honeypot_port")
                    spec.topology.honeypot_port = *n;
                else if (key == "attacker")
                    spec.topology.attacker_port = *n;
                else
                    spec.topology.victim_port = *n;
            } else if (key == "host") {
                std::istringstream in(value);
                std::string port_s, mac_s, ip_s;
                if (!(in >> port_s >> mac_s >> ip_s))
                    return ConfigError{path, entry.line, "host needs '<port> <mac> <ip>'"};
                HostBinding host;
                auto p = detail::parse_int<uint32_t>(port_s);
                auto mac = MacAddr::parse(mac_s);
                auto ip = Ipv4Addr::parse(ip_s);
                if (!p || *p == 0) return ConfigError{path, entry.line, "bad host port"};
                if (!mac) return ConfigError{path, entry.line, "bad host mac: " + mac_s};
                if (!ip) return ConfigError{path, entry.line, "bad host ip: " + ip_s};
                host.port = *p;
                host.mac = *mac;
                host.ip = *ip;
                spec.topology.hosts.push_back(host);
            } else {
                return ConfigError{path, entry.line, "unknown topology key '" + key + "'"};
            }
        } else if (sec == "whitelist" || sec == "blacklist") {
            if (key != "mac")
                return ConfigError{path, entry.line, "list sections take 'mac = <addr>'"};
            auto mac = MacAddr::parse(value);
            if (!mac) return ConfigError{path, entry.line, "not a MAC address: " + value};
            (sec == "whitelist" ? spec.whitelist : spec.blacklist).push_back(*mac);
        } else if (sec == "config") {
            if (key == "rules") {
                spec.rules_path = detail::resolve_path(path, value);
            } else if (key == "event_store") {
                spec.event_store = detail::resolve_path(path, value);
            } else if (key == "seed") {
                auto s = detail::parse_int<uint32_t>(value);
                if (!s) return ConfigError{path, entry.line, "bad seed"};
                spec.seed = *s;
            } else if (key == "bootstrap") {
                if (value != "true" && value != "false")
                    return ConfigError{path, entry.line, "bootstrap is true or false"};
                spec.bootstrap = value == "true";
            } else {
                return ConfigError{path, entry.line, "unknown config key '" + key + "'"};
            }
        } else if (sec == "traffic") {
            if (key != "step")
                return ConfigError{path, entry.line, "traffic section takes 'step = ...'"};
            auto step = detail::parse_step(value, path, entry.line);
            if (!step.ok()) return step.error();
            spec.steps.push_back(std::move(step).value());
        } else if (sec == "expect") {
            if (key != "check")
                return ConfigError{path, entry.line, "expect section takes 'check = ...'"};
            auto check = detail::parse_check(value, path, entry.line);
            if (!check.ok()) return check.error();
            spec.expects.push_back(std::move(check).value());
        } else {
            return ConfigError{path, entry.line, "unknown section [" + sec + "]"};
        }
    }

    if (spec.rules_path.empty())
        return ConfigError{path, 0, "missing [config] rules = <rule file>"};
    if (!spec.topology.host_on(spec.topology.attacker_port))
        return ConfigError{path, 0, "no host binding on the attacker port"};
    if (!spec.topology.host_on(spec.topology.victim_port))
        return ConfigError{path, 0, "no host binding on the victim port"};
    for (const auto& step : spec.steps)
        if (!spec.topology.host_on(step.src_port))
            return ConfigError{path, 0,
                               "traffic step src port " + std::to_string(step.src_port) +
                                   " has no host binding"};
    std::set<uint32_t> reserved{spec.topology.mirror_port, spec.topology.honeypot_port,
                                spec.topology.attacker_port, spec.topology.victim_port};
    if (reserved.size() != 4)
        return ConfigError{path, 0, "attacker, victim, mirror and honeypot ports must differ"};
    return spec;
}

// Deterministic single-threaded run over the virtual clock: frames enter at
// host ports, mirror copies feed the detector, packet-ins and alerts feed
// the controller, and commands apply to the switch within the same tick.
class ScenarioEngine {
public:
    ScenarioEngine(const ScenarioSpec& spec, FlowSwitch& sw, Controller& controller,
                   Detector& detector)
        : spec_(spec), sw_(sw), controller_(controller), detector_(detector) {}

    void set_attack_start(uint64_t tick) { first_attack_tick_ = tick; }

    void inject(const Injection& inj, bool is_probe = false) {
        ++result_.packets_injected;
        auto ingress = sw_.ingress(inj.port, inj.bytes);
        route_emissions(ingress.emissions, inj.tick, true);
        if (ingress.packet_in) {
            auto handled = controller_.on_packet_in(*ingress.packet_in);
            if (handled.rejected && is_probe) result_.followup_rejected = true;
            apply_commands(handled.commands, inj.tick);
        }
    }

    ScenarioResult finish(const MacAddr& attacker_mac) {
        result_.final_digest = sw_.table_digest();
        if (first_attack_tick_ != std::numeric_limits<uint64_t>::max())
            result_.first_attack_tick = first_attack_tick_;
        for (const FlowEntry& entry : sw_.entries()) {
            if (!entry.match.involves_mac(attacker_mac)) continue;
            ++result_.attacker_flows;
            if (entry.actions != std::vector<ofl::Action>{{spec_.topology.honeypot_port}})
                result_.attacker_flows_honeypot_only = false;
        }
        result_.blacklist_final = controller_.blacklist().entries();
        return result_;
    }

private:
    void route_emissions(const std::vector<Emission>& emissions, uint64_t tick,
                         bool from_flow_table) {
        for (const auto& em : emissions) {
            if (em.port == spec_.topology.mirror_port) {
                tap(tick, em.frame);
                continue;
            }
            if (em.port == spec_.topology.honeypot_port && from_flow_table)
                ++result_.honeypot_received;
            if (em.port == spec_.topology.victim_port) {
                auto src = frame_src_mac(em.frame);
                const HostBinding* attacker =
                    spec_.topology.host_on(spec_.topology.attacker_port);
                if (src && attacker && *src == attacker->mac &&
                    result_.mitigation_complete_tick &&
                    tick > *result_.mitigation_complete_tick)
                    ++result_.victim_leak_after_mitigation;
            }
        }
    }

    void tap(uint64_t tick, const std::vector<uint8_t>& bytes) {
        ++result_.detector_packets;
        auto parsed = parse_frame(bytes);
        if (!parsed.ok()) return;
        for (const AlertEvent& alert : detector_.process(tick, parsed.value())) {
            ++result_.alerts[alert.cls.value_or(0)];
            std::string before = sw_.table_digest();
            auto reaction = controller_.on_alert(alert);
            for (const auto& mod : reaction.commands) {
                sw_.apply_flow_mod(mod);
                ++result_.mitigation_commands;
            }
            if (!reaction.commands.empty() && sw_.table_digest() != before)
                result_.digest_changed_by_alerts = true;
            if (reaction.blacklist_added)
                result_.blacklist_added.push_back(*reaction.blacklist_added);

            if (tick >= first_attack_tick_) {
                if (!result_.alert_tick) result_.alert_tick = tick;
                if (!result_.mitigation_complete_tick && !reaction.commands.empty())
                    result_.mitigation_complete_tick = tick;
            }
        }
    }

    void apply_commands(const std::vector<Command>& commands, uint64_t tick) {
        for (const auto& command : commands) {
            if (const auto* mod = std::get_if<ofl::FlowMod>(&command)) {
                sw_.apply_flow_mod(*mod);
            } else if (const auto* out = std::get_if<ofl::PacketOutMsg>(&command)) {
                auto emissions = sw_.apply_packet_out(*out);
                route_emissions(emissions, tick, false);
            }
        }
    }

    const ScenarioSpec& spec_;
    FlowSwitch& sw_;
    Controller& controller_;
    Detector& detector_;
    ScenarioResult result_;
    uint64_t first_attack_tick_ = std::numeric_limits<uint64_t>::max();
};

struct ScenarioOverrides {
    std::optional<std::filesystem::path> event_store;
    std::optional<uint32_t> seed;
};

inline Result<ScenarioResult, ConfigError> run_scenario(const ScenarioSpec& spec,
                                                        const ScenarioOverrides& overrides = {}) {
    const Topology& topo = spec.topology;
    const HostBinding* attacker = topo.host_on(topo.attacker_port);
    const HostBinding* victim = topo.host_on(topo.victim_port);

    std::ifstream rules_in(spec.rules_path, std::ios::binary);
    if (!rules_in) return ConfigError{spec.rules_path, 0, "cannot open rule file"};
    std::ostringstream rules_text;
    rules_text << rules_in.rdbuf();
    auto rules = parse_rules(rules_text.str());
    if (!rules.ok())
        return ConfigError{spec.rules_path, rules.error().line,
                           "rule parse failed: " + rules.error().to_string()};

    std::filesystem::path store_path = overrides.event_store.value_or(
        spec.event_store.empty() ? std::filesystem::path(spec.name + ".events")
                                 : spec.event_store);
    uint32_t seed = overrides.seed.value_or(spec.seed);

    // Scenario runs are replays: start from a clean store with fresh list
    // files beside it.
    std::error_code ec;
    if (!store_path.parent_path().empty())
        std::filesystem::create_directories(store_path.parent_path(), ec);
    std::filesystem::remove(store_path, ec);
    std::filesystem::path whitelist_path = store_path;
    whitelist_path += ".whitelist";
    std::filesystem::path blacklist_path = store_path;
    blacklist_path += ".blacklist";
    {
        std::ofstream wl(whitelist_path, std::ios::trunc);
        for (const auto& mac : spec.whitelist) wl << mac.to_string() << '\n';
        wl.flush();
        if (!wl) return ConfigError{whitelist_path, 0, "cannot write whitelist"};
        std::ofstream bl(blacklist_path, std::ios::trunc);
        for (const auto& mac : spec.blacklist) bl << mac.to_string() << '\n';
        bl.flush();
        if (!bl) return ConfigError{blacklist_path, 0, "cannot write blacklist"};
    }
    auto whitelist = load_whitelist(whitelist_path);
    if (!whitelist.ok())
        return ConfigError{whitelist_path, static_cast<size_t>(whitelist.error().line),
                           whitelist.error().detail};
    auto blacklist = load_blacklist(blacklist_path);
    if (!blacklist.ok())
        return ConfigError{blacklist_path, static_cast<size_t>(blacklist.error().line),
                           blacklist.error().detail};

    try {
        FlowSwitch sw(SwitchConfig{topo.num_ports, topo.mirror_port});
        EventStore store = EventStore::open(store_path, ClockMode::Virtual);
        ControllerConfig controller_config;
        controller_config.honeypot_port = topo.honeypot_port;
        controller_config.mirror_port = topo.mirror_port;
        controller_config.whitelist_path = whitelist_path;
        controller_config.blacklist_path = blacklist_path;
        controller_config.event_store_path = store_path;
        Controller controller(controller_config, std::move(whitelist).value(),
                              std::move(blacklist).value(), &store);
        Detector detector(std::move(rules).value());
        ScenarioEngine engine(spec, sw, controller, detector);

        for (const auto& mod : controller.startup_reconcile()) sw.apply_flow_mod(mod);

        // Bootstrap: one benign echo exchange installs the two
        // attacker/victim flows that mitigation later acts on.
        std::vector<Injection> all;
        if (spec.bootstrap && attacker && victim) {
            all.push_back({0, attacker->port,
                           gen::detail::echo_frame(*attacker, victim->mac, victim->ip, 8, 1,
                                                   0x0b00)});
            all.push_back({10'000, victim->port,
                           gen::detail::echo_frame(*victim, attacker->mac, attacker->ip, 0, 1,
                                                   0x0b01)});
            all.push_back({20'000, attacker->port,
                           gen::detail::echo_frame(*attacker, victim->mac, victim->ip, 8, 2,
                                                   0x0b02)});
        }

        std::vector<Injection> traffic;
        for (const TrafficStep& step : spec.steps) {
            const HostBinding* src = topo.host_on(step.src_port);
            const HostBinding* dst_host = topo.host_with_ip(step.dst_ip);
            if (!dst_host)
                return ConfigError{spec.origin, 0,
                                   "traffic dst ip has no host binding: " +
                                       step.dst_ip.to_string()};
            std::vector<Injection> generated;
            switch (step.kind) {
                case TrafficStep::Kind::Ping:
                    generated =
                        gen::ping(*src, dst_host->mac, step.dst_ip, step.count, step.start_tick);
                    break;
                case TrafficStep::Kind::Xmas:
                    generated = gen::xmas_scan(*src, dst_host->mac, step.dst_ip, step.ports,
                                               step.start_tick);
                    break;
                case TrafficStep::Kind::SynFlood:
                    generated = gen::syn_flood(*src, dst_host->mac, step.dst_ip, step.dst_port,
                                               step.rate, step.duration_s, step.rand_source,
                                               step.seed.value_or(seed), step.start_tick);
                    break;
            }
            traffic.insert(traffic.end(), std::make_move_iterator(generated.begin()),
                           std::make_move_iterator(generated.end()));
        }

        if (!traffic.empty()) {
            uint64_t first_attack =
                std::min_element(traffic.begin(), traffic.end(), [](const auto& a,
                                                                    const auto& b) {
                    return a.tick < b.tick;
                })->tick;
            engine.set_attack_start(first_attack);
        }

        all.insert(all.end(), std::make_move_iterator(traffic.begin()),
                   std::make_move_iterator(traffic.end()));
        std::stable_sort(all.begin(), all.end(), [](const Injection& a, const Injection& b) {
            if (a.tick != b.tick) return a.tick < b.tick;
            return a.port < b.port;
        });

        uint64_t last_tick = 0;
        for (const auto& inj : all) {
            engine.inject(inj);
            last_tick = inj.tick;
        }

        // Post-run probe: does a fresh packet-in from the attacker still get
        // service? (Deny-by-default check for the flood scenario.)
        if (attacker && victim) {
            Injection probe{last_tick + kTicksPerSecond, attacker->port,
                            gen::detail::echo_frame(*attacker, victim->mac, victim->ip, 8, 99,
                                                    0x0bff)};
            engine.inject(probe, true);
        }

        ScenarioResult result = engine.finish(attacker ? attacker->mac : MacAddr{});
        result.event_log = store_path;
        return result;
    } catch (const InvalidPort& e) {
        return ConfigError{spec.origin, 0, std::string("invalid port in scenario: ") + e.what()};
    } catch (const PersistError& e) {
        return ConfigError{store_path, 0, std::string("persistence failure: ") + e.what()};
    }
}

inline std::vector<CheckOutcome> evaluate_checks(const ScenarioSpec& spec,
                                                 const ScenarioResult& result) {
    std::vector<CheckOutcome> outcomes;

    auto metric_value = [&](const std::string& name) -> std::optional<int64_t> {
        if (name == "alerts_class1") return static_cast<int64_t>(result.alerts_for(1));
        if (name == "alerts_class2") return static_cast<int64_t>(result.alerts_for(2));
        if (name == "alerts_class3") return static_cast<int64_t>(result.alerts_for(3));
        if (name == "alerts_other") return static_cast<int64_t>(result.alerts_for(0));
        if (name == "alerts_total") return static_cast<int64_t>(result.alerts_total());
        if (name == "honeypot_received") return static_cast<int64_t>(result.honeypot_received);
        if (name == "victim_leak")
            return static_cast<int64_t>(result.victim_leak_after_mitigation);
        if (name == "mitigation_commands")
            return static_cast<int64_t>(result.mitigation_commands);
        if (name == "blacklist_added") return static_cast<int64_t>(result.blacklist_added.size());
        if (name == "digest_changed_by_alerts") return result.digest_changed_by_alerts ? 1 : 0;
        if (name == "followup_rejected") return result.followup_rejected ? 1 : 0;
        if (name == "attacker_flows") return static_cast<int64_t>(result.attacker_flows);
        if (name == "attacker_flows_honeypot_only")
            return result.attacker_flows_honeypot_only ? 1 : 0;
        if (name == "mitigation_ticks") {
            if (!result.mitigation_complete_tick) return std::nullopt;
            return static_cast<int64_t>(*result.mitigation_complete_tick -
                                        result.first_attack_tick);
        }
        if (name == "alert_ticks") {
            if (!result.alert_tick) return std::nullopt;
            return static_cast<int64_t>(*result.alert_tick - result.first_attack_tick);
        }
        return std::nullopt;
    };

    for (const auto& check : spec.expects) {
        CheckOutcome outcome;
        outcome.text = check.text;
        if (check.is_mac_check()) {
            bool present = std::find(result.blacklist_final.begin(),
                                     result.blacklist_final.end(),
                                     check.mac) != result.blacklist_final.end();
            outcome.pass = check.op == ExpectCheck::Op::Contains ? present : !present;
            outcome.actual = present ? "present" : "absent";
            outcomes.push_back(std::move(outcome));
            continue;
        }
        auto actual = metric_value(check.metric);
        if (!actual) {
            outcome.pass = false;
            outcome.actual = "unavailable";
            outcomes.push_back(std::move(outcome));
            continue;
        }
        outcome.actual = std::to_string(*actual);
        switch (check.op) {
            case ExpectCheck::Op::Eq: outcome.pass = *actual == check.value; break;
            case ExpectCheck::Op::Ne: outcome.pass = *actual != check.value; break;
            case ExpectCheck::Op::Le: outcome.pass = *actual <= check.value; break;
            case ExpectCheck::Op::Ge: outcome.pass = *actual >= check.value; break;
            case ExpectCheck::Op::Lt: outcome.pass = *actual < check.value; break;
            case ExpectCheck::Op::Gt: outcome.pass = *actual > check.value; break;
            default: outcome.pass = false; break;
        }
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

// Structured run summary for the CLI.
inline std::string format_summary(const ScenarioSpec& spec, const ScenarioResult& result) {
    std::ostringstream out;
    out << "scenario: " << spec.name << '\n';
    out << "packets_injected: " << result.packets_injected << '\n';
    out << "detector_packets: " << result.detector_packets << '\n';
    out << "alerts:";
    if (result.alerts.empty()) {
        out << " none";
    } else {
        for (const auto& [cls, n] : result.alerts) {
            out << ' ';
            if (cls == 0)
                out << "unclassified";
            else
                out << "class" << cls;
            out << '=' << n;
        }
    }
    out << '\n';
    out << "first_attack_tick: " << result.first_attack_tick << '\n';
    out << "alert_tick: ";
    if (result.alert_tick)
        out << *result.alert_tick;
    else
        out << '-';
    out << '\n';
    out << "mitigation_complete_tick: ";
    if (result.mitigation_complete_tick)
        out << *result.mitigation_complete_tick;
    else
        out << '-';
    out << '\n';
    out << "mitigation_commands: " << result.mitigation_commands << '\n';
    out << "honeypot_received: " << result.honeypot_received << '\n';
    out << "victim_leak_after_mitigation: " << result.victim_leak_after_mitigation << '\n';
    out << "blacklisted:";
    if (result.blacklist_added.empty()) {
        out << " none";
    } else {
        for (const auto& mac : result.blacklist_added) out << ' ' << mac.to_string();
    }
    out << '\n';
    out << "followup_rejected: " << (result.followup_rejected ? "true" : "false") << '\n';
    out << "event_log: " << result.event_log.string() << '\n';
    out << "table:\n" << result.final_digest;
    return out.str();
}

}  // namespace flowgate
