#pragma once

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "flowgate/errors.hpp"
#include "flowgate/ofl.hpp"
#include "flowgate/packet.hpp"

namespace flowgate {

struct FlowEntry {
    uint16_t priority = 0;
    ofl::Match match;
    std::vector<ofl::Action> actions;  // empty = drop
    uint64_t cookie = 0;
    uint64_t packets = 0;
    uint64_t bytes = 0;
    uint64_t install_seq = 0;
};

struct SwitchConfig {
    uint32_t num_ports = 4;
    std::optional<uint32_t> mirror_port;  // carries tap copies only
};

// One packet leaving the switch on a port.
struct Emission {
    uint32_t port = 0;
    std::vector<uint8_t> frame;
};

struct IngressResult {
    std::vector<Emission> emissions;
    std::optional<ofl::PacketInMsg> packet_in;
};

struct ModResult {
    ofl::FlowModCommand command = ofl::FlowModCommand::Add;
    std::size_t count = 0;  // entries modified/deleted; 1 for Add
};

// Simulated OpenFlow-style switch: ports, a priority-ordered flow table,
// table-miss packet-in, and ingress mirroring to a tap port.
class FlowSwitch {
public:
    explicit FlowSwitch(SwitchConfig config) : config_(config) {
        if (config_.mirror_port &&
            (*config_.mirror_port == 0 || *config_.mirror_port > config_.num_ports))
            throw InvalidPort(*config_.mirror_port);
    }

    const SwitchConfig& config() const { return config_; }
    const std::vector<FlowEntry>& entries() const { return entries_; }

    // Processes one packet arriving on a port. The mirror copy is emitted
    // first, unconditionally; then either the matching entry's actions fire
    // or a packet-in is raised. A table-miss forwards nothing.
    IngressResult ingress(uint32_t port, std::span<const uint8_t> frame) {
        if (port == 0 || port > config_.num_ports || port == config_.mirror_port)
            throw InvalidPort(port);

        IngressResult result;
        if (config_.mirror_port)
            result.emissions.push_back(
                Emission{*config_.mirror_port, {frame.begin(), frame.end()}});

        FlowEntry* best = nullptr;
        auto src = frame_src_mac(frame);
        auto dst = frame_dst_mac(frame);
        if (src && dst) {
            for (auto& entry : entries_) {
                if (!entry.match.matches_packet(port, *src, *dst)) continue;
                if (!best || entry.priority > best->priority ||
                    (entry.priority == best->priority && entry.install_seq < best->install_seq))
                    best = &entry;
            }
        }

        if (best) {
            best->packets += 1;
            best->bytes += frame.size();
            emit_actions(result.emissions, best->actions, port, frame);
        } else {
            ofl::PacketInMsg msg;
            msg.in_port = port;
            msg.reason = ofl::PacketInReason::NoMatch;
            msg.frame.assign(frame.begin(), frame.end());
            result.packet_in = std::move(msg);
        }
        return result;
    }

    // Add replaces an entry with an identical (match, priority); Modify and
    // Delete select entries non-strictly: every field present in the mod's
    // match must be present in the entry's match with an equal value.
    ModResult apply_flow_mod(const ofl::FlowMod& mod) {
        switch (mod.command) {
            case ofl::FlowModCommand::Add: {
                for (auto& entry : entries_) {
                    if (entry.match == mod.match && entry.priority == mod.priority) {
                        entry.actions = mod.actions;
                        entry.cookie = mod.cookie;
                        entry.packets = 0;
                        entry.bytes = 0;
                        entry.install_seq = next_seq_++;
                        return {mod.command, 1};
                    }
                }
                entries_.push_back(FlowEntry{mod.priority, mod.match, mod.actions, mod.cookie, 0,
                                             0, next_seq_++});
                return {mod.command, 1};
            }
            case ofl::FlowModCommand::Modify: {
                std::size_t count = 0;
                for (auto& entry : entries_) {
                    if (mod.match.selects(entry.match)) {
                        entry.actions = mod.actions;
                        ++count;
                    }
                }
                return {mod.command, count};
            }
            case ofl::FlowModCommand::Delete: {
                std::size_t before = entries_.size();
                std::erase_if(entries_,
                              [&](const FlowEntry& e) { return mod.match.selects(e.match); });
                return {mod.command, before - entries_.size()};
            }
        }
        return {mod.command, 0};
    }

    std::vector<Emission> apply_packet_out(const ofl::PacketOutMsg& msg) {
        std::vector<Emission> emissions;
        emit_actions(emissions, msg.actions, msg.in_port, msg.frame, true);
        return emissions;
    }

    // Canonical text snapshot, sorted by (priority desc, install order).
    std::string table_digest() const {
        if (entries_.empty()) return "0 entries";
        std::vector<const FlowEntry*> sorted;
        sorted.reserve(entries_.size());
        for (const auto& e : entries_) sorted.push_back(&e);
        std::sort(sorted.begin(), sorted.end(), [](const FlowEntry* a, const FlowEntry* b) {
            if (a->priority != b->priority) return a->priority > b->priority;
            return a->install_seq < b->install_seq;
        });
        std::ostringstream out;
        bool first = true;
        for (const auto* e : sorted) {
            if (!first) out << '\n';
            first = false;
            char cookie[32];
            std::snprintf(cookie, sizeof(cookie), "0x%" PRIx64, e->cookie);
            out << "prio=" << e->priority << " match=" << e->match.to_string()
                << " actions=" << actions_to_string(e->actions) << " cookie=" << cookie
                << " pkts=" << e->packets;
        }
        return out.str();
    }

    static std::string actions_to_string(const std::vector<ofl::Action>& actions) {
        if (actions.empty()) return "drop";
        std::ostringstream out;
        const char* sep = "";
        for (const auto& a : actions) {
            out << sep;
            if (a.port == ofl::kFloodPort)
                out << "out:FLOOD";
            else
                out << "out:" << a.port;
            sep = ",";
        }
        return out.str();
    }

private:
    void emit_actions(std::vector<Emission>& out, const std::vector<ofl::Action>& actions,
                      uint32_t in_port, std::span<const uint8_t> frame,
                      bool validate_ports = false) {
        for (const auto& action : actions) {
            if (action.port == ofl::kFloodPort) {
                for (uint32_t p = 1; p <= config_.num_ports; ++p) {
                    if (p == in_port || p == config_.mirror_port) continue;
                    out.push_back(Emission{p, {frame.begin(), frame.end()}});
                }
            } else {
                if (action.port == 0 || action.port > config_.num_ports) {
                    if (validate_ports) throw InvalidPort(action.port);
                    continue;  // stale table action; nothing to deliver
                }
                if (action.port == config_.mirror_port) continue;  // tap carries copies only
                out.push_back(Emission{action.port, {frame.begin(), frame.end()}});
            }
        }
    }

    SwitchConfig config_;
    std::vector<FlowEntry> entries_;
    uint64_t next_seq_ = 1;
};

}  // namespace flowgate
