#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "flowgate/access_list.hpp"
#include "flowgate/alert.hpp"
#include "flowgate/event_store.hpp"
#include "flowgate/ofl.hpp"
#include "flowgate/packet.hpp"

namespace flowgate {

// Rejection lines and banners are contractual log output; they must match
// the controller's verbose console format byte for byte.
constexpr std::string_view kLogSuspectMac = "Packet_in not handled - suspect MAC!";
constexpr std::string_view kLogNotRegistered = "Not registered MAC - Contact the Administrator!";
constexpr std::string_view kBannerRegistered = "***** Registered MAC Address *****";
constexpr std::string_view kBannerBlacklist = "***** MAC Address in Blacklist *****";
constexpr std::string_view kBannerMacSource = "***** MAC Source *****";

constexpr uint16_t kInstalledFlowPriority = 10;

enum class PolicyAction { Store, Rewrite, Drop, Blacklist, Warn };

// Class-indexed treatment policy. Defaults:
//   1 -> store only; 2 -> store + rewrite to honeypot;
//   3 -> store + drop + blacklist; anything else -> store + warn.
class PolicyTable {
public:
    static PolicyTable defaults() {
        PolicyTable t;
        t.table_[1] = {PolicyAction::Store};
        t.table_[2] = {PolicyAction::Store, PolicyAction::Rewrite};
        t.table_[3] = {PolicyAction::Store, PolicyAction::Drop, PolicyAction::Blacklist};
        return t;
    }

    void set(int cls, std::vector<PolicyAction> actions) { table_[cls] = std::move(actions); }

    const std::vector<PolicyAction>& actions_for(std::optional<int> cls) const {
        if (cls) {
            auto it = table_.find(*cls);
            if (it != table_.end()) return it->second;
        }
        return fallback_;
    }

private:
    std::map<int, std::vector<PolicyAction>> table_;
    std::vector<PolicyAction> fallback_{PolicyAction::Store, PolicyAction::Warn};
};

struct ControllerConfig {
    uint32_t honeypot_port = 4;
    uint32_t mirror_port = 3;
    std::filesystem::path whitelist_path;
    std::filesystem::path blacklist_path;
    uint16_t alert_port = 51234;
    std::filesystem::path event_store_path;
    std::string listen;  // switch connection endpoint, host:port
};

using Command = std::variant<ofl::FlowMod, ofl::PacketOutMsg>;

struct PacketInResult {
    std::vector<Command> commands;
    std::vector<std::string> log;
    bool rejected = false;
};

struct AlertResult {
    std::vector<ofl::FlowMod> commands;
    StoredEvent stored;
    std::optional<MacAddr> blacklist_added;
    std::vector<std::string> log;
    std::optional<std::string> persist_failure;
};

// L2 learning switch with whitelist/blacklist admission gating on packet-in,
// plus the mitigation application mapping alert classes to treatments.
class Controller {
public:
    Controller(ControllerConfig config, AccessList whitelist, AccessList blacklist,
               EventStore* store = nullptr, PolicyTable policy = PolicyTable::defaults())
        : config_(std::move(config)),
          whitelist_(std::move(whitelist)),
          blacklist_(std::move(blacklist)),
          store_(store),
          policy_(std::move(policy)) {
        if (config_.honeypot_port == config_.mirror_port)
            throw std::invalid_argument("honeypot_port must differ from mirror_port");
    }

    const ControllerConfig& config() const { return config_; }
    const AccessList& whitelist() const { return whitelist_; }
    const AccessList& blacklist() const { return blacklist_; }
    const std::map<MacAddr, uint32_t>& mac_table() const { return mac_table_; }

    // Admission gate and learning-switch logic. Gate order: blacklist
    // first, then whitelist; only admitted sources are learned.
    PacketInResult on_packet_in(const ofl::PacketInMsg& msg) {
        PacketInResult result;
        auto parsed = parse_frame(msg.frame);
        if (!parsed.ok()) {
            result.log.push_back("Frame parse error: " + parsed.error().detail);
            return result;
        }
        const EthernetFrame& frame = parsed.value();

        if (blacklist_.contains(frame.src)) {
            reject_banner(result.log, frame.src);
            result.log.emplace_back(kLogSuspectMac);
            result.rejected = true;
            return result;
        }
        if (!whitelist_.contains(frame.src)) {
            reject_banner(result.log, frame.src);
            result.log.emplace_back(kLogNotRegistered);
            result.rejected = true;
            return result;
        }

        mac_table_[frame.src] = msg.in_port;

        auto dst = mac_table_.find(frame.dst);
        if (dst != mac_table_.end()) {
            ofl::FlowMod mod;
            mod.xid = xids_.next();
            mod.command = ofl::FlowModCommand::Add;
            mod.priority = kInstalledFlowPriority;
            mod.match = ofl::Match{msg.in_port, frame.src, frame.dst};
            mod.actions = {ofl::Action{dst->second}};
            result.commands.emplace_back(std::move(mod));

            ofl::PacketOutMsg out;
            out.xid = xids_.next();
            out.in_port = msg.in_port;
            out.actions = {ofl::Action{dst->second}};
            out.frame = msg.frame;
            result.commands.emplace_back(std::move(out));
            result.log.push_back("Flow installed: in_port=" + std::to_string(msg.in_port) + " " +
                                 frame.src.to_string() + " -> " + frame.dst.to_string() +
                                 " out=" + std::to_string(dst->second));
        } else {
            ofl::PacketOutMsg out;
            out.xid = xids_.next();
            out.in_port = msg.in_port;
            out.actions = {ofl::Action{ofl::kFloodPort}};
            out.frame = msg.frame;
            result.commands.emplace_back(std::move(out));
            result.log.push_back("Flood: " + frame.src.to_string() + " -> " +
                                 frame.dst.to_string() + " from port " +
                                 std::to_string(msg.in_port));
        }
        return result;
    }

    // Executes the class policy for one alert. The stored record carries
    // every action taken. A class whose policy blacklists an already
    // blacklisted source collapses to store-only (idempotent treatment).
    AlertResult on_alert(const AlertEvent& event) {
        AlertResult result;
        auto cls = classify_alert(event.msg);
        std::vector<PolicyAction> actions = policy_.actions_for(cls);
        if (has_action(actions, PolicyAction::Blacklist) && blacklist_.contains(event.src_mac))
            actions = {PolicyAction::Store};

        std::vector<ActionTaken> taken;
        for (PolicyAction action : actions) {
            switch (action) {
                case PolicyAction::Store:
                    taken.push_back(ActionTaken::Stored);
                    break;
                case PolicyAction::Rewrite: {
                    append_mac_pair(result.commands, ofl::FlowModCommand::Modify, event.src_mac,
                                    {ofl::Action{config_.honeypot_port}});
                    taken.push_back(ActionTaken::Rewritten);
                    if (redirected_.insert(event.src_mac).second)
                        result.log.push_back("REWRITE: redirecting " + event.src_mac.to_string() +
                                             " to honeypot port " +
                                             std::to_string(config_.honeypot_port));
                    break;
                }
                case PolicyAction::Drop: {
                    append_mac_pair(result.commands, ofl::FlowModCommand::Delete, event.src_mac,
                                    {});
                    taken.push_back(ActionTaken::Dropped);
                    result.log.push_back("DROP: removing flow entries for " +
                                         event.src_mac.to_string());
                    break;
                }
                case PolicyAction::Blacklist: {
                    try {
                        if (blacklist_.blacklist_add(event.src_mac) == AddOutcome::Inserted) {
                            result.blacklist_added = event.src_mac;
                            result.log.push_back("Blacklist: " + event.src_mac.to_string() +
                                                 " added");
                        }
                        taken.push_back(ActionTaken::Blacklisted);
                    } catch (const PersistError& e) {
                        result.persist_failure = e.what();
                        result.log.push_back(std::string("Blacklist persist failure: ") +
                                             e.what());
                    }
                    break;
                }
                case PolicyAction::Warn:
                    taken.push_back(ActionTaken::Warned);
                    result.log.push_back("Warning: unhandled alert class - \"" + event.msg +
                                         "\" requires administrator attention");
                    break;
            }
        }

        StoredEvent record;
        record.ts = event.timestamp;
        record.cls = cls;
        record.msg = event.msg;
        record.sid = event.sid;
        record.src_mac = event.src_mac;
        record.dst_mac = event.dst_mac;
        record.src_ip = event.src_ip;
        record.dst_ip = event.dst_ip;
        record.proto = event.proto;
        record.action_taken = std::move(taken);
        if (store_) record.seq = store_->append(record);
        result.stored = std::move(record);
        return result;
    }

    // Emits one delete pair per blacklisted MAC so no stale flows survive a
    // controller restart.
    std::vector<ofl::FlowMod> startup_reconcile() {
        std::vector<ofl::FlowMod> commands;
        for (const auto& mac : blacklist_.entries())
            append_mac_pair(commands, ofl::FlowModCommand::Delete, mac, {});
        return commands;
    }

    AccessList& blacklist_mutable() { return blacklist_; }

private:
    static bool has_action(const std::vector<PolicyAction>& actions, PolicyAction a) {
        for (auto x : actions)
            if (x == a) return true;
        return false;
    }

    // Mitigation targets the MAC in both the source and destination match
    // position: entries carrying return traffic toward the attacker also
    // "have" the address.
    void append_mac_pair(std::vector<ofl::FlowMod>& out, ofl::FlowModCommand command,
                         const MacAddr& mac, std::vector<ofl::Action> actions) {
        ofl::FlowMod src_mod;
        src_mod.xid = xids_.next();
        src_mod.command = command;
        src_mod.match.eth_src = mac;
        src_mod.actions = actions;
        out.push_back(std::move(src_mod));

        ofl::FlowMod dst_mod;
        dst_mod.xid = xids_.next();
        dst_mod.command = command;
        dst_mod.match.eth_dst = mac;
        dst_mod.actions = std::move(actions);
        out.push_back(std::move(dst_mod));
    }

    void reject_banner(std::vector<std::string>& log, const MacAddr& src) const {
        log.emplace_back(kBannerRegistered);
        log.push_back(whitelist_.to_bracket_string());
        log.emplace_back(kBannerBlacklist);
        log.push_back(blacklist_.to_bracket_string());
        log.emplace_back(kBannerMacSource);
        log.push_back(src.to_string());
    }

    ControllerConfig config_;
    AccessList whitelist_;
    AccessList blacklist_;
    EventStore* store_;
    PolicyTable policy_;
    std::map<MacAddr, uint32_t> mac_table_;
    std::set<MacAddr> redirected_;  // rewrite already logged for these
    ofl::XidAllocator xids_;
};

}  // namespace flowgate
