#include <catch2/catch_amalgamated.hpp>

#include "flowgate/controller.hpp"
#include "test_support.hpp"

using namespace flowgate;
namespace ts = testsupport;

namespace {

const MacAddr kAttacker = ts::mac("08:00:27:a2:b7:bd");
const MacAddr kVictim = ts::mac("08:00:27:32:e9:4d");
const MacAddr kStranger = ts::mac("00:01:5c:48:0e:41");
const Ipv4Addr kAttackerIp = ts::ip("172.16.10.100");
const Ipv4Addr kVictimIp = ts::ip("172.16.10.2");

Controller make_controller(const ts::TempDir& dir, const std::vector<std::string>& black,
                           EventStore* store = nullptr) {
    auto [wl_path, bl_path] = ts::write_lists(dir.path, ts::whitelist_macs(), black);
    auto wl = load_whitelist(wl_path);
    auto bl = load_blacklist(bl_path);
    REQUIRE(wl.ok());
    REQUIRE(bl.ok());
    ControllerConfig config;
    config.whitelist_path = wl_path;
    config.blacklist_path = bl_path;
    config.event_store_path = dir.path / "events.log";
    return Controller(config, std::move(wl).value(), std::move(bl).value(), store);
}

ofl::PacketInMsg packet_in(uint32_t port, const MacAddr& src, const MacAddr& dst) {
    ofl::PacketInMsg msg;
    msg.xid = 1;
    msg.in_port = port;
    msg.reason = ofl::PacketInReason::NoMatch;
    msg.frame = build_frame(ts::icmp_echo_frame(src, dst, kAttackerIp, kVictimIp));
    return msg;
}

AlertEvent alert(const std::string& msg, const MacAddr& src = kAttacker) {
    AlertEvent event;
    event.msg = msg;
    event.cls = classify_alert(msg);
    event.src_mac = src;
    event.dst_mac = kVictim;
    event.src_ip = kAttackerIp;
    event.dst_ip = kVictimIp;
    event.proto = kProtoTcp;
    event.sid = 1000003;
    event.timestamp = 1'099'000;
    return event;
}

const std::string kWhitelistBrackets =
    "['08:00:27:a2:b7:bd', '08:00:27:32:e9:4d', '00:90:f5:c4:0e:8f', "
    "'00:1d:72:71:03:3a', '68:5b:35:b4:fc:bf']";

}  // namespace

TEST_CASE("an unregistered source is rejected with the full console sequence") {
    ts::TempDir dir;
    auto controller = make_controller(dir, {});
    auto result = controller.on_packet_in(packet_in(1, kStranger, kVictim));

    CHECK(result.rejected);
    CHECK(result.commands.empty());
    REQUIRE(result.log.size() == 7);
    CHECK(result.log[0] == "***** Registered MAC Address *****");
    CHECK(result.log[1] == kWhitelistBrackets);
    CHECK(result.log[2] == "***** MAC Address in Blacklist *****");
    CHECK(result.log[3] == "[]");
    CHECK(result.log[4] == "***** MAC Source *****");
    CHECK(result.log[5] == "00:01:5c:48:0e:41");
    CHECK(result.log[6] == "Not registered MAC - Contact the Administrator!");
    CHECK(controller.mac_table().empty());  // rejected sources are not learned
}

TEST_CASE("a blacklisted source is rejected before the whitelist is consulted") {
    ts::TempDir dir;
    auto controller = make_controller(dir, {"08:00:27:a2:b7:bd"});
    // The attacker is in the whitelist too; the blacklist wins.
    auto result = controller.on_packet_in(packet_in(1, kAttacker, kVictim));

    CHECK(result.rejected);
    CHECK(result.commands.empty());
    REQUIRE(result.log.size() == 7);
    CHECK(result.log[0] == "***** Registered MAC Address *****");
    CHECK(result.log[1] == kWhitelistBrackets);
    CHECK(result.log[2] == "***** MAC Address in Blacklist *****");
    CHECK(result.log[3] == "['08:00:27:a2:b7:bd']");
    CHECK(result.log[4] == "***** MAC Source *****");
    CHECK(result.log[5] == "08:00:27:a2:b7:bd");
    CHECK(result.log[6] == "Packet_in not handled - suspect MAC!");
}

TEST_CASE("admitted sources are learned and unknown destinations flooded") {
    ts::TempDir dir;
    auto controller = make_controller(dir, {});

    auto first = controller.on_packet_in(packet_in(1, kAttacker, kVictim));
    CHECK(!first.rejected);
    REQUIRE(first.commands.size() == 1);
    const auto* flood = std::get_if<ofl::PacketOutMsg>(&first.commands[0]);
    REQUIRE(flood != nullptr);
    CHECK(flood->in_port == 1);
    REQUIRE(flood->actions.size() == 1);
    CHECK(flood->actions[0].port == ofl::kFloodPort);
    REQUIRE(first.log.size() == 1);
    CHECK(first.log[0] == "Flood: 08:00:27:a2:b7:bd -> 08:00:27:32:e9:4d from port 1");
    CHECK(controller.mac_table().at(kAttacker) == 1);

    // The reply direction knows the destination now: install a flow.
    auto second = controller.on_packet_in(packet_in(2, kVictim, kAttacker));
    REQUIRE(second.commands.size() == 2);
    const auto* mod = std::get_if<ofl::FlowMod>(&second.commands[0]);
    REQUIRE(mod != nullptr);
    CHECK(mod->command == ofl::FlowModCommand::Add);
    CHECK(mod->priority == kInstalledFlowPriority);
    CHECK(mod->match.in_port == 2u);
    CHECK(mod->match.eth_src == kVictim);
    CHECK(mod->match.eth_dst == kAttacker);
    REQUIRE(mod->actions.size() == 1);
    CHECK(mod->actions[0].port == 1);

    const auto* out = std::get_if<ofl::PacketOutMsg>(&second.commands[1]);
    REQUIRE(out != nullptr);
    CHECK(out->in_port == 2);
    REQUIRE(out->actions.size() == 1);
    CHECK(out->actions[0].port == 1);
    CHECK(out->frame == build_frame(ts::icmp_echo_frame(kVictim, kAttacker, kAttackerIp,
                                                        kVictimIp)));
    REQUIRE(second.log.size() == 1);
    CHECK(second.log[0] ==
          "Flow installed: in_port=2 08:00:27:32:e9:4d -> 08:00:27:a2:b7:bd out=1");
}

TEST_CASE("an unparseable frame is logged and ignored") {
    ts::TempDir dir;
    auto controller = make_controller(dir, {});
    ofl::PacketInMsg msg;
    msg.in_port = 1;
    msg.frame = {0x01, 0x02, 0x03};
    auto result = controller.on_packet_in(msg);
    CHECK(!result.rejected);
    CHECK(result.commands.empty());
    REQUIRE(result.log.size() == 1);
    CHECK(result.log[0].rfind("Frame parse error:", 0) == 0);
}

TEST_CASE("class 1 alerts are stored and nothing else") {
    ts::TempDir dir;
    auto store = EventStore::open(dir.path / "events.log");
    auto controller = make_controller(dir, {}, &store);

    auto result = controller.on_alert(alert("Class 1 - ICMP detected"));
    CHECK(result.commands.empty());
    CHECK(!result.blacklist_added.has_value());
    CHECK(result.log.empty());
    CHECK(!result.persist_failure.has_value());
    CHECK(result.stored.action_taken == std::vector<ActionTaken>{ActionTaken::Stored});
    CHECK(result.stored.cls == 1);
    CHECK(result.stored.seq == 1);
    REQUIRE(store.all().size() == 1);
    CHECK(store.all()[0] == result.stored);
}

TEST_CASE("class 2 alerts rewrite the source toward the honeypot") {
    ts::TempDir dir;
    auto controller = make_controller(dir, {});

    auto result = controller.on_alert(alert("Class 2 - SCAN Nmap XMAS"));
    REQUIRE(result.commands.size() == 2);
    CHECK(result.commands[0].command == ofl::FlowModCommand::Modify);
    CHECK(result.commands[0].match.eth_src == kAttacker);
    CHECK(!result.commands[0].match.eth_dst.has_value());
    CHECK(result.commands[0].actions == std::vector<ofl::Action>{{4}});
    CHECK(result.commands[1].command == ofl::FlowModCommand::Modify);
    CHECK(result.commands[1].match.eth_dst == kAttacker);
    CHECK(!result.commands[1].match.in_port.has_value());
    CHECK(result.commands[1].actions == std::vector<ofl::Action>{{4}});
    CHECK(result.stored.action_taken ==
          std::vector<ActionTaken>{ActionTaken::Stored, ActionTaken::Rewritten});
    REQUIRE(result.log.size() == 1);
    CHECK(result.log[0] == "REWRITE: redirecting 08:00:27:a2:b7:bd to honeypot port 4");
    CHECK(!controller.blacklist().contains(kAttacker));

    // Repeated alerts keep reasserting the rewrite, logging it only once.
    auto again = controller.on_alert(alert("Class 2 - SCAN Nmap XMAS"));
    CHECK(again.commands.size() == 2);
    CHECK(again.log.empty());
}

TEST_CASE("class 3 alerts drop flows and blacklist the source once") {
    ts::TempDir dir;
    auto store = EventStore::open(dir.path / "events.log");
    auto controller = make_controller(dir, {}, &store);

    auto result = controller.on_alert(alert("Classe 3 - Hping3 DoS Detected"));
    REQUIRE(result.commands.size() == 2);
    CHECK(result.commands[0].command == ofl::FlowModCommand::Delete);
    CHECK(result.commands[0].match.eth_src == kAttacker);
    CHECK(result.commands[0].actions.empty());
    CHECK(result.commands[1].command == ofl::FlowModCommand::Delete);
    CHECK(result.commands[1].match.eth_dst == kAttacker);
    CHECK(result.blacklist_added == kAttacker);
    CHECK(result.stored.action_taken ==
          std::vector<ActionTaken>{ActionTaken::Stored, ActionTaken::Dropped,
                                   ActionTaken::Blacklisted});
    REQUIRE(result.log.size() == 2);
    CHECK(result.log[0] == "DROP: removing flow entries for 08:00:27:a2:b7:bd");
    CHECK(result.log[1] == "Blacklist: 08:00:27:a2:b7:bd added");
    CHECK(controller.blacklist().contains(kAttacker));
    CHECK(ts::read_file(dir.path / "blacklist.txt") == "08:00:27:a2:b7:bd\n");

    // Treating the same source again collapses to store-only.
    auto again = controller.on_alert(alert("Classe 3 - Hping3 DoS Detected"));
    CHECK(again.commands.empty());
    CHECK(!again.blacklist_added.has_value());
    CHECK(again.log.empty());
    CHECK(again.stored.action_taken == std::vector<ActionTaken>{ActionTaken::Stored});

    // And the gate now rejects the source outright.
    auto gate = controller.on_packet_in(packet_in(1, kAttacker, kVictim));
    CHECK(gate.rejected);
    CHECK(gate.log.back() == "Packet_in not handled - suspect MAC!");

    REQUIRE(store.all().size() == 2);
    EventStore::Filter f;
    f.action = ActionTaken::Blacklisted;
    CHECK(store.query(f).size() == 1);
}

TEST_CASE("unknown classes are stored with a warning") {
    ts::TempDir dir;
    auto controller = make_controller(dir, {});
    auto result = controller.on_alert(alert("weird event"));
    CHECK(result.commands.empty());
    CHECK(result.stored.action_taken ==
          std::vector<ActionTaken>{ActionTaken::Stored, ActionTaken::Warned});
    CHECK(!result.stored.cls.has_value());
    REQUIRE(result.log.size() == 1);
    CHECK(result.log[0] ==
          "Warning: unhandled alert class - \"weird event\" requires administrator attention");
}

TEST_CASE("a blacklist persist failure still emits the mitigation commands") {
    ts::TempDir dir;
    auto [wl_path, bl_path] = ts::write_lists(dir.path, ts::whitelist_macs(), {});
    auto wl = load_whitelist(wl_path);
    REQUIRE(wl.ok());
    AccessList broken(ListKind::Blacklist, "/nonexistent-dir-for-tests/blacklist.txt");
    ControllerConfig config;
    Controller controller(config, std::move(wl).value(), std::move(broken));

    auto result = controller.on_alert(alert("Classe 3 - Hping3 DoS Detected"));
    REQUIRE(result.commands.size() == 2);  // the drop pair went out regardless
    CHECK(result.persist_failure.has_value());
    CHECK(!result.blacklist_added.has_value());
    CHECK(result.stored.action_taken ==
          std::vector<ActionTaken>{ActionTaken::Stored, ActionTaken::Dropped});
    REQUIRE(result.log.size() == 2);
    CHECK(result.log[0] == "DROP: removing flow entries for 08:00:27:a2:b7:bd");
    CHECK(result.log[1].rfind("Blacklist persist failure:", 0) == 0);
    CHECK(!controller.blacklist().contains(kAttacker));  // rolled back
}

TEST_CASE("startup reconciliation re-issues delete pairs for the blacklist") {
    ts::TempDir dir;
    auto controller =
        make_controller(dir, {"08:00:27:a2:b7:bd", "00:01:5c:48:0e:41"});
    auto commands = controller.startup_reconcile();
    REQUIRE(commands.size() == 4);
    CHECK(commands[0].command == ofl::FlowModCommand::Delete);
    CHECK(commands[0].match.eth_src == kAttacker);
    CHECK(commands[1].match.eth_dst == kAttacker);
    CHECK(commands[2].match.eth_src == kStranger);
    CHECK(commands[3].match.eth_dst == kStranger);

    auto clean = make_controller(dir, {});
    CHECK(clean.startup_reconcile().empty());
}

TEST_CASE("the honeypot must not be the mirror port") {
    ts::TempDir dir;
    auto [wl_path, bl_path] = ts::write_lists(dir.path, ts::whitelist_macs(), {});
    auto wl = load_whitelist(wl_path);
    auto bl = load_blacklist(bl_path);
    REQUIRE(wl.ok());
    REQUIRE(bl.ok());
    ControllerConfig config;
    config.honeypot_port = 3;
    config.mirror_port = 3;
    CHECK_THROWS_AS(
        Controller(config, std::move(wl).value(), std::move(bl).value()),
        std::invalid_argument);
}

TEST_CASE("alerts built from frames carry the packet's addressing") {
    auto frame = ts::tcp_flag_frame(kAttacker, kVictim, kAttackerIp, kVictimIp, 2048, 80,
                                    kTcpSyn);
    AlertEvent event = alert_from_frame("Classe 3 - Hping3 DoS Detected", 1000003, 77, frame);
    CHECK(event.cls == 3);
    CHECK(event.msg == "Classe 3 - Hping3 DoS Detected");
    CHECK(event.sid == 1000003);
    CHECK(event.timestamp == 77);
    CHECK(event.src_mac == kAttacker);
    CHECK(event.dst_mac == kVictim);
    CHECK(event.src_ip == kAttackerIp);
    CHECK(event.dst_ip == kVictimIp);
    CHECK(event.proto == kProtoTcp);
}
