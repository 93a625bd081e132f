#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "flowgate/alert_wire.hpp"
#include "flowgate/config.hpp"
#include "flowgate/controller.hpp"
#include "flowgate/detector.hpp"
#include "flowgate/event_store.hpp"
#include "flowgate/net.hpp"
#include "flowgate/scenario.hpp"

namespace flowgate {

// Live wiring: an alert listener (relay protocol), a switch-side OFL
// listener, and an optional in-process detector fed from packet-in frames
// whose alerts travel back over a real loopback relay connection. The
// controller loop is the single serialization point.
class LiveRuntime {
public:
    struct Ports {
        uint16_t alert_port = 0;
        uint16_t switch_port = 0;
    };

    static Result<std::unique_ptr<LiveRuntime>, std::string> start(const RunConfig& config) {
        auto whitelist = load_whitelist(config.whitelist);
        if (!whitelist.ok())
            return "whitelist: " + whitelist.error().detail;
        auto blacklist = load_blacklist(config.blacklist);
        if (!blacklist.ok())
            return "blacklist: " + blacklist.error().detail;

        std::optional<Detector> detector;
        if (config.rules) {
            std::ifstream in(*config.rules, std::ios::binary);
            if (!in) return "rules: cannot open " + config.rules->string();
            std::ostringstream text;
            text << in.rdbuf();
            auto rules = parse_rules(text.str());
            if (!rules.ok()) return "rules: " + rules.error().to_string();
            detector.emplace(std::move(rules).value());
        }

        auto endpoint = parse_endpoint(config.listen);
        if (!endpoint) return "listen: not host:port: " + config.listen;

        try {
            EventStore store = EventStore::open(config.event_store, ClockMode::Wall);
            std::unique_ptr<LiveRuntime> runtime(
                new LiveRuntime(config, std::move(whitelist).value(),
                                std::move(blacklist).value(), std::move(store),
                                std::move(detector), *endpoint));
            runtime->spawn();
            return runtime;
        } catch (const NetError& e) {
            return std::string("bind: ") + e.what();
        } catch (const PersistError& e) {
            return std::string("event store: ") + e.what();
        }
    }

    ~LiveRuntime() { stop(); }

    Ports ports() const {
        return Ports{alert_listener_->local_port(), switch_listener_.local_port()};
    }

    void stop() {
        bool expected = false;
        if (!stopping_.compare_exchange_strong(expected, true)) {
            join();
            return;
        }
        alert_listener_->stop();
        switch_listener_.shutdown();
        {
            std::lock_guard lock(switch_mutex_);
            if (switch_conn_.valid()) switch_conn_.shutdown();
        }
        join();
    }

    uint64_t alerts_handled() const { return alerts_handled_.load(); }
    uint64_t packet_ins_handled() const { return packet_ins_handled_.load(); }

    // Test hook: most recent log lines from controller decisions.
    std::vector<std::string> drain_log() {
        std::lock_guard lock(log_mutex_);
        return std::exchange(log_, {});
    }

private:
    LiveRuntime(const RunConfig& config, AccessList whitelist, AccessList blacklist,
                EventStore store, std::optional<Detector> detector, Endpoint listen)
        : store_(std::move(store)),
          controller_(make_controller_config(config), std::move(whitelist),
                      std::move(blacklist), &store_),
          detector_(std::move(detector)),
          switch_listener_(TcpListener::bind(listen.host, listen.port)),
          relay_host_("127.0.0.1") {
        alert_listener_ = std::make_unique<AlertListener>(
            "0.0.0.0", config.alert_port,
            [this](AlertWireMessage message) { on_wire_alert(std::move(message)); });
        started_ = std::chrono::steady_clock::now();
    }

    static ControllerConfig make_controller_config(const RunConfig& config) {
        ControllerConfig cc;
        cc.honeypot_port = config.honeypot_port;
        cc.mirror_port = config.mirror_port;
        cc.whitelist_path = config.whitelist;
        cc.blacklist_path = config.blacklist;
        cc.alert_port = config.alert_port;
        cc.event_store_path = config.event_store;
        cc.listen = config.listen;
        return cc;
    }

    void spawn() {
        alert_thread_ = std::thread([this] { alert_listener_->run(); });
        switch_thread_ = std::thread([this] { switch_loop(); });
    }

    void join() {
        if (alert_thread_.joinable()) alert_thread_.join();
        if (switch_thread_.joinable()) switch_thread_.join();
    }

    uint64_t wall_us() const {
        return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                         std::chrono::system_clock::now().time_since_epoch())
                                         .count());
    }

    uint64_t mono_us() const {
        return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                         std::chrono::steady_clock::now() - started_)
                                         .count());
    }

    // Alert received over the wire: rebuild the event from the embedded
    // frame (sid unknown on the wire) and run the treatment policy.
    void on_wire_alert(AlertWireMessage message) {
        AlertEvent event;
        auto parsed = parse_frame(message.frame);
        if (parsed.ok()) {
            event = alert_from_frame(message.alertmsg, 0, wall_us(), parsed.value());
        } else {
            // Frame did not parse; treat on message text alone. Zero MACs
            // select nothing in mitigation filters.
            event.cls = classify_alert(message.alertmsg);
            event.msg = message.alertmsg;
            event.timestamp = wall_us();
        }
        std::vector<ofl::FlowMod> commands;
        {
            std::lock_guard lock(controller_mutex_);
            auto reaction = controller_.on_alert(event);
            commands = std::move(reaction.commands);
            push_log(reaction.log);
        }
        send_to_switch(commands);
        ++alerts_handled_;
    }

    void switch_loop() {
        while (!stopping_.load()) {
            auto conn = switch_listener_.accept();
            if (!conn) break;
            {
                std::lock_guard lock(switch_mutex_);
                switch_conn_ = std::move(*conn);
            }
            serve_switch();
            std::lock_guard lock(switch_mutex_);
            switch_conn_.close();
        }
    }

    void serve_switch() {
        auto reconcile = reconcile_mods();
        {
            std::lock_guard lock(switch_mutex_);
            ofl::Hello hello;
            hello.xid = xids_.next();
            switch_conn_.send_all(ofl::encode(hello));
            for (const auto& mod : reconcile) switch_conn_.send_all(ofl::encode(mod));
        }
        ofl::MessageReader reader;
        uint8_t buf[8192];
        while (!stopping_.load()) {
            ssize_t n = switch_conn_.recv_some(buf, sizeof(buf));
            if (n <= 0) return;
            reader.push(std::span(buf, static_cast<size_t>(n)));
            while (auto msg = reader.next()) {
                if (!msg->ok()) return;  // protocol error: drop the connection
                handle_switch_message(msg->value());
            }
        }
    }

    std::vector<ofl::FlowMod> reconcile_mods() {
        std::lock_guard lock(controller_mutex_);
        return controller_.startup_reconcile();
    }

    void handle_switch_message(const ofl::Message& msg) {
        if (const auto* echo = std::get_if<ofl::EchoRequest>(&msg)) {
            ofl::EchoReply reply;
            reply.xid = echo->xid;
            std::lock_guard lock(switch_mutex_);
            switch_conn_.send_all(ofl::encode(reply));
            return;
        }
        if (const auto* packet_in = std::get_if<ofl::PacketInMsg>(&msg)) {
            feed_detector(*packet_in);
            std::vector<Command> commands;
            {
                std::lock_guard lock(controller_mutex_);
                auto handled = controller_.on_packet_in(*packet_in);
                commands = std::move(handled.commands);
                push_log(handled.log);
            }
            std::lock_guard lock(switch_mutex_);
            for (const auto& command : commands) {
                if (const auto* mod = std::get_if<ofl::FlowMod>(&command))
                    switch_conn_.send_all(ofl::encode(*mod));
                else if (const auto* out = std::get_if<ofl::PacketOutMsg>(&command))
                    switch_conn_.send_all(ofl::encode(*out));
            }
            ++packet_ins_handled_;
            return;
        }
        // Hello / EchoReply / unexpected switch-bound types: nothing to do.
    }

    // The in-process detector taps packet-in frame copies; its alerts take
    // the real relay path back through the alert listener.
    void feed_detector(const ofl::PacketInMsg& packet_in) {
        if (!detector_) return;
        auto parsed = parse_frame(packet_in.frame);
        if (!parsed.ok()) return;
        std::vector<AlertEvent> alerts;
        {
            std::lock_guard lock(detector_mutex_);
            alerts = detector_->process(mono_us(), parsed.value());
        }
        if (alerts.empty()) return;
        std::lock_guard lock(relay_mutex_);
        if (!relay_) {
            relay_ = std::make_unique<AlertRelayClient>(relay_host_,
                                                        alert_listener_->local_port());
        }
        for (const auto& alert : alerts) relay_->send(alert.msg, packet_in.frame);
    }

    void send_to_switch(const std::vector<ofl::FlowMod>& commands) {
        if (commands.empty()) return;
        std::lock_guard lock(switch_mutex_);
        if (!switch_conn_.valid()) return;  // no switch connected: commands dropped
        for (const auto& mod : commands) switch_conn_.send_all(ofl::encode(mod));
    }

    void push_log(const std::vector<std::string>& lines) {
        std::lock_guard lock(log_mutex_);
        log_.insert(log_.end(), lines.begin(), lines.end());
    }

    EventStore store_;
    Controller controller_;
    std::optional<Detector> detector_;
    TcpListener switch_listener_;
    std::unique_ptr<AlertListener> alert_listener_;
    std::string relay_host_;
    std::unique_ptr<AlertRelayClient> relay_;

    std::thread alert_thread_;
    std::thread switch_thread_;
    std::mutex controller_mutex_;
    std::mutex detector_mutex_;
    std::mutex switch_mutex_;
    std::mutex relay_mutex_;
    std::mutex log_mutex_;
    TcpSocket switch_conn_;
    ofl::XidAllocator xids_;
    std::vector<std::string> log_;
    std::atomic<bool> stopping_{false};
    std::atomic<uint64_t> alerts_handled_{0};
    std::atomic<uint64_t> packet_ins_handled_{0};
    std::chrono::steady_clock::time_point started_;
};

}  // namespace flowgate
