#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "flowgate/bytes.hpp"
#include "flowgate/net.hpp"
#include "flowgate/result.hpp"

namespace flowgate {

constexpr uint16_t kAlertMagic = 0x4944;
constexpr uint16_t kAlertWireVersion = 1;
constexpr size_t kAlertMsgSize = 256;
constexpr uint16_t kDefaultAlertPort = 51234;
// Sanity cap on declared payloads: alertmsg plus one maximum-size frame.
constexpr uint32_t kMaxAlertPayload = kAlertMsgSize + 65535;

enum class WireErr { MsgTooLong, BadMagic, BadVersion, BadLength, Truncated };

struct WireError {
    WireErr kind;
    std::string detail;
};

struct AlertWireMessage {
    std::string alertmsg;
    std::vector<uint8_t> frame;

    bool operator==(const AlertWireMessage&) const = default;
};

// Layout: magic u16 (0x4944), version u16 (1), payload_length u32
// (= 256 + frame length), 256-byte null-padded alertmsg, raw frame.
inline Result<std::vector<uint8_t>, WireError> encode_alert(const std::string& msg,
                                                            std::span<const uint8_t> frame) {
    if (msg.size() >= kAlertMsgSize)
        return WireError{WireErr::MsgTooLong,
                         "alertmsg needs a terminator within " + std::to_string(kAlertMsgSize) +
                             " bytes, got " + std::to_string(msg.size())};
    ByteWriter w;
    w.u16(kAlertMagic);
    w.u16(kAlertWireVersion);
    w.u32(static_cast<uint32_t>(kAlertMsgSize + frame.size()));
    w.bytes(std::span(reinterpret_cast<const uint8_t*>(msg.data()), msg.size()));
    w.zeros(kAlertMsgSize - msg.size());
    w.bytes(frame);
    return std::move(w).take();
}

inline Result<AlertWireMessage, WireError> decode_alert(std::span<const uint8_t> bytes) {
    if (bytes.size() < 8)
        return WireError{WireErr::Truncated, "need 8 header bytes, have " +
                                                 std::to_string(bytes.size())};
    ByteReader r(bytes);
    uint16_t magic = r.u16();
    if (magic != kAlertMagic)
        return WireError{WireErr::BadMagic, "magic " + std::to_string(magic)};
    uint16_t version = r.u16();
    if (version != kAlertWireVersion)
        return WireError{WireErr::BadVersion, "version " + std::to_string(version)};
    uint32_t payload_length = r.u32();
    if (payload_length < kAlertMsgSize || payload_length > kMaxAlertPayload)
        return WireError{WireErr::BadLength, "payload_length " + std::to_string(payload_length)};
    if (bytes.size() < 8 + static_cast<size_t>(payload_length))
        return WireError{WireErr::Truncated,
                         "payload_length " + std::to_string(payload_length) + ", have " +
                             std::to_string(bytes.size() - 8)};
    auto msg_bytes = r.bytes(kAlertMsgSize);
    size_t text_len = 0;
    while (text_len < kAlertMsgSize && msg_bytes[text_len] != 0) ++text_len;
    AlertWireMessage out;
    out.alertmsg.assign(reinterpret_cast<const char*>(msg_bytes.data()), text_len);
    auto frame_bytes = r.bytes(payload_length - kAlertMsgSize);
    out.frame.assign(frame_bytes.begin(), frame_bytes.end());
    return out;
}

// Incremental framing over an arbitrarily chunked stream. next() returns
// nullopt while a message is incomplete; errors leave the stream positioned
// at the offending message (callers drop the connection).
class AlertStreamDecoder {
public:
    void push(std::span<const uint8_t> data) {
        buffer_.insert(buffer_.end(), data.begin(), data.end());
    }

    std::optional<Result<AlertWireMessage, WireError>> next() {
        size_t avail = buffer_.size() - start_;
        if (avail < 8) return std::nullopt;
        std::span<const uint8_t> view(buffer_.data() + start_, avail);
        ByteReader r(view);
        uint16_t magic = r.u16();
        uint16_t version = r.u16();
        uint32_t payload_length = r.u32();
        if (magic != kAlertMagic)
            return Result<AlertWireMessage, WireError>(
                WireError{WireErr::BadMagic, "magic " + std::to_string(magic)});
        if (version != kAlertWireVersion)
            return Result<AlertWireMessage, WireError>(
                WireError{WireErr::BadVersion, "version " + std::to_string(version)});
        if (payload_length < kAlertMsgSize || payload_length > kMaxAlertPayload)
            return Result<AlertWireMessage, WireError>(WireError{
                WireErr::BadLength, "payload_length " + std::to_string(payload_length)});
        size_t total = 8 + static_cast<size_t>(payload_length);
        if (avail < total) return std::nullopt;
        auto message = decode_alert(view.subspan(0, total));
        start_ += total;
        if (start_ > 4096 || start_ == buffer_.size()) {
            buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(start_));
            start_ = 0;
        }
        return message;
    }

    size_t buffered() const { return buffer_.size() - start_; }

private:
    std::vector<uint8_t> buffer_;
    size_t start_ = 0;
};

// Fire-and-forget relay. A failed delivery drops that alert (counted) and
// the next send() re-attempts the connection; nothing is queued across
// disconnects.
class AlertRelayClient {
public:
    AlertRelayClient(std::string host, uint16_t port) : host_(std::move(host)), port_(port) {}

    bool connect_with_retry(int attempts, std::chrono::milliseconds delay) {
        for (int i = 0; i < attempts; ++i) {
            if (ensure_connected()) return true;
            if (i + 1 < attempts) std::this_thread::sleep_for(delay);
        }
        return false;
    }

    bool send(const std::string& msg, std::span<const uint8_t> frame) {
        auto encoded = encode_alert(msg, frame);
        if (!encoded.ok()) {
            ++dropped_;
            return false;
        }
        if (!ensure_connected()) {
            ++dropped_;
            return false;
        }
        if (!sock_.send_all(encoded.value())) {
            sock_.close();
            ++dropped_;
            return false;
        }
        ++delivered_;
        return true;
    }

    bool connected() const { return sock_.valid(); }
    uint64_t dropped() const { return dropped_; }
    uint64_t delivered() const { return delivered_; }
    void close() { sock_.close(); }

private:
    bool ensure_connected() {
        if (sock_.valid()) return true;
        auto sock = TcpSocket::connect(host_, port_);
        if (!sock) return false;
        sock_ = std::move(*sock);
        return true;
    }

    std::string host_;
    uint16_t port_;
    TcpSocket sock_;
    uint64_t dropped_ = 0;
    uint64_t delivered_ = 0;
};

// Accepts one relay connection at a time; survives reconnects. A partial
// trailing message at disconnect is discarded and counted; a protocol error
// drops the connection.
class AlertListener {
public:
    using Sink = std::function<void(AlertWireMessage)>;

    AlertListener(const std::string& host, uint16_t port, Sink sink)
        : listener_(TcpListener::bind(host, port)), sink_(std::move(sink)) {}

    uint16_t local_port() const { return listener_.local_port(); }

    // Blocks until stop(); usually run on a dedicated thread.
    void run() {
        while (!stopping_.load()) {
            auto conn = listener_.accept();
            if (!conn) break;
            {
                std::lock_guard lock(mutex_);
                conn_ = std::move(*conn);
            }
            serve_connection();
            std::lock_guard lock(mutex_);
            conn_.close();
        }
    }

    void stop() {
        stopping_.store(true);
        listener_.shutdown();
        std::lock_guard lock(mutex_);
        conn_.shutdown();
    }

    uint64_t messages() const { return messages_.load(); }
    uint64_t partial_discards() const { return partial_discards_.load(); }
    uint64_t protocol_errors() const { return protocol_errors_.load(); }

private:
    void serve_connection() {
        AlertStreamDecoder decoder;
        uint8_t buf[4096];
        while (!stopping_.load()) {
            ssize_t n;
            {
                std::lock_guard lock(mutex_);
                if (!conn_.valid()) return;
            }
            n = conn_.recv_some(buf, sizeof(buf));
            if (n <= 0) break;
            decoder.push(std::span(buf, static_cast<size_t>(n)));
            while (auto message = decoder.next()) {
                if (!message->ok()) {
                    ++protocol_errors_;
                    std::lock_guard lock(mutex_);
                    conn_.shutdown();
                    return;
                }
                ++messages_;
                if (sink_) sink_(std::move(*message).value());
            }
        }
        if (decoder.buffered() > 0) ++partial_discards_;
    }

    TcpListener listener_;
    Sink sink_;
    TcpSocket conn_;
    std::mutex mutex_;
    std::atomic<bool> stopping_{false};
    std::atomic<uint64_t> messages_{0};
    std::atomic<uint64_t> partial_discards_{0};
    std::atomic<uint64_t> protocol_errors_{0};
};

}  // namespace flowgate
