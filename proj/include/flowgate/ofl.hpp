#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "flowgate/addr.hpp"
#include "flowgate/bytes.hpp"
#include "flowgate/result.hpp"

// OFL: the controller<->switch wire protocol. The 8-byte header mirrors the
// OpenFlow 1.3 header (version 0x04, familiar message type numbering); the
// bodies use a compact TLV scheme so the codec is exactly invertible.
namespace flowgate::ofl {

constexpr uint8_t kVersion = 0x04;

// Pseudo-port expanded by the switch to every port except the packet's
// ingress and the mirror port.
constexpr uint32_t kFloodPort = 0xFFFFFFFB;

enum class MsgType : uint8_t {
    Hello = 0,
    EchoRequest = 2,
    EchoReply = 3,
    PacketIn = 10,
    PacketOut = 13,
    FlowMod = 14,
};

enum class FlowModCommand : uint8_t { Add = 0, Modify = 1, Delete = 3 };

enum class PacketInReason : uint8_t { NoMatch = 0 };

// Single action kind: output to a port.
struct Action {
    uint32_t port = 0;
    bool operator==(const Action&) const = default;
};

// Flow match over ingress port and MAC pair. Absent fields are wildcards;
// an entirely empty match selects everything.
struct Match {
    std::optional<uint32_t> in_port;
    std::optional<MacAddr> eth_src;
    std::optional<MacAddr> eth_dst;

    bool operator==(const Match&) const = default;

    bool empty() const { return !in_port && !eth_src && !eth_dst; }

    // Non-strict selection: every field present here must be present in
    // `entry` with an equal value.
    bool selects(const Match& entry) const {
        if (in_port && entry.in_port != in_port) return false;
        if (eth_src && entry.eth_src != eth_src) return false;
        if (eth_dst && entry.eth_dst != eth_dst) return false;
        return true;
    }

    bool matches_packet(uint32_t port, const MacAddr& src, const MacAddr& dst) const {
        if (in_port && *in_port != port) return false;
        if (eth_src && *eth_src != src) return false;
        if (eth_dst && *eth_dst != dst) return false;
        return true;
    }

    bool involves_mac(const MacAddr& mac) const {
        return (eth_src && *eth_src == mac) || (eth_dst && *eth_dst == mac);
    }

    std::string to_string() const {
        if (empty()) return "*";
        std::ostringstream out;
        const char* sep = "";
        if (in_port) {
            out << sep << "in_port=" << *in_port;
            sep = ",";
        }
        if (eth_src) {
            out << sep << "eth_src=" << eth_src->to_string();
            sep = ",";
        }
        if (eth_dst) out << sep << "eth_dst=" << eth_dst->to_string();
        return out.str();
    }
};

struct Hello {
    uint32_t xid = 0;
    bool operator==(const Hello&) const = default;
};

struct EchoRequest {
    uint32_t xid = 0;
    bool operator==(const EchoRequest&) const = default;
};

struct EchoReply {
    uint32_t xid = 0;
    bool operator==(const EchoReply&) const = default;
};

struct PacketInMsg {
    uint32_t xid = 0;
    uint32_t in_port = 0;
    PacketInReason reason = PacketInReason::NoMatch;
    std::vector<uint8_t> frame;
    bool operator==(const PacketInMsg&) const = default;
};

struct PacketOutMsg {
    uint32_t xid = 0;
    uint32_t in_port = 0;
    std::vector<Action> actions;  // empty = deliberate drop
    std::vector<uint8_t> frame;
    bool operator==(const PacketOutMsg&) const = default;
};

struct FlowMod {
    uint32_t xid = 0;
    uint64_t cookie = 0;
    FlowModCommand command = FlowModCommand::Add;
    uint16_t priority = 0;
    Match match;
    std::vector<Action> actions;  // empty = drop
    bool operator==(const FlowMod&) const = default;
};

using Message =
    std::variant<Hello, EchoRequest, EchoReply, PacketInMsg, PacketOutMsg, FlowMod>;

inline uint32_t xid_of(const Message& m) {
    return std::visit([](const auto& msg) { return msg.xid; }, m);
}

enum class DecodeErr {
    BadMagicVersion,
    LengthMismatch,
    UnknownType,
    TruncatedBody,
    DuplicateMatchField,
};

struct DecodeError {
    DecodeErr kind;
    std::string detail;
};

inline const char* to_string(DecodeErr e) {
    switch (e) {
        case DecodeErr::BadMagicVersion: return "BadMagicVersion";
        case DecodeErr::LengthMismatch: return "LengthMismatch";
        case DecodeErr::UnknownType: return "UnknownType";
        case DecodeErr::TruncatedBody: return "TruncatedBody";
        case DecodeErr::DuplicateMatchField: return "DuplicateMatchField";
    }
    return "?";
}

namespace detail {

constexpr uint16_t kFieldInPort = 1;
constexpr uint16_t kFieldEthSrc = 2;
constexpr uint16_t kFieldEthDst = 3;
constexpr uint16_t kActionOutput = 1;

inline void write_match(ByteWriter& w, const Match& m) {
    if (m.in_port) {
        w.u16(kFieldInPort);
        w.u16(4);
        w.u32(*m.in_port);
    }
    if (m.eth_src) {
        w.u16(kFieldEthSrc);
        w.u16(6);
        w.bytes(std::span<const uint8_t>(m.eth_src->octets));
    }
    if (m.eth_dst) {
        w.u16(kFieldEthDst);
        w.u16(6);
        w.bytes(std::span<const uint8_t>(m.eth_dst->octets));
    }
}

inline void write_actions(ByteWriter& w, const std::vector<Action>& actions) {
    for (const auto& a : actions) {
        w.u16(kActionOutput);
        w.u16(4);
        w.u32(a.port);
    }
}

inline Result<Match, DecodeError> read_match(ByteReader& r, std::size_t match_len) {
    Match m;
    std::size_t end = r.position() + match_len;
    while (r.position() < end) {
        if (end - r.position() < 4)
            return DecodeError{DecodeErr::TruncatedBody, "partial match TLV header"};
        uint16_t field = r.u16();
        uint16_t len = r.u16();
        if (end - r.position() < len)
            return DecodeError{DecodeErr::TruncatedBody, "match TLV value past section end"};
        switch (field) {
            case kFieldInPort: {
                if (len != 4) return DecodeError{DecodeErr::LengthMismatch, "in_port TLV length"};
                if (m.in_port)
                    return DecodeError{DecodeErr::DuplicateMatchField, "in_port appears twice"};
                m.in_port = r.u32();
                break;
            }
            case kFieldEthSrc:
            case kFieldEthDst: {
                if (len != 6) return DecodeError{DecodeErr::LengthMismatch, "MAC TLV length"};
                auto& slot = field == kFieldEthSrc ? m.eth_src : m.eth_dst;
                if (slot)
                    return DecodeError{DecodeErr::DuplicateMatchField,
                                       field == kFieldEthSrc ? "eth_src appears twice"
                                                             : "eth_dst appears twice"};
                MacAddr mac;
                for (auto& o : mac.octets) o = r.u8();
                slot = mac;
                break;
            }
            default:
                return DecodeError{DecodeErr::UnknownType, "unknown match field id"};
        }
    }
    return m;
}

inline Result<std::vector<Action>, DecodeError> read_actions(ByteReader& r, std::size_t end) {
    std::vector<Action> actions;
    while (r.position() < end) {
        if (end - r.position() < 4)
            return DecodeError{DecodeErr::TruncatedBody, "partial action TLV header"};
        uint16_t type = r.u16();
        uint16_t len = r.u16();
        if (type != kActionOutput)
            return DecodeError{DecodeErr::UnknownType, "unknown action type"};
        if (len != 4) return DecodeError{DecodeErr::LengthMismatch, "output action length"};
        if (end - r.position() < 4)
            return DecodeError{DecodeErr::TruncatedBody, "action value past message end"};
        actions.push_back(Action{r.u32()});
    }
    return actions;
}

}  // namespace detail

inline std::vector<uint8_t> encode(const Message& msg) {
    ByteWriter w;
    w.u8(kVersion);
    w.u8(static_cast<uint8_t>(std::visit(
        [](const auto& m) -> MsgType {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Hello>) return MsgType::Hello;
            if constexpr (std::is_same_v<T, EchoRequest>) return MsgType::EchoRequest;
            if constexpr (std::is_same_v<T, EchoReply>) return MsgType::EchoReply;
            if constexpr (std::is_same_v<T, PacketInMsg>) return MsgType::PacketIn;
            if constexpr (std::is_same_v<T, PacketOutMsg>) return MsgType::PacketOut;
            if constexpr (std::is_same_v<T, FlowMod>) return MsgType::FlowMod;
        },
        msg)));
    w.u16(0);  // length, patched below
    w.u32(xid_of(msg));

    if (auto* pin = std::get_if<PacketInMsg>(&msg)) {
        w.u32(pin->in_port);
        w.u8(static_cast<uint8_t>(pin->reason));
        w.zeros(3);
        w.bytes(pin->frame);
    } else if (auto* pout = std::get_if<PacketOutMsg>(&msg)) {
        w.u32(pout->in_port);
        std::size_t len_at = w.size();
        w.u16(0);  // actions_len, patched below
        w.zeros(2);
        std::size_t actions_start = w.size();
        detail::write_actions(w, pout->actions);
        w.patch_u16(len_at, static_cast<uint16_t>(w.size() - actions_start));
        w.bytes(pout->frame);
    } else if (auto* fm = std::get_if<FlowMod>(&msg)) {
        w.u64(fm->cookie);
        w.u8(static_cast<uint8_t>(fm->command));
        w.u16(fm->priority);
        w.zeros(5);
        std::size_t len_at = w.size();
        w.u16(0);  // match_len, patched below
        std::size_t match_start = w.size();
        detail::write_match(w, fm->match);
        w.patch_u16(len_at, static_cast<uint16_t>(w.size() - match_start));
        detail::write_actions(w, fm->actions);
    }

    w.patch_u16(2, static_cast<uint16_t>(w.size()));
    return w.take();
}

// Decodes exactly one message. The span must hold the complete message;
// trailing bytes beyond the declared length are left untouched.
inline Result<Message, DecodeError> decode(std::span<const uint8_t> bytes) {
    if (bytes.size() < 8)
        return DecodeError{DecodeErr::TruncatedBody, "fewer than 8 header bytes"};
    if (bytes[0] != kVersion)
        return DecodeError{DecodeErr::BadMagicVersion, "bad version byte"};
    uint16_t length = static_cast<uint16_t>(bytes[2] << 8 | bytes[3]);
    if (length < 8) return DecodeError{DecodeErr::LengthMismatch, "declared length below 8"};
    if (length > bytes.size())
        return DecodeError{DecodeErr::TruncatedBody, "declared length exceeds available bytes"};

    ByteReader r(bytes.first(length));
    r.skip(1);
    uint8_t type = r.u8();
    r.skip(2);
    uint32_t xid = r.u32();

    switch (static_cast<MsgType>(type)) {
        case MsgType::Hello:
        case MsgType::EchoRequest:
        case MsgType::EchoReply: {
            if (length != 8)
                return DecodeError{DecodeErr::LengthMismatch, "body on a header-only message"};
            if (type == static_cast<uint8_t>(MsgType::Hello)) return Message{Hello{xid}};
            if (type == static_cast<uint8_t>(MsgType::EchoRequest))
                return Message{EchoRequest{xid}};
            return Message{EchoReply{xid}};
        }
        case MsgType::PacketIn: {
            if (r.remaining() < 8)
                return DecodeError{DecodeErr::TruncatedBody, "PacketIn fixed body"};
            PacketInMsg m;
            m.xid = xid;
            m.in_port = r.u32();
            m.reason = static_cast<PacketInReason>(r.u8());
            r.skip(3);
            m.frame = r.bytes(r.remaining());
            return Message{std::move(m)};
        }
        case MsgType::PacketOut: {
            if (r.remaining() < 8)
                return DecodeError{DecodeErr::TruncatedBody, "PacketOut fixed body"};
            PacketOutMsg m;
            m.xid = xid;
            m.in_port = r.u32();
            uint16_t actions_len = r.u16();
            r.skip(2);
            if (r.remaining() < actions_len)
                return DecodeError{DecodeErr::TruncatedBody, "actions section past message end"};
            auto actions = detail::read_actions(r, r.position() + actions_len);
            if (!actions.ok()) return actions.error();
            m.actions = std::move(actions).value();
            m.frame = r.bytes(r.remaining());
            return Message{std::move(m)};
        }
        case MsgType::FlowMod: {
            if (r.remaining() < 18)
                return DecodeError{DecodeErr::TruncatedBody, "FlowMod fixed body"};
            FlowMod m;
            m.xid = xid;
            m.cookie = r.u64();
            m.command = static_cast<FlowModCommand>(r.u8());
            if (m.command != FlowModCommand::Add && m.command != FlowModCommand::Modify &&
                m.command != FlowModCommand::Delete)
                return DecodeError{DecodeErr::UnknownType, "unknown FlowMod command"};
            m.priority = r.u16();
            r.skip(5);
            uint16_t match_len = r.u16();
            if (r.remaining() < match_len)
                return DecodeError{DecodeErr::TruncatedBody, "match section past message end"};
            auto match = detail::read_match(r, match_len);
            if (!match.ok()) return match.error();
            m.match = std::move(match).value();
            auto actions = detail::read_actions(r, length);
            if (!actions.ok()) return actions.error();
            m.actions = std::move(actions).value();
            return Message{std::move(m)};
        }
        default:
            return DecodeError{DecodeErr::UnknownType, "unknown message type"};
    }
}

// Incremental framer for a byte stream. On a decode error the read position
// stays at the start of the failed message so the caller can resynchronize
// (e.g. by skipping one byte and retrying).
class MessageReader {
public:
    void push(std::span<const uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

    // nullopt = need more bytes. A returned error does not consume input.
    std::optional<Result<Message, DecodeError>> next() {
        compact();
        std::size_t avail = buf_.size() - start_;
        if (avail < 8) return std::nullopt;
        std::span<const uint8_t> view(buf_.data() + start_, avail);
        if (view[0] != kVersion)
            return Result<Message, DecodeError>(
                DecodeError{DecodeErr::BadMagicVersion, "bad version byte"});
        uint16_t length = static_cast<uint16_t>(view[2] << 8 | view[3]);
        if (length < 8)
            return Result<Message, DecodeError>(
                DecodeError{DecodeErr::LengthMismatch, "declared length below 8"});
        if (avail < length) return std::nullopt;
        auto result = decode(view.first(length));
        if (result.ok()) start_ += length;
        return result;
    }

    // Skips bytes without decoding; resynchronization aid after an error.
    void skip(std::size_t n) { start_ = std::min(start_ + n, buf_.size()); }

    std::size_t buffered() const { return buf_.size() - start_; }

private:
    void compact() {
        if (start_ > 4096) {
            buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(start_));
            start_ = 0;
        }
    }

    std::vector<uint8_t> buf_;
    std::size_t start_ = 0;
};

// Per-connection transaction id source; starts at 1 for deterministic logs.
class XidAllocator {
public:
    uint32_t next() { return next_++; }

private:
    uint32_t next_ = 1;
};

}  // namespace flowgate::ofl
