#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowgate/addr.hpp"
#include "flowgate/bytes.hpp"
#include "flowgate/result.hpp"

namespace flowgate {

constexpr uint16_t kEtherIpv4 = 0x0800;
constexpr uint8_t kProtoIcmp = 1;
constexpr uint8_t kProtoTcp = 6;
constexpr uint8_t kProtoUdp = 17;
constexpr std::size_t kDefaultMtu = 1500;

constexpr uint8_t kTcpFin = 0x01;
constexpr uint8_t kTcpSyn = 0x02;
constexpr uint8_t kTcpRst = 0x04;
constexpr uint8_t kTcpPsh = 0x08;
constexpr uint8_t kTcpAck = 0x10;
constexpr uint8_t kTcpUrg = 0x20;

// FIN|PSH|URG, the XMAS probe signature.
constexpr uint8_t kTcpXmasFlags = kTcpFin | kTcpPsh | kTcpUrg;

inline std::optional<uint8_t> tcp_flags_from_letters(std::string_view letters) {
    uint8_t flags = 0;
    for (char c : letters) {
        switch (c) {
            case 'F': flags |= kTcpFin; break;
            case 'S': flags |= kTcpSyn; break;
            case 'R': flags |= kTcpRst; break;
            case 'P': flags |= kTcpPsh; break;
            case 'A': flags |= kTcpAck; break;
            case 'U': flags |= kTcpUrg; break;
            default: return std::nullopt;
        }
    }
    return flags;
}

// Inverse of tcp_flags_from_letters for the low six flag bits.
inline std::string tcp_flags_to_letters(uint8_t flags) {
    static constexpr char kLetters[] = {'F', 'S', 'R', 'P', 'A', 'U'};
    std::string out;
    for (int bit = 0; bit < 6; ++bit)
        if (flags & (1u << bit)) out.push_back(kLetters[bit]);
    return out;
}

// RFC 1071 ones-complement checksum over big-endian 16-bit words.
inline uint16_t inet_checksum(std::span<const uint8_t> data) {
    uint32_t sum = 0;
    std::size_t i = 0;
    for (; i + 1 < data.size(); i += 2) sum += static_cast<uint32_t>(data[i]) << 8 | data[i + 1];
    if (i < data.size()) sum += static_cast<uint32_t>(data[i]) << 8;
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<uint16_t>(~sum & 0xffff);
}

// A checksummed region verifies iff summing it (checksum included) folds to zero.
inline bool checksum_verifies(std::span<const uint8_t> data) { return inet_checksum(data) == 0; }

struct IcmpEcho {
    uint8_t icmp_type = 8;  // 8 = echo request, 0 = echo reply
    uint8_t code = 0;
    uint16_t checksum = 0;
    uint16_t identifier = 0;
    uint16_t sequence = 0;
    std::vector<uint8_t> data;

    bool operator==(const IcmpEcho&) const = default;
};

struct TcpSegment {
    uint16_t src_port = 0;
    uint16_t dst_port = 0;
    uint32_t seq = 0;
    uint32_t ack = 0;
    uint8_t data_offset = 5;  // 32-bit words, 5 = no options
    uint8_t flags = 0;
    uint16_t window = 0;
    uint16_t checksum = 0;
    uint16_t urgent_ptr = 0;
    std::vector<uint8_t> options;  // length (data_offset - 5) * 4
    std::vector<uint8_t> payload;

    bool operator==(const TcpSegment&) const = default;
};

struct Ipv4Packet {
    uint8_t version = 4;
    uint8_t header_length = 5;  // 32-bit words; options unsupported, fixed 5
    uint8_t tos = 0;
    uint16_t total_length = 0;
    uint16_t identification = 0;
    uint8_t flags = 0;  // 3-bit
    uint16_t offset = 0;
    uint8_t ttl = 64;
    uint8_t proto = 0;
    uint16_t header_checksum = 0;
    Ipv4Addr src;
    Ipv4Addr dst;
    std::variant<std::vector<uint8_t>, IcmpEcho, TcpSegment> payload;

    bool operator==(const Ipv4Packet&) const = default;

    const IcmpEcho* icmp() const { return std::get_if<IcmpEcho>(&payload); }
    const TcpSegment* tcp() const { return std::get_if<TcpSegment>(&payload); }
};

struct EthernetFrame {
    MacAddr dst;
    MacAddr src;
    uint16_t ethertype = 0;
    std::variant<std::vector<uint8_t>, Ipv4Packet> payload;

    bool operator==(const EthernetFrame&) const = default;

    const Ipv4Packet* ipv4() const { return std::get_if<Ipv4Packet>(&payload); }
    Ipv4Packet* ipv4() { return std::get_if<Ipv4Packet>(&payload); }
};

enum class ParseErr { Truncated, BadVersion };

struct ParseFailure {
    ParseErr kind;
    std::string detail;
};

struct OversizeFrame : std::runtime_error {
    explicit OversizeFrame(std::size_t size)
        : std::runtime_error("frame payload of " + std::to_string(size) + " bytes exceeds MTU") {}
};

namespace detail {

inline std::vector<uint8_t> serialize_icmp(const IcmpEcho& e, bool recompute_checksum) {
    ByteWriter w;
    w.u8(e.icmp_type);
    w.u8(e.code);
    w.u16(recompute_checksum ? 0 : e.checksum);
    w.u16(e.identifier);
    w.u16(e.sequence);
    w.bytes(e.data);
    auto out = w.take();
    if (recompute_checksum) {
        uint16_t sum = inet_checksum(out);
        out[2] = static_cast<uint8_t>(sum >> 8);
        out[3] = static_cast<uint8_t>(sum);
    }
    return out;
}

inline std::vector<uint8_t> serialize_tcp(const TcpSegment& t, bool recompute_checksum,
                                          const Ipv4Addr& src, const Ipv4Addr& dst) {
    uint8_t data_offset = static_cast<uint8_t>(5 + t.options.size() / 4);
    ByteWriter w;
    w.u16(t.src_port);
    w.u16(t.dst_port);
    w.u32(t.seq);
    w.u32(t.ack);
    w.u8(static_cast<uint8_t>(data_offset << 4));
    w.u8(t.flags);
    w.u16(t.window);
    w.u16(recompute_checksum ? 0 : t.checksum);
    w.u16(t.urgent_ptr);
    w.bytes(t.options);
    w.bytes(t.payload);
    auto out = w.take();
    if (recompute_checksum) {
        // Pseudo-header: src, dst, zero, proto, tcp length.
        ByteWriter pseudo;
        pseudo.bytes(std::span<const uint8_t>(src.octets));
        pseudo.bytes(std::span<const uint8_t>(dst.octets));
        pseudo.u8(0);
        pseudo.u8(kProtoTcp);
        pseudo.u16(static_cast<uint16_t>(out.size()));
        pseudo.bytes(out);
        uint16_t sum = inet_checksum(pseudo.data());
        out[16] = static_cast<uint8_t>(sum >> 8);
        out[17] = static_cast<uint8_t>(sum);
    }
    return out;
}

inline std::vector<uint8_t> serialize_ipv4(const Ipv4Packet& p, bool recompute) {
    std::vector<uint8_t> body;
    if (auto* icmp = std::get_if<IcmpEcho>(&p.payload)) {
        body = serialize_icmp(*icmp, recompute);
    } else if (auto* tcp = std::get_if<TcpSegment>(&p.payload)) {
        body = serialize_tcp(*tcp, recompute, p.src, p.dst);
    } else {
        body = std::get<std::vector<uint8_t>>(p.payload);
    }

    uint16_t total_length =
        recompute ? static_cast<uint16_t>(20 + body.size()) : p.total_length;
    ByteWriter w;
    w.u8(static_cast<uint8_t>(p.version << 4 | (recompute ? 5 : p.header_length)));
    w.u8(p.tos);
    w.u16(total_length);
    w.u16(p.identification);
    w.u16(static_cast<uint16_t>((p.flags & 0x7) << 13 | (p.offset & 0x1fff)));
    w.u8(p.ttl);
    w.u8(p.proto);
    w.u16(recompute ? 0 : p.header_checksum);
    w.bytes(std::span<const uint8_t>(p.src.octets));
    w.bytes(std::span<const uint8_t>(p.dst.octets));
    auto out = w.take();
    if (recompute) {
        uint16_t sum = inet_checksum(out);
        out[10] = static_cast<uint8_t>(sum >> 8);
        out[11] = static_cast<uint8_t>(sum);
    }
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

}  // namespace detail

// Serializes a frame to wire bytes. Length and checksum fields are
// recomputed from the actual layer contents; all other fields are emitted
// as stored. Throws OversizeFrame when the Ethernet payload exceeds mtu.
inline std::vector<uint8_t> build_frame(const EthernetFrame& frame,
                                        std::size_t mtu = kDefaultMtu) {
    std::vector<uint8_t> body;
    if (auto* ip = std::get_if<Ipv4Packet>(&frame.payload)) {
        body = detail::serialize_ipv4(*ip, true);
    } else {
        body = std::get<std::vector<uint8_t>>(frame.payload);
    }
    if (body.size() > mtu) throw OversizeFrame(body.size());

    ByteWriter w;
    w.bytes(std::span<const uint8_t>(frame.dst.octets));
    w.bytes(std::span<const uint8_t>(frame.src.octets));
    w.u16(frame.ethertype);
    w.bytes(body);
    return w.take();
}

// Rewrites the derived fields (version/header_length, total_length, all
// checksums) in place so that the stored values match what build_frame
// emits. Construct a frame, then finalize it once.
inline void finalize(EthernetFrame& frame) {
    auto* ip = frame.ipv4();
    if (!ip) return;
    ip->version = 4;
    ip->header_length = 5;
    if (auto* tcp = std::get_if<TcpSegment>(&ip->payload)) {
        while (tcp->options.size() % 4 != 0) tcp->options.push_back(0);
        tcp->data_offset = static_cast<uint8_t>(5 + tcp->options.size() / 4);
    }
    auto bytes = detail::serialize_ipv4(*ip, true);
    ip->total_length = static_cast<uint16_t>(bytes[2] << 8 | bytes[3]);
    ip->header_checksum = static_cast<uint16_t>(bytes[10] << 8 | bytes[11]);
    if (auto* icmp = std::get_if<IcmpEcho>(&ip->payload))
        icmp->checksum = static_cast<uint16_t>(bytes[22] << 8 | bytes[23]);
    else if (auto* tcp = std::get_if<TcpSegment>(&ip->payload))
        tcp->checksum = static_cast<uint16_t>(bytes[36] << 8 | bytes[37]);
}

namespace detail {

inline Result<Ipv4Packet, ParseFailure> parse_ipv4(std::span<const uint8_t> data) {
    if (data.size() < 20)
        return ParseFailure{ParseErr::Truncated, "IPv4 header needs 20 bytes"};
    uint8_t version = data[0] >> 4;
    uint8_t ihl = data[0] & 0x0f;
    if (version != 4)
        return ParseFailure{ParseErr::BadVersion, "IPv4 version is not 4"};
    if (ihl != 5)
        return ParseFailure{ParseErr::BadVersion, "IPv4 options unsupported (IHL must be 5)"};

    ByteReader r(data);
    Ipv4Packet p;
    r.skip(1);
    p.version = version;
    p.header_length = ihl;
    p.tos = r.u8();
    p.total_length = r.u16();
    p.identification = r.u16();
    uint16_t flags_offset = r.u16();
    p.flags = static_cast<uint8_t>(flags_offset >> 13);
    p.offset = flags_offset & 0x1fff;
    p.ttl = r.u8();
    p.proto = r.u8();
    p.header_checksum = r.u16();
    for (auto& o : p.src.octets) o = r.u8();
    for (auto& o : p.dst.octets) o = r.u8();

    if (p.total_length < 20)
        return ParseFailure{ParseErr::Truncated, "total_length below header size"};
    if (p.total_length > data.size())
        return ParseFailure{ParseErr::Truncated, "total_length exceeds available bytes"};
    // Bytes past total_length are link-layer padding and are dropped.
    std::span<const uint8_t> body = data.subspan(20, p.total_length - 20);

    if (p.proto == kProtoIcmp && body.size() >= 8 && (body[0] == 0 || body[0] == 8)) {
        ByteReader br(body);
        IcmpEcho e;
        e.icmp_type = br.u8();
        e.code = br.u8();
        e.checksum = br.u16();
        e.identifier = br.u16();
        e.sequence = br.u16();
        e.data = br.bytes(br.remaining());
        p.payload = std::move(e);
    } else if (p.proto == kProtoTcp && body.size() >= 20 && (body[12] >> 4) >= 5 &&
               static_cast<std::size_t>((body[12] >> 4) * 4) <= body.size()) {
        ByteReader br(body);
        TcpSegment t;
        t.src_port = br.u16();
        t.dst_port = br.u16();
        t.seq = br.u32();
        t.ack = br.u32();
        t.data_offset = br.u8() >> 4;
        t.flags = br.u8();
        t.window = br.u16();
        t.checksum = br.u16();
        t.urgent_ptr = br.u16();
        t.options = br.bytes(static_cast<std::size_t>(t.data_offset - 5) * 4);
        t.payload = br.bytes(br.remaining());
        p.payload = std::move(t);
    } else {
        p.payload = std::vector<uint8_t>(body.begin(), body.end());
    }
    return p;
}

}  // namespace detail

// Decodes wire bytes into an EthernetFrame, descending into IPv4/ICMP/TCP
// where the ethertype and protocol fields indicate. Payloads that are not
// recognized stay as opaque bytes.
inline Result<EthernetFrame, ParseFailure> parse_frame(std::span<const uint8_t> bytes) {
    if (bytes.size() < 14)
        return ParseFailure{ParseErr::Truncated, "Ethernet header needs 14 bytes"};
    EthernetFrame f;
    ByteReader r(bytes);
    for (auto& o : f.dst.octets) o = r.u8();
    for (auto& o : f.src.octets) o = r.u8();
    f.ethertype = r.u16();
    std::span<const uint8_t> body = bytes.subspan(14);
    if (f.ethertype == kEtherIpv4) {
        auto ip = detail::parse_ipv4(body);
        if (!ip.ok()) return ip.error();
        f.payload = std::move(ip).value();
    } else {
        f.payload = std::vector<uint8_t>(body.begin(), body.end());
    }
    return f;
}

// Convenience accessors for the fixed MAC offsets of an Ethernet header;
// used on paths that must not pay for a full parse.
inline std::optional<MacAddr> frame_src_mac(std::span<const uint8_t> bytes) {
    if (bytes.size() < 14) return std::nullopt;
    MacAddr m;
    for (int i = 0; i < 6; ++i) m.octets[i] = bytes[6 + i];
    return m;
}

inline std::optional<MacAddr> frame_dst_mac(std::span<const uint8_t> bytes) {
    if (bytes.size() < 14) return std::nullopt;
    MacAddr m;
    for (int i = 0; i < 6; ++i) m.octets[i] = bytes[i];
    return m;
}

}  // namespace flowgate
