#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowgate/addr.hpp"
#include "flowgate/packet.hpp"
#include "flowgate/result.hpp"

namespace flowgate {

enum class RuleProto : uint8_t { Icmp, Tcp, Udp, Ip };

inline std::string_view to_string(RuleProto p) {
    switch (p) {
        case RuleProto::Icmp: return "icmp";
        case RuleProto::Tcp: return "tcp";
        case RuleProto::Udp: return "udp";
        case RuleProto::Ip: return "ip";
    }
    return "?";
}

// "any", a host address, or a network in CIDR form.
struct AddrSpec {
    std::optional<Ipv4Addr> addr;
    std::optional<uint8_t> prefix;  // only meaningful with addr

    bool is_any() const { return !addr.has_value(); }

    bool matches(const Ipv4Addr& ip) const {
        if (!addr) return true;
        if (!prefix) return ip == *addr;
        uint32_t mask = *prefix == 0 ? 0 : ~uint32_t{0} << (32 - *prefix);
        return (ip.to_u32() & mask) == (addr->to_u32() & mask);
    }

    std::string to_string() const {
        if (!addr) return "any";
        if (!prefix) return addr->to_string();
        return addr->to_string() + "/" + std::to_string(*prefix);
    }

    bool operator==(const AddrSpec&) const = default;
};

// "any" or one port number. A numeric spec never matches a packet that
// carries no port (e.g. ICMP).
struct PortSpec {
    std::optional<uint16_t> port;

    bool matches(std::optional<uint16_t> p) const { return !port || (p && *p == *port); }

    std::string to_string() const { return port ? std::to_string(*port) : "any"; }

    bool operator==(const PortSpec&) const = default;
};

struct DetectionFilter {
    enum class Track : uint8_t { BySrc, ByDst };
    Track track = Track::BySrc;
    uint32_t count = 0;
    uint32_t seconds = 0;

    bool operator==(const DetectionFilter&) const = default;
};

struct Rule {
    RuleProto proto = RuleProto::Ip;
    AddrSpec src_addr;
    PortSpec src_port;
    AddrSpec dst_addr;
    PortSpec dst_port;
    std::string msg;
    std::optional<uint8_t> itype;
    std::optional<uint8_t> flags;
    std::optional<DetectionFilter> filter;
    uint32_t sid = 0;

    bool operator==(const Rule&) const = default;
};

struct RuleError {
    enum class Kind { Syntax, DuplicateSid };
    Kind kind = Kind::Syntax;
    size_t line = 0;    // 1-based
    size_t column = 0;  // 1-based, Syntax only
    std::string expected;

    std::string to_string() const {
        std::ostringstream out;
        if (kind == Kind::DuplicateSid) {
            out << "line " << line << ": duplicate sid";
        } else {
            out << "line " << line << ":" << column << ": expected " << expected;
        }
        return out.str();
    }
};

// Canonical single-line form; parse(print_rule(r)) == r.
inline std::string print_rule(const Rule& rule) {
    std::ostringstream out;
    out << "alert " << to_string(rule.proto) << " " << rule.src_addr.to_string() << " "
        << rule.src_port.to_string() << " -> " << rule.dst_addr.to_string() << " "
        << rule.dst_port.to_string() << " (msg:\"" << rule.msg << "\"; ";
    if (rule.itype) out << "itype:" << static_cast<int>(*rule.itype) << "; ";
    if (rule.flags) out << "flags:" << tcp_flags_to_letters(*rule.flags) << "; ";
    if (rule.filter) {
        out << "detection_filter: track "
            << (rule.filter->track == DetectionFilter::Track::BySrc ? "by_src" : "by_dst")
            << ", count " << rule.filter->count << ", seconds " << rule.filter->seconds << "; ";
    }
    out << "sid:" << rule.sid << ";)";
    return out.str();
}

namespace detail {

// Cursor over one rule line; all errors carry the 1-based line/column where
// the parse stopped.
class RuleCursor {
public:
    RuleCursor(std::string_view text, size_t line) : text_(text), line_(line) {}

    RuleError err(std::string expected) const {
        return RuleError{RuleError::Kind::Syntax, line_, pos_ + 1, std::move(expected)};
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    bool consume(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    bool consume_word(std::string_view word) {
        if (text_.substr(pos_, word.size()) != word) return false;
        size_t after = pos_ + word.size();
        if (after < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[after])) ||
                                     text_[after] == '_'))
            return false;
        pos_ = after;
        return true;
    }

    // Run of characters suitable for an address/port/keyword token.
    std::string_view token() {
        size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == ':')
                ++pos_;
            else
                break;
        }
        return text_.substr(start, pos_ - start);
    }

    Result<uint64_t, RuleError> integer(std::string_view what, uint64_t max) {
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ == start) {
            pos_ = start;
            return err(std::string(what));
        }
        uint64_t value = 0;
        auto sv = text_.substr(start, pos_ - start);
        auto [_, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
        if (ec != std::errc{} || value > max) {
            pos_ = start;
            return err(std::string(what) + " in range");
        }
        return value;
    }

    size_t pos() const { return pos_; }
    void set_pos(size_t p) { pos_ = p; }
    std::string_view rest() const { return text_.substr(pos_); }

private:
    std::string_view text_;
    size_t line_;
    size_t pos_ = 0;
};

inline Result<AddrSpec, RuleError> parse_addr_spec(RuleCursor& cur) {
    cur.skip_ws();
    if (cur.consume_word("any")) return AddrSpec{};
    size_t start = cur.pos();
    auto tok = cur.token();
    auto addr = Ipv4Addr::parse(std::string(tok));
    if (!addr) {
        cur.set_pos(start);
        return cur.err("address spec (any, a.b.c.d or a.b.c.d/len)");
    }
    AddrSpec spec;
    spec.addr = *addr;
    if (cur.consume('/')) {
        auto prefix = cur.integer("prefix length", 32);
        if (!prefix.ok()) return prefix.error();
        spec.prefix = static_cast<uint8_t>(prefix.value());
    }
    return spec;
}

inline Result<PortSpec, RuleError> parse_port_spec(RuleCursor& cur) {
    cur.skip_ws();
    if (cur.consume_word("any")) return PortSpec{};
    auto port = cur.integer("port spec (any or 0-65535)", 65535);
    if (!port.ok()) return port.error();
    return PortSpec{static_cast<uint16_t>(port.value())};
}

inline Result<Rule, RuleError> parse_rule_line(std::string_view line, size_t line_no) {
    RuleCursor cur(line, line_no);
    cur.skip_ws();
    if (!cur.consume_word("alert")) return cur.err("'alert'");

    Rule rule;
    cur.skip_ws();
    if (cur.consume_word("icmp"))
        rule.proto = RuleProto::Icmp;
    else if (cur.consume_word("tcp"))
        rule.proto = RuleProto::Tcp;
    else if (cur.consume_word("udp"))
        rule.proto = RuleProto::Udp;
    else if (cur.consume_word("ip"))
        rule.proto = RuleProto::Ip;
    else
        return cur.err("protocol (icmp, tcp, udp or ip)");

    auto src_addr = parse_addr_spec(cur);
    if (!src_addr.ok()) return src_addr.error();
    rule.src_addr = src_addr.value();
    auto src_port = parse_port_spec(cur);
    if (!src_port.ok()) return src_port.error();
    rule.src_port = src_port.value();

    cur.skip_ws();
    if (!cur.consume_word("->") && !(cur.consume('-') && cur.consume('>')))
        return cur.err("'->'");

    auto dst_addr = parse_addr_spec(cur);
    if (!dst_addr.ok()) return dst_addr.error();
    rule.dst_addr = dst_addr.value();
    auto dst_port = parse_port_spec(cur);
    if (!dst_port.ok()) return dst_port.error();
    rule.dst_port = dst_port.value();

    cur.skip_ws();
    if (!cur.consume('(')) return cur.err("'('");

    bool have_msg = false, have_sid = false;
    while (true) {
        cur.skip_ws();
        if (cur.consume(')')) break;
        if (cur.consume_word("msg")) {
            if (have_msg) return cur.err("each option at most once ('msg' repeated)");
            cur.skip_ws();
            if (!cur.consume(':')) return cur.err("':' after msg");
            cur.skip_ws();
            if (!cur.consume('"')) return cur.err("'\"'");
            std::string text;
            while (cur.peek() != '"' && cur.peek() != '\0') {
                text.push_back(cur.peek());
                cur.set_pos(cur.pos() + 1);
            }
            if (!cur.consume('"')) return cur.err("closing '\"'");
            if (text.empty()) return cur.err("nonempty msg text");
            rule.msg = std::move(text);
            have_msg = true;
        } else if (cur.consume_word("itype")) {
            if (rule.itype) return cur.err("each option at most once ('itype' repeated)");
            if (rule.proto != RuleProto::Icmp) return cur.err("itype only with icmp rules");
            cur.skip_ws();
            if (!cur.consume(':')) return cur.err("':' after itype");
            cur.skip_ws();
            auto v = cur.integer("icmp type (0-255)", 255);
            if (!v.ok()) return v.error();
            rule.itype = static_cast<uint8_t>(v.value());
        } else if (cur.consume_word("flags")) {
            if (rule.flags) return cur.err("each option at most once ('flags' repeated)");
            if (rule.proto != RuleProto::Tcp) return cur.err("flags only with tcp rules");
            cur.skip_ws();
            if (!cur.consume(':')) return cur.err("':' after flags");
            cur.skip_ws();
            size_t start = cur.pos();
            std::string letters;
            while (std::isalpha(static_cast<unsigned char>(cur.peek()))) {
                letters.push_back(cur.peek());
                cur.set_pos(cur.pos() + 1);
            }
            auto mask = tcp_flags_from_letters(letters);
            if (letters.empty() || !mask) {
                cur.set_pos(start);
                return cur.err("flag letters from FSRPAU");
            }
            rule.flags = *mask;
        } else if (cur.consume_word("detection_filter")) {
            if (rule.filter)
                return cur.err("each option at most once ('detection_filter' repeated)");
            cur.skip_ws();
            if (!cur.consume(':')) return cur.err("':' after detection_filter");
            cur.skip_ws();
            if (!cur.consume_word("track")) return cur.err("'track'");
            cur.skip_ws();
            DetectionFilter filter;
            if (cur.consume_word("by_src"))
                filter.track = DetectionFilter::Track::BySrc;
            else if (cur.consume_word("by_dst"))
                filter.track = DetectionFilter::Track::ByDst;
            else
                return cur.err("'by_src' or 'by_dst'");
            cur.skip_ws();
            if (!cur.consume(',')) return cur.err("','");
            cur.skip_ws();
            if (!cur.consume_word("count")) return cur.err("'count'");
            cur.skip_ws();
            auto count = cur.integer("count (>= 1)", 0xFFFFFFFFull);
            if (!count.ok()) return count.error();
            if (count.value() == 0) return cur.err("count >= 1");
            filter.count = static_cast<uint32_t>(count.value());
            cur.skip_ws();
            if (!cur.consume(',')) return cur.err("','");
            cur.skip_ws();
            if (!cur.consume_word("seconds")) return cur.err("'seconds'");
            cur.skip_ws();
            auto seconds = cur.integer("seconds (>= 1)", 0xFFFFFFFFull);
            if (!seconds.ok()) return seconds.error();
            if (seconds.value() == 0) return cur.err("seconds >= 1");
            filter.seconds = static_cast<uint32_t>(seconds.value());
            rule.filter = filter;
        } else if (cur.consume_word("sid")) {
            if (have_sid) return cur.err("each option at most once ('sid' repeated)");
            cur.skip_ws();
            if (!cur.consume(':')) return cur.err("':' after sid");
            cur.skip_ws();
            auto v = cur.integer("sid", 0xFFFFFFFFull);
            if (!v.ok()) return v.error();
            rule.sid = static_cast<uint32_t>(v.value());
            have_sid = true;
        } else {
            return cur.err(
                "option (msg, itype, flags, detection_filter or sid) or ')'");
        }
        cur.skip_ws();
        if (!cur.consume(';')) return cur.err("';'");
    }

    if (!have_msg) return cur.err("msg option");
    if (!have_sid) return cur.err("sid option");

    if (!cur.at_end() && cur.peek() != '#') return cur.err("end of line");
    return rule;
}

}  // namespace detail

// One rule per non-comment line; '#' starts a comment.
inline Result<std::vector<Rule>, RuleError> parse_rules(std::string_view text) {
    std::vector<Rule> rules;
    std::set<uint32_t> sids;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        size_t first = line.find_first_not_of(" \t");
        if (first != std::string_view::npos && line[first] != '#') {
            auto rule = detail::parse_rule_line(line, line_no);
            if (!rule.ok()) return rule.error();
            if (!sids.insert(rule.value().sid).second)
                return RuleError{RuleError::Kind::DuplicateSid, line_no, 0, ""};
            rules.push_back(std::move(rule).value());
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return rules;
}

}  // namespace flowgate
