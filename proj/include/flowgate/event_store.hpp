#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flowgate/addr.hpp"
#include "flowgate/errors.hpp"

namespace flowgate {

enum class ActionTaken { Stored, Rewritten, Dropped, Blacklisted, Warned };

inline const char* to_string(ActionTaken a) {
    switch (a) {
        case ActionTaken::Stored: return "stored";
        case ActionTaken::Rewritten: return "rewritten";
        case ActionTaken::Dropped: return "dropped";
        case ActionTaken::Blacklisted: return "blacklisted";
        case ActionTaken::Warned: return "warned";
    }
    return "?";
}

inline std::optional<ActionTaken> action_from_string(std::string_view s) {
    if (s == "stored") return ActionTaken::Stored;
    if (s == "rewritten") return ActionTaken::Rewritten;
    if (s == "dropped") return ActionTaken::Dropped;
    if (s == "blacklisted") return ActionTaken::Blacklisted;
    if (s == "warned") return ActionTaken::Warned;
    return std::nullopt;
}

// The forensic record persisted per alert, including what was done about it.
struct StoredEvent {
    uint64_t seq = 0;  // assigned by the store
    uint64_t ts = 0;
    std::optional<int> cls;
    std::string msg;
    uint32_t sid = 0;
    MacAddr src_mac;
    MacAddr dst_mac;
    Ipv4Addr src_ip;
    Ipv4Addr dst_ip;
    uint8_t proto = 0;
    std::vector<ActionTaken> action_taken;

    bool operator==(const StoredEvent&) const = default;
};

enum class ClockMode { Virtual, Wall };

// Append-only event log: one self-describing record per line, a '#' header
// line carrying the clock mode. A record is durable once its newline is on
// disk; reload drops at most one partial trailing line.
class EventStore {
public:
    struct Filter {
        std::optional<int> cls;
        std::optional<MacAddr> src_mac;
        std::optional<std::pair<uint64_t, uint64_t>> time_range;  // [from, to] inclusive
        std::optional<ActionTaken> action;
    };

    static EventStore open(const std::filesystem::path& path,
                           ClockMode mode = ClockMode::Virtual) {
        EventStore store;
        store.path_ = path;
        store.mode_ = mode;
        if (std::filesystem::exists(path)) store.reload();
        if (store.discarded_partial_ > 0) {
            // Drop the partial tail on disk too, or the next append would
            // glue itself onto the half-written line.
            std::error_code ec;
            std::filesystem::resize_file(path, store.valid_bytes_, ec);
            if (ec) throw PersistError("cannot truncate partial record in " + path.string());
        }
        store.out_.open(path, std::ios::app);
        if (!store.out_) throw PersistError("cannot open event store " + path.string());
        if (store.file_was_empty_) {
            store.out_ << "# flowgate-events v1 clock="
                       << (store.mode_ == ClockMode::Virtual ? "virtual" : "wall") << '\n';
            store.out_.flush();
            if (!store.out_) throw PersistError("cannot write event store header");
        }
        return store;
    }

    const std::filesystem::path& path() const { return path_; }
    ClockMode clock_mode() const { return mode_; }
    std::size_t discarded_partial() const { return discarded_partial_; }
    const std::vector<StoredEvent>& all() const { return events_; }

    uint64_t append(StoredEvent event) {
        event.seq = next_seq_;
        out_ << format_record(event) << '\n';
        out_.flush();
        if (!out_) throw PersistError("append failed for " + path_.string());
        ++next_seq_;
        events_.push_back(std::move(event));
        return events_.back().seq;
    }

    std::vector<StoredEvent> query(const Filter& f) const {
        std::vector<StoredEvent> out;
        for (const auto& e : events_) {
            if (f.cls && e.cls != f.cls) continue;
            if (f.src_mac && !(e.src_mac == *f.src_mac)) continue;
            if (f.time_range && (e.ts < f.time_range->first || e.ts > f.time_range->second))
                continue;
            if (f.action) {
                bool has = false;
                for (auto a : e.action_taken) has = has || a == *f.action;
                if (!has) continue;
            }
            out.push_back(e);
        }
        return out;
    }

    // Count per class; records without a class are keyed under 0.
    std::map<int, std::size_t> stats() const {
        std::map<int, std::size_t> counts;
        for (const auto& e : events_) ++counts[e.cls.value_or(0)];
        return counts;
    }

    static std::string format_record(const StoredEvent& e) {
        std::ostringstream out;
        out << "seq=" << e.seq << " ts=" << e.ts << " class=";
        if (e.cls)
            out << *e.cls;
        else
            out << '-';
        out << " sid=" << e.sid << " proto=" << static_cast<int>(e.proto)
            << " src_mac=" << e.src_mac.to_string() << " dst_mac=" << e.dst_mac.to_string()
            << " src_ip=" << e.src_ip.to_string() << " dst_ip=" << e.dst_ip.to_string()
            << " actions=";
        const char* sep = "";
        for (auto a : e.action_taken) {
            out << sep << to_string(a);
            sep = ",";
        }
        out << " msg=\"" << escape(e.msg) << '"';
        return out.str();
    }

    static std::optional<StoredEvent> parse_record(const std::string& line) {
        StoredEvent e;
        std::size_t pos = 0;
        auto expect_key = [&](std::string_view key) -> std::optional<std::string> {
            if (pos + key.size() + 1 > line.size() || line.compare(pos, key.size(), key) != 0 ||
                line[pos + key.size()] != '=')
                return std::nullopt;
            pos += key.size() + 1;
            std::size_t end = line.find(' ', pos);
            if (end == std::string::npos) end = line.size();
            auto value = line.substr(pos, end - pos);
            pos = end < line.size() ? end + 1 : end;
            return value;
        };
        try {
            auto seq = expect_key("seq");
            auto ts = expect_key("ts");
            auto cls = expect_key("class");
            auto sid = expect_key("sid");
            auto proto = expect_key("proto");
            auto src_mac = expect_key("src_mac");
            auto dst_mac = expect_key("dst_mac");
            auto src_ip = expect_key("src_ip");
            auto dst_ip = expect_key("dst_ip");
            auto actions = expect_key("actions");
            if (!seq || !ts || !cls || !sid || !proto || !src_mac || !dst_mac || !src_ip ||
                !dst_ip || !actions)
                return std::nullopt;
            e.seq = std::stoull(*seq);
            e.ts = std::stoull(*ts);
            if (*cls != "-") e.cls = std::stoi(*cls);
            e.sid = static_cast<uint32_t>(std::stoul(*sid));
            e.proto = static_cast<uint8_t>(std::stoi(*proto));
            auto sm = MacAddr::parse(*src_mac);
            auto dm = MacAddr::parse(*dst_mac);
            auto si = Ipv4Addr::parse(*src_ip);
            auto di = Ipv4Addr::parse(*dst_ip);
            if (!sm || !dm || !si || !di) return std::nullopt;
            e.src_mac = *sm;
            e.dst_mac = *dm;
            e.src_ip = *si;
            e.dst_ip = *di;
            std::istringstream alist(*actions);
            std::string item;
            while (std::getline(alist, item, ',')) {
                auto a = action_from_string(item);
                if (!a) return std::nullopt;
                e.action_taken.push_back(*a);
            }
            if (e.action_taken.empty()) return std::nullopt;
        } catch (...) {
            return std::nullopt;
        }
        if (line.compare(pos, 5, "msg=\"") != 0) return std::nullopt;
        pos += 5;
        std::string msg;
        bool closed = false;
        while (pos < line.size()) {
            char c = line[pos++];
            if (c == '\\' && pos < line.size()) {
                char esc = line[pos++];
                msg.push_back(esc == 'n' ? '\n' : esc);
            } else if (c == '"') {
                closed = true;
                break;
            } else {
                msg.push_back(c);
            }
        }
        if (!closed) return std::nullopt;
        e.msg = std::move(msg);
        return e;
    }

private:
    static std::string escape(std::string_view s) {
        std::string out;
        for (char c : s) {
            if (c == '\\' || c == '"') out.push_back('\\');
            if (c == '\n') {
                out += "\\n";
                continue;
            }
            out.push_back(c);
        }
        return out;
    }

    void reload() {
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw PersistError("cannot read event store " + path_.string());
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        if (content.empty()) return;
        file_was_empty_ = false;
        std::size_t pos = 0;
        while (pos < content.size()) {
            std::size_t line_start = pos;
            std::size_t nl = content.find('\n', pos);
            if (nl == std::string::npos) {
                // Incomplete trailing record: crash or truncation artifact.
                discarded_partial_ = 1;
                valid_bytes_ = line_start;
                break;
            }
            std::string line = content.substr(pos, nl - pos);
            pos = nl + 1;
            if (line.empty() || line[0] == '#') {
                if (line.find("clock=wall") != std::string::npos) mode_ = ClockMode::Wall;
                if (line.find("clock=virtual") != std::string::npos) mode_ = ClockMode::Virtual;
                continue;
            }
            auto record = parse_record(line);
            if (!record) {
                if (pos >= content.size()) {
                    discarded_partial_ = 1;  // malformed final line, treat as partial
                    valid_bytes_ = line_start;
                    break;
                }
                throw PersistError("corrupt event store record in " + path_.string());
            }
            events_.push_back(std::move(*record));
        }
        if (!events_.empty()) next_seq_ = events_.back().seq + 1;
    }

    std::filesystem::path path_;
    ClockMode mode_ = ClockMode::Virtual;
    std::ofstream out_;
    std::vector<StoredEvent> events_;
    uint64_t next_seq_ = 1;
    std::size_t discarded_partial_ = 0;
    std::uintmax_t valid_bytes_ = 0;
    bool file_was_empty_ = true;
};

}  // namespace flowgate
