#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowgate/result.hpp"

namespace flowgate {

struct ConfigError {
    std::filesystem::path file;
    size_t line = 0;  // 0 = whole-file problem
    std::string detail;

    std::string to_string() const {
        std::ostringstream out;
        out << file.string();
        if (line) out << ":" << line;
        out << ": " << detail;
        return out.str();
    }
};

namespace detail {
inline std::string_view trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace detail

// Sectioned key=value text. Keys may repeat; entries keep file order.
// Content before any [section] header lands in the unnamed section "".
class IniFile {
public:
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
        size_t line;
    };

    static Result<IniFile, ConfigError> parse(std::string_view text,
                                              std::filesystem::path origin = {}) {
        IniFile ini;
        ini.origin_ = std::move(origin);
        std::string section;
        size_t line_no = 0;
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t eol = text.find('\n', pos);
            std::string_view raw = text.substr(
                pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
            ++line_no;
            if (size_t hash = raw.find('#'); hash != std::string_view::npos)
                raw = raw.substr(0, hash);
            std::string_view line = detail::trim(raw);
            if (!line.empty()) {
                if (line.front() == '[') {
                    if (line.back() != ']' || line.size() < 3)
                        return ConfigError{ini.origin_, line_no, "malformed section header"};
                    section = std::string(detail::trim(line.substr(1, line.size() - 2)));
                    ini.section_order_.push_back(section);
                } else {
                    size_t eq = line.find('=');
                    if (eq == std::string_view::npos)
                        return ConfigError{ini.origin_, line_no,
                                           "expected key = value or [section]"};
                    std::string key(detail::trim(line.substr(0, eq)));
                    std::string value(detail::trim(line.substr(eq + 1)));
                    if (key.empty())
                        return ConfigError{ini.origin_, line_no, "empty key"};
                    ini.entries_.push_back(Entry{section, std::move(key), std::move(value),
                                                 line_no});
                }
            }
            if (eol == std::string_view::npos) break;
            pos = eol + 1;
        }
        return ini;
    }

    static Result<IniFile, ConfigError> load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) return ConfigError{path, 0, "cannot open file"};
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path);
    }

    const std::vector<Entry>& entries() const { return entries_; }
    const std::filesystem::path& origin() const { return origin_; }

    std::optional<std::string> first(std::string_view section, std::string_view key) const {
        for (const Entry& e : entries_)
            if (e.section == section && e.key == key) return e.value;
        return std::nullopt;
    }

    std::vector<std::string> all(std::string_view section, std::string_view key) const {
        std::vector<std::string> out;
        for (const Entry& e : entries_)
            if (e.section == section && e.key == key) out.push_back(e.value);
        return out;
    }

    std::vector<const Entry*> section_entries(std::string_view section) const {
        std::vector<const Entry*> out;
        for (const Entry& e : entries_)
            if (e.section == section) out.push_back(&e);
        return out;
    }

    bool has_section(std::string_view section) const {
        return std::find(section_order_.begin(), section_order_.end(), section) !=
               section_order_.end();
    }

private:
    std::filesystem::path origin_;
    std::vector<Entry> entries_;
    std::vector<std::string> section_order_;
};

namespace detail {

template <typename Int>
inline std::optional<Int> parse_int(std::string_view s) {
    Int value{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return value;
}

// Relative paths in config files resolve against the file's directory.
inline std::filesystem::path resolve_path(const std::filesystem::path& origin,
                                          const std::filesystem::path& value) {
    if (value.is_absolute() || origin.empty()) return value;
    return origin.parent_path() / value;
}

}  // namespace detail

// Runtime configuration for live mode (flat key=value file).
struct RunConfig {
    uint32_t honeypot_port = 4;
    uint32_t mirror_port = 3;
    std::filesystem::path whitelist;
    std::filesystem::path blacklist;
    uint16_t alert_port = 51234;
    std::filesystem::path event_store;
    std::string listen = "127.0.0.1:6653";
    std::optional<std::filesystem::path> rules;
};

inline Result<RunConfig, ConfigError> load_run_config(const std::filesystem::path& path) {
    auto ini = IniFile::load(path);
    if (!ini.ok()) return ini.error();
    const IniFile& file = ini.value();

    RunConfig config;
    for (const auto& entry : file.entries()) {
        if (!entry.section.empty())
            return ConfigError{path, entry.line, "unexpected section [" + entry.section + "]"};
        const std::string& key = entry.key;
        const std::string& value = entry.value;
        if (key == "honeypot_port" || key == "mirror_port") {
            auto port = detail::parse_int<uint32_t>(value);
            if (!port || *port == 0)
                return ConfigError{path, entry.line, key + " must be a positive integer"};
            (key == "honeypot_port" ? config.honeypot_port : config.mirror_port) = *port;
        } else if (key == "alert_port") {
            auto port = detail::parse_int<uint16_t>(value);
            if (!port || *port == 0)
                return ConfigError{path, entry.line, "alert_port must be 1-65535"};
            config.alert_port = *port;
        } else if (key == "whitelist") {
            config.whitelist = detail::resolve_path(path, value);
        } else if (key == "blacklist") {
            config.blacklist = detail::resolve_path(path, value);
        } else if (key == "event_store") {
            config.event_store = detail::resolve_path(path, value);
        } else if (key == "rules") {
            config.rules = detail::resolve_path(path, value);
        } else if (key == "listen") {
            config.listen = value;
        } else {
            return ConfigError{path, entry.line, "unknown key '" + key + "'"};
        }
    }
    if (config.whitelist.empty())
        return ConfigError{path, 0, "missing required key 'whitelist'"};
    if (config.blacklist.empty())
        return ConfigError{path, 0, "missing required key 'blacklist'"};
    if (config.event_store.empty())
        return ConfigError{path, 0, "missing required key 'event_store'"};
    if (config.honeypot_port == config.mirror_port)
        return ConfigError{path, 0, "honeypot_port must differ from mirror_port"};
    return config;
}

// "host:port" for listeners; port 0 asks the OS for an ephemeral port.
struct Endpoint {
    std::string host;
    uint16_t port = 0;
};

inline std::optional<Endpoint> parse_endpoint(std::string_view s) {
    size_t colon = s.rfind(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    auto port = detail::parse_int<uint16_t>(s.substr(colon + 1));
    if (!port) return std::nullopt;
    return Endpoint{std::string(s.substr(0, colon)), *port};
}

}  // namespace flowgate
