#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowgate/addr.hpp"
#include "flowgate/errors.hpp"
#include "flowgate/result.hpp"

namespace flowgate {

enum class ListKind { Whitelist, Blacklist };

enum class AddOutcome { Inserted, AlreadyPresent };

enum class ListErr { MalformedMac, MissingFile };

struct ListError {
    ListErr kind;
    int line = 0;
    std::string detail;
};

// Persistent ordered set of MAC addresses backing whitelist.txt /
// blacklist.txt. One lowercase MAC per line, '#' starts a comment.
// Mutations are written through before they are visible in memory terms:
// a failed persist rolls the in-memory change back.
class AccessList {
public:
    AccessList(ListKind kind, std::filesystem::path path)
        : kind_(kind), path_(std::move(path)) {}

    static Result<AccessList, ListError> load(ListKind kind, const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in)
            return ListError{ListErr::MissingFile, 0, "cannot open " + path.string()};
        AccessList list(kind, path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            auto begin = line.find_first_not_of(" \t\r");
            if (begin == std::string::npos) continue;
            auto end = line.find_last_not_of(" \t\r");
            auto text = line.substr(begin, end - begin + 1);
            auto mac = MacAddr::parse(text);
            if (!mac)
                return ListError{ListErr::MalformedMac, line_no, "not a MAC address: " + text};
            if (list.present_.insert(*mac).second) list.entries_.push_back(*mac);
        }
        return list;
    }

    ListKind kind() const { return kind_; }
    const std::filesystem::path& path() const { return path_; }
    const std::vector<MacAddr>& entries() const { return entries_; }

    bool contains(const MacAddr& mac) const { return present_.count(mac) != 0; }

    // Idempotent insert with atomic write-through (temp file + rename).
    AddOutcome blacklist_add(const MacAddr& mac) {
        if (kind_ != ListKind::Blacklist)
            throw std::logic_error("blacklist_add on a non-blacklist");
        if (contains(mac)) return AddOutcome::AlreadyPresent;
        entries_.push_back(mac);
        present_.insert(mac);
        try {
            persist();
        } catch (...) {
            entries_.pop_back();
            present_.erase(mac);
            throw;
        }
        return AddOutcome::Inserted;
    }

    // Console list rendering: ['08:00:27:a2:b7:bd', '08:00:27:32:e9:4d'].
    std::string to_bracket_string() const {
        std::ostringstream out;
        out << '[';
        const char* sep = "";
        for (const auto& mac : entries_) {
            out << sep << '\'' << mac.to_string() << '\'';
            sep = ", ";
        }
        out << ']';
        return out.str();
    }

private:
    void persist() const {
        auto tmp = path_;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw PersistError("cannot write " + tmp.string());
            for (const auto& mac : entries_) out << mac.to_string() << '\n';
            out.flush();
            if (!out) throw PersistError("write failed for " + tmp.string());
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path_, ec);
        if (ec) {
            std::filesystem::remove(tmp, ec);
            throw PersistError("rename failed for " + path_.string());
        }
    }

    ListKind kind_;
    std::filesystem::path path_;
    std::vector<MacAddr> entries_;
    std::set<MacAddr> present_;
};

// Startup policy: an absent whitelist is a fatal configuration error
// (deny-by-default would silently deny everything), an absent blacklist
// means the system starts clean.
inline Result<AccessList, ListError> load_whitelist(const std::filesystem::path& path) {
    return AccessList::load(ListKind::Whitelist, path);
}

inline Result<AccessList, ListError> load_blacklist(const std::filesystem::path& path) {
    auto loaded = AccessList::load(ListKind::Blacklist, path);
    if (!loaded.ok() && loaded.error().kind == ListErr::MissingFile)
        return AccessList(ListKind::Blacklist, path);
    return loaded;
}

}  // namespace flowgate
