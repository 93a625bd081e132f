#include <catch2/catch_amalgamated.hpp>

#include "flowgate/config.hpp"
#include "test_support.hpp"

using namespace flowgate;
namespace ts = testsupport;

TEST_CASE("ini files keep sectioned entries in file order") {
    auto parsed = IniFile::parse(
        "top = 1\n"
        "[alpha]\n"
        "key = one   # inline comment\n"
        "key = two\n"
        "other=  spaced value  \n"
        "# whole-line comment\n"
        "[beta]\n"
        "key = three\n");
    REQUIRE(parsed.ok());
    const IniFile& ini = parsed.value();

    REQUIRE(ini.entries().size() == 5);
    CHECK(ini.entries()[0].section.empty());
    CHECK(ini.entries()[0].key == "top");
    CHECK(ini.entries()[1].line == 3);

    CHECK(ini.first("alpha", "key") == "one");
    CHECK(ini.all("alpha", "key") == std::vector<std::string>{"one", "two"});
    CHECK(ini.first("alpha", "other") == "spaced value");
    CHECK(ini.first("beta", "key") == "three");
    CHECK(!ini.first("beta", "absent").has_value());
    CHECK(ini.has_section("alpha"));
    CHECK(!ini.has_section("gamma"));
    CHECK(ini.section_entries("alpha").size() == 3);
}

TEST_CASE("ini syntax problems carry their line numbers") {
    auto bad_header = IniFile::parse("ok = 1\n[broken\n");
    REQUIRE(!bad_header.ok());
    CHECK(bad_header.error().line == 2);
    CHECK(bad_header.error().detail == "malformed section header");

    auto no_equals = IniFile::parse("[s]\njust words\n");
    REQUIRE(!no_equals.ok());
    CHECK(no_equals.error().line == 2);
    CHECK(no_equals.error().detail == "expected key = value or [section]");

    auto empty_key = IniFile::parse("= value\n");
    REQUIRE(!empty_key.ok());
    CHECK(empty_key.error().detail == "empty key");

    auto missing = IniFile::load("/nonexistent-dir-for-tests/config.ini");
    REQUIRE(!missing.ok());
    CHECK(missing.error().line == 0);
    CHECK(missing.error().detail == "cannot open file");
    CHECK(missing.error().to_string() ==
          "/nonexistent-dir-for-tests/config.ini: cannot open file");
}

TEST_CASE("run configs resolve relative paths against the config file") {
    ts::TempDir dir;
    ts::write_file(dir.path / "whitelist.txt", "08:00:27:a2:b7:bd\n");
    auto path = dir.path / "flowgate.conf";
    ts::write_file(path,
                   "whitelist = whitelist.txt\n"
                   "blacklist = blacklist.txt\n"
                   "event_store = events.log\n"
                   "rules = /etc/flowgate/rules.local\n"
                   "honeypot_port = 7\n"
                   "mirror_port = 2\n"
                   "alert_port = 6000\n"
                   "listen = 0.0.0.0:6653\n");

    auto loaded = load_run_config(path);
    REQUIRE(loaded.ok());
    const RunConfig& config = loaded.value();
    CHECK(config.whitelist == dir.path / "whitelist.txt");
    CHECK(config.blacklist == dir.path / "blacklist.txt");
    CHECK(config.event_store == dir.path / "events.log");
    CHECK(config.rules == std::filesystem::path("/etc/flowgate/rules.local"));
    CHECK(config.honeypot_port == 7);
    CHECK(config.mirror_port == 2);
    CHECK(config.alert_port == 6000);
    CHECK(config.listen == "0.0.0.0:6653");
}

TEST_CASE("run configs fall back to documented defaults") {
    ts::TempDir dir;
    auto path = dir.path / "flowgate.conf";
    ts::write_file(path,
                   "whitelist = wl.txt\n"
                   "blacklist = bl.txt\n"
                   "event_store = ev.log\n");
    auto loaded = load_run_config(path);
    REQUIRE(loaded.ok());
    CHECK(loaded.value().honeypot_port == 4);
    CHECK(loaded.value().mirror_port == 3);
    CHECK(loaded.value().alert_port == 51234);
    CHECK(loaded.value().listen == "127.0.0.1:6653");
    CHECK(!loaded.value().rules.has_value());
}

TEST_CASE("run config validation points at the offending line") {
    ts::TempDir dir;
    auto path = dir.path / "flowgate.conf";
    auto expect_error = [&](std::string_view text, size_t line, const std::string& detail) {
        ts::write_file(path, text);
        auto loaded = load_run_config(path);
        REQUIRE(!loaded.ok());
        INFO(loaded.error().to_string());
        CHECK(loaded.error().line == line);
        CHECK(loaded.error().detail == detail);
    };

    expect_error("whitelist = a\nblacklist = b\nevent_store = c\ntypo_key = 1\n", 4,
                 "unknown key 'typo_key'");
    expect_error("[general]\nwhitelist = a\n", 2, "unexpected section [general]");
    expect_error("blacklist = b\nevent_store = c\n", 0, "missing required key 'whitelist'");
    expect_error("whitelist = a\nevent_store = c\n", 0, "missing required key 'blacklist'");
    expect_error("whitelist = a\nblacklist = b\n", 0, "missing required key 'event_store'");
    expect_error("whitelist = a\nblacklist = b\nevent_store = c\nhoneypot_port = 3\n", 0,
                 "honeypot_port must differ from mirror_port");
    expect_error("whitelist = a\nblacklist = b\nevent_store = c\nmirror_port = 0\n", 4,
                 "mirror_port must be a positive integer");
    expect_error("whitelist = a\nblacklist = b\nevent_store = c\nhoneypot_port = ten\n", 4,
                 "honeypot_port must be a positive integer");
    expect_error("whitelist = a\nblacklist = b\nevent_store = c\nalert_port = 0\n", 4,
                 "alert_port must be 1-65535");
    expect_error("whitelist = a\nblacklist = b\nevent_store = c\nalert_port = 70000\n", 4,
                 "alert_port must be 1-65535");
}

TEST_CASE("endpoints parse as host colon port") {
    auto ep = parse_endpoint("127.0.0.1:6653");
    REQUIRE(ep.has_value());
    CHECK(ep->host == "127.0.0.1");
    CHECK(ep->port == 6653);

    auto ephemeral = parse_endpoint("localhost:0");  // 0 requests an OS-assigned port
    REQUIRE(ephemeral.has_value());
    CHECK(ephemeral->host == "localhost");
    CHECK(ephemeral->port == 0);

    auto last_colon = parse_endpoint("a:b:80");
    REQUIRE(last_colon.has_value());
    CHECK(last_colon->host == "a:b");
    CHECK(last_colon->port == 80);

    CHECK(!parse_endpoint("nonsense").has_value());
    CHECK(!parse_endpoint(":123").has_value());
    CHECK(!parse_endpoint("host:").has_value());
    CHECK(!parse_endpoint("host:99999").has_value());
    CHECK(!parse_endpoint("host:12x").has_value());
}
