#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "flowgate/event_store.hpp"
#include "test_support.hpp"

using namespace flowgate;
namespace ts = testsupport;

namespace {

StoredEvent sample_event(uint64_t ts, std::optional<int> cls, std::vector<ActionTaken> actions,
                         std::string msg = "Class 1 - ICMP detected") {
    StoredEvent e;
    e.ts = ts;
    e.cls = cls;
    e.msg = std::move(msg);
    e.sid = 1000001;
    e.src_mac = ts::mac("08:00:27:a2:b7:bd");
    e.dst_mac = ts::mac("08:00:27:32:e9:4d");
    e.src_ip = ts::ip("172.16.10.100");
    e.dst_ip = ts::ip("172.16.10.2");
    e.proto = kProtoIcmp;
    e.action_taken = std::move(actions);
    return e;
}

}  // namespace

TEST_CASE("records are formatted canonically") {
    StoredEvent e = sample_event(1'099'000, 3, {ActionTaken::Stored, ActionTaken::Dropped,
                                                ActionTaken::Blacklisted},
                                 "Classe 3 - Hping3 DoS Detected");
    e.seq = 7;
    e.sid = 1000003;
    e.proto = kProtoTcp;
    CHECK(EventStore::format_record(e) ==
          "seq=7 ts=1099000 class=3 sid=1000003 proto=6 src_mac=08:00:27:a2:b7:bd "
          "dst_mac=08:00:27:32:e9:4d src_ip=172.16.10.100 dst_ip=172.16.10.2 "
          "actions=stored,dropped,blacklisted msg=\"Classe 3 - Hping3 DoS Detected\"");

    StoredEvent unclassified = sample_event(5, std::nullopt, {ActionTaken::Warned}, "odd");
    unclassified.seq = 1;
    CHECK(EventStore::format_record(unclassified).find(" class=- ") != std::string::npos);
}

TEST_CASE("format and parse round-trip, including escapes") {
    std::vector<std::string> messages = {
        "plain",
        "with \"quotes\" inside",
        "back\\slash",
        "line\nbreak",
        "trailing space ",
    };
    uint64_t seq = 1;
    for (const auto& msg : messages) {
        StoredEvent e = sample_event(42, 2, {ActionTaken::Stored, ActionTaken::Rewritten}, msg);
        e.seq = seq++;
        auto parsed = EventStore::parse_record(EventStore::format_record(e));
        REQUIRE(parsed.has_value());
        REQUIRE(*parsed == e);
    }
    CHECK(!EventStore::parse_record("seq=1 nonsense").has_value());
    CHECK(!EventStore::parse_record("").has_value());
}

TEST_CASE("a fresh store writes its header and assigns sequence numbers") {
    ts::TempDir dir;
    auto path = dir.path / "events.log";
    auto store = EventStore::open(path);
    CHECK(store.clock_mode() == ClockMode::Virtual);
    CHECK(store.append(sample_event(10, 1, {ActionTaken::Stored})) == 1);
    CHECK(store.append(sample_event(20, 1, {ActionTaken::Stored})) == 2);

    auto content = ts::read_file(path);
    CHECK(content.rfind("# flowgate-events v1 clock=virtual\n", 0) == 0);
    CHECK(store.all().size() == 2);
    CHECK(store.all()[0].seq == 1);
    CHECK(store.all()[1].seq == 2);
}

TEST_CASE("a reopened store continues where it stopped") {
    ts::TempDir dir;
    auto path = dir.path / "events.log";
    std::string first_content;
    {
        auto store = EventStore::open(path, ClockMode::Wall);
        store.append(sample_event(10, 1, {ActionTaken::Stored}));
        store.append(sample_event(20, 2, {ActionTaken::Stored, ActionTaken::Rewritten}));
        first_content = ts::read_file(path);
    }
    auto store = EventStore::open(path);  // default mode is overridden by the header
    CHECK(store.clock_mode() == ClockMode::Wall);
    CHECK(store.discarded_partial() == 0);
    REQUIRE(store.all().size() == 2);
    CHECK(store.all()[1].cls == 2);
    CHECK(ts::read_file(path) == first_content);  // reopening does not rewrite

    CHECK(store.append(sample_event(30, 3, {ActionTaken::Blacklisted})) == 3);
}

TEST_CASE("one partial trailing line is discarded and truncated away") {
    ts::TempDir dir;
    auto path = dir.path / "events.log";
    {
        auto store = EventStore::open(path);
        store.append(sample_event(10, 1, {ActionTaken::Stored}));
    }
    std::string intact = ts::read_file(path);
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << "seq=2 ts=20 class=1 sid=1";  // crash mid-record: no newline
    }

    auto store = EventStore::open(path);
    CHECK(store.discarded_partial() == 1);
    REQUIRE(store.all().size() == 1);
    CHECK(ts::read_file(path) == intact);  // the partial bytes are gone

    // New appends land on a clean line and a further reload sees everything.
    store.append(sample_event(30, 2, {ActionTaken::Stored}));
    auto again = EventStore::open(path);
    CHECK(again.discarded_partial() == 0);
    REQUIRE(again.all().size() == 2);
    CHECK(again.all()[1].seq == 2);
    CHECK(again.all()[1].ts == 30);
}

TEST_CASE("a malformed final line is tolerated like a partial one") {
    ts::TempDir dir;
    auto path = dir.path / "events.log";
    {
        auto store = EventStore::open(path);
        store.append(sample_event(10, 1, {ActionTaken::Stored}));
    }
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << "complete garbage line\n";
    }
    auto store = EventStore::open(path);
    CHECK(store.discarded_partial() == 1);
    CHECK(store.all().size() == 1);
}

TEST_CASE("corruption before the end is fatal") {
    ts::TempDir dir;
    auto path = dir.path / "events.log";
    {
        auto store = EventStore::open(path);
        store.append(sample_event(10, 1, {ActionTaken::Stored}));
        store.append(sample_event(20, 2, {ActionTaken::Stored}));
    }
    auto content = ts::read_file(path);
    auto pos = content.find("seq=1");
    REQUIRE(pos != std::string::npos);
    content.replace(pos, 5, "zeq=1");
    ts::write_file(path, content);
    CHECK_THROWS_AS(EventStore::open(path), PersistError);
}

TEST_CASE("queries filter by class, source, time range and action") {
    ts::TempDir dir;
    auto store = EventStore::open(dir.path / "events.log");
    store.append(sample_event(100, 1, {ActionTaken::Stored}));
    auto other = sample_event(200, 2, {ActionTaken::Stored, ActionTaken::Rewritten});
    other.src_mac = ts::mac("68:5b:35:b4:fc:bf");
    store.append(other);
    store.append(sample_event(300, 3,
                              {ActionTaken::Stored, ActionTaken::Dropped,
                               ActionTaken::Blacklisted},
                              "Classe 3 - Hping3 DoS Detected"));
    store.append(sample_event(400, std::nullopt, {ActionTaken::Warned}, "odd alert"));

    CHECK(store.query({}).size() == 4);

    EventStore::Filter by_class;
    by_class.cls = 3;
    auto found = store.query(by_class);
    REQUIRE(found.size() == 1);
    CHECK(found[0].ts == 300);

    EventStore::Filter by_mac;
    by_mac.src_mac = ts::mac("68:5b:35:b4:fc:bf");
    CHECK(store.query(by_mac).size() == 1);

    EventStore::Filter by_time;
    by_time.time_range = {{150, 300}};
    CHECK(store.query(by_time).size() == 2);  // inclusive bounds

    EventStore::Filter by_action;
    by_action.action = ActionTaken::Rewritten;
    CHECK(store.query(by_action).size() == 1);

    EventStore::Filter combined;
    combined.cls = 2;
    combined.action = ActionTaken::Stored;
    CHECK(store.query(combined).size() == 1);

    auto stats = store.stats();
    CHECK(stats[1] == 1);
    CHECK(stats[2] == 1);
    CHECK(stats[3] == 1);
    CHECK(stats[0] == 1);  // unclassified bucket
}
