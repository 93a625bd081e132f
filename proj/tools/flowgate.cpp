#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "flowgate/flowgate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitExpectation = 3;

std::atomic<bool> g_interrupted{false};

void handle_signal(int) { g_interrupted.store(true); }

struct GlobalOpts {
    std::string config_path;
    std::string store_path;
    std::optional<uint32_t> seed;

    std::optional<std::filesystem::path> config() const {
        if (!config_path.empty()) return std::filesystem::path(config_path);
        if (const char* env = std::getenv("FLOWGATE_CONFIG"); env && *env)
            return std::filesystem::path(env);
        return std::nullopt;
    }
};

std::optional<flowgate::RunConfig> load_config_or_complain(const GlobalOpts& opts) {
    auto path = opts.config();
    if (!path) {
        std::cerr << "error: no configuration (--config or FLOWGATE_CONFIG)\n";
        return std::nullopt;
    }
    auto config = flowgate::load_run_config(*path);
    if (!config.ok()) {
        std::cerr << "error: " << config.error().to_string() << "\n";
        return std::nullopt;
    }
    return std::move(config).value();
}

int cmd_scenario(const GlobalOpts& opts, const std::string& file) {
    auto spec = flowgate::load_scenario(file);
    if (!spec.ok()) {
        std::cerr << "error: " << spec.error().to_string() << "\n";
        return kExitConfig;
    }
    flowgate::ScenarioOverrides overrides;
    if (!opts.store_path.empty()) overrides.event_store = opts.store_path;
    overrides.seed = opts.seed;

    auto result = flowgate::run_scenario(spec.value(), overrides);
    if (!result.ok()) {
        std::cerr << "error: " << result.error().to_string() << "\n";
        return kExitConfig;
    }
    std::cout << flowgate::format_summary(spec.value(), result.value()) << "\n";

    auto outcomes = flowgate::evaluate_checks(spec.value(), result.value());
    bool all_pass = true;
    for (const auto& outcome : outcomes) {
        std::cout << "check " << (outcome.pass ? "PASS" : "FAIL") << ": " << outcome.text
                  << " (actual " << outcome.actual << ")\n";
        all_pass = all_pass && outcome.pass;
    }
    return all_pass ? kExitOk : kExitExpectation;
}

int cmd_run(const GlobalOpts& opts) {
    auto config = load_config_or_complain(opts);
    if (!config) return kExitConfig;
    if (!opts.store_path.empty()) config->event_store = opts.store_path;

    auto runtime = flowgate::LiveRuntime::start(*config);
    if (!runtime.ok()) {
        std::cerr << "error: " << runtime.error() << "\n";
        return kExitConfig;
    }
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    auto ports = runtime.value()->ports();
    std::cout << "listening: alerts on port " << ports.alert_port << ", switch on port "
              << ports.switch_port << std::endl;
    while (!g_interrupted.load())
        std::this_thread::sleep_for(std::chrono::milliseconds(50));

    std::cout << "shutting down\n";
    runtime.value()->stop();
    return kExitOk;
}

int cmd_lists_show(const GlobalOpts& opts) {
    auto config = load_config_or_complain(opts);
    if (!config) return kExitConfig;
    auto whitelist = flowgate::load_whitelist(config->whitelist);
    if (!whitelist.ok()) {
        std::cerr << "error: whitelist: " << whitelist.error().detail << "\n";
        return kExitConfig;
    }
    auto blacklist = flowgate::load_blacklist(config->blacklist);
    if (!blacklist.ok()) {
        std::cerr << "error: blacklist: " << blacklist.error().detail << "\n";
        return kExitConfig;
    }
    std::cout << flowgate::kBannerRegistered << "\n"
              << whitelist.value().to_bracket_string() << "\n"
              << flowgate::kBannerBlacklist << "\n"
              << blacklist.value().to_bracket_string() << "\n";
    return kExitOk;
}

int cmd_lists_add_black(const GlobalOpts& opts, const std::string& mac_text) {
    auto mac = flowgate::MacAddr::parse(mac_text);
    if (!mac) {
        std::cerr << "error: not a MAC address: " << mac_text << "\n";
        return kExitConfig;
    }
    auto config = load_config_or_complain(opts);
    if (!config) return kExitConfig;
    auto blacklist = flowgate::load_blacklist(config->blacklist);
    if (!blacklist.ok()) {
        std::cerr << "error: blacklist: " << blacklist.error().detail << "\n";
        return kExitConfig;
    }
    try {
        auto outcome = blacklist.value().blacklist_add(*mac);
        std::cout << mac->to_string() << " "
                  << (outcome == flowgate::AddOutcome::Inserted ? "added" : "already present")
                  << "\n";
        return kExitOk;
    } catch (const flowgate::PersistError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

std::optional<flowgate::EventStore> open_store_or_complain(const GlobalOpts& opts) {
    std::filesystem::path path;
    if (!opts.store_path.empty()) {
        path = opts.store_path;
    } else {
        auto config = opts.config();
        if (config) {
            auto loaded = flowgate::load_run_config(*config);
            if (!loaded.ok()) {
                std::cerr << "error: " << loaded.error().to_string() << "\n";
                return std::nullopt;
            }
            path = loaded.value().event_store;
        }
    }
    if (path.empty()) {
        std::cerr << "error: no event store (--store or config event_store)\n";
        return std::nullopt;
    }
    if (!std::filesystem::exists(path)) {
        std::cerr << "error: event store does not exist: " << path.string() << "\n";
        return std::nullopt;
    }
    try {
        return flowgate::EventStore::open(path);
    } catch (const flowgate::PersistError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return std::nullopt;
    }
}

struct QueryOpts {
    std::optional<int> cls;
    std::string src_mac;
    std::optional<uint64_t> from_ts;
    std::optional<uint64_t> to_ts;
    std::string action;
};

int cmd_events_query(const GlobalOpts& opts, const QueryOpts& query_opts) {
    flowgate::EventStore::Filter filter;
    filter.cls = query_opts.cls;
    if (!query_opts.src_mac.empty()) {
        auto mac = flowgate::MacAddr::parse(query_opts.src_mac);
        if (!mac) {
            std::cerr << "error: not a MAC address: " << query_opts.src_mac << "\n";
            return kExitConfig;
        }
        filter.src_mac = *mac;
    }
    if (query_opts.from_ts || query_opts.to_ts)
        filter.time_range = {query_opts.from_ts.value_or(0),
                             query_opts.to_ts.value_or(UINT64_MAX)};
    if (!query_opts.action.empty()) {
        auto action = flowgate::action_from_string(query_opts.action);
        if (!action) {
            std::cerr << "error: unknown action: " << query_opts.action << "\n";
            return kExitConfig;
        }
        filter.action = *action;
    }

    auto store = open_store_or_complain(opts);
    if (!store) return kExitConfig;
    for (const auto& event : store->query(filter))
        std::cout << flowgate::EventStore::format_record(event) << "\n";
    return kExitOk;
}

int cmd_events_stats(const GlobalOpts& opts) {
    auto store = open_store_or_complain(opts);
    if (!store) return kExitConfig;
    for (const auto& [cls, count] : store->stats()) {
        if (cls == 0)
            std::cout << "unclassified: " << count << "\n";
        else
            std::cout << "class " << cls << ": " << count << "\n";
    }
    return kExitOk;
}

int cmd_rules_check(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << file << "\n";
        return kExitConfig;
    }
    std::ostringstream text;
    text << in.rdbuf();
    auto rules = flowgate::parse_rules(text.str());
    if (!rules.ok()) {
        std::cerr << "error: " << file << ": " << rules.error().to_string() << "\n";
        return kExitConfig;
    }
    for (const auto& rule : rules.value()) std::cout << flowgate::print_rule(rule) << "\n";
    std::cout << rules.value().size() << " rule" << (rules.value().size() == 1 ? "" : "s")
              << " ok\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SDN intrusion detection and treatment simulator"};
    app.require_subcommand(1);

    GlobalOpts opts;
    uint32_t seed_value = 0;
    app.add_option("--config", opts.config_path, "configuration file (or FLOWGATE_CONFIG)");
    app.add_option("--store", opts.store_path, "event store path override");
    auto* seed_opt = app.add_option("--seed", seed_value, "seed override for scenario traffic");

    auto* run_cmd = app.add_subcommand("run", "run the live controller and detector");

    std::string scenario_file;
    auto* scenario_cmd = app.add_subcommand("scenario", "replay a deterministic scenario");
    scenario_cmd->add_option("file", scenario_file, "scenario description file")->required();

    auto* lists_cmd = app.add_subcommand("lists", "inspect or edit the access lists");
    lists_cmd->require_subcommand(1);
    auto* lists_show = lists_cmd->add_subcommand("show", "print both lists");
    std::string black_mac;
    auto* lists_add = lists_cmd->add_subcommand("add-black", "append a MAC to the blacklist");
    lists_add->add_option("mac", black_mac, "MAC address")->required();

    auto* events_cmd = app.add_subcommand("events", "query the forensic event store");
    events_cmd->require_subcommand(1);
    QueryOpts query_opts;
    int cls_value = 0;
    uint64_t from_value = 0, to_value = 0;
    auto* events_query = events_cmd->add_subcommand("query", "print matching events");
    auto* cls_opt = events_query->add_option("--class", cls_value, "alert class");
    events_query->add_option("--src-mac", query_opts.src_mac, "source MAC filter");
    auto* from_opt = events_query->add_option("--from", from_value, "minimum timestamp");
    auto* to_opt = events_query->add_option("--to", to_value, "maximum timestamp");
    events_query->add_option("--action", query_opts.action,
                             "action filter (stored, rewritten, dropped, blacklisted, warned)");
    auto* events_stats = events_cmd->add_subcommand("stats", "count events per class");

    std::string rules_file;
    auto* rules_cmd = app.add_subcommand("rules", "rule file utilities");
    rules_cmd->require_subcommand(1);
    auto* rules_check = rules_cmd->add_subcommand("check", "validate and normalize a rule file");
    rules_check->add_option("file", rules_file, "rule file")->required();

    CLI11_PARSE(app, argc, argv);

    if (seed_opt->count()) opts.seed = seed_value;
    if (cls_opt->count()) query_opts.cls = cls_value;
    if (from_opt->count()) query_opts.from_ts = from_value;
    if (to_opt->count()) query_opts.to_ts = to_value;

    if (run_cmd->parsed()) return cmd_run(opts);
    if (scenario_cmd->parsed()) return cmd_scenario(opts, scenario_file);
    if (lists_show->parsed()) return cmd_lists_show(opts);
    if (lists_add->parsed()) return cmd_lists_add_black(opts, black_mac);
    if (events_query->parsed()) return cmd_events_query(opts, query_opts);
    if (events_stats->parsed()) return cmd_events_stats(opts);
    if (rules_check->parsed()) return cmd_rules_check(rules_file);
    return kExitConfig;
}
