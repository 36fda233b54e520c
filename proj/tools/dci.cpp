// Command line driver for the deliberation engine. Verbs:
//   run       execute a scenario file, check its expectations, emit the packet
//   fuzz      run seeded random sessions and report termination statistics
//   replay    rebuild a session from its event log and compare the results
//   validate  check a single move or packet document
//   bound     print the round bound implied by a session configuration

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dci/harness.hpp"
#include "dci/remote.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw dci::DciError("IoError", "cannot read " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw dci::DciError("IoError", "cannot write " + path);
    f << text;
}

std::string derived_log_path(std::string scenario_path) {
    std::size_t dot = scenario_path.rfind(".json");
    if (dot != std::string::npos) scenario_path.erase(dot);
    return scenario_path + ".log.jsonl";
}

dci::FuzzProfile profile_from_name(const std::string& name) {
    if (name == "cooperative") return dci::FuzzProfile::cooperative;
    if (name == "adversarial") return dci::FuzzProfile::adversarial;
    if (name == "spawn_happy") return dci::FuzzProfile::spawn_happy;
    if (name == "flaky") return dci::FuzzProfile::flaky;
    throw CLI::ValidationError("--profiles",
                               "unknown profile '" + name + "'");
}

void emit_packet(const dci::DecisionPacket& packet,
                 const std::string& packet_path) {
    std::string text = dci::to_json(packet).dump(2) + "\n";
    if (packet_path.empty())
        std::cout << text;
    else
        write_file(packet_path, text);
}

struct RunArgs {
    std::string scenario_path;
    std::string log_path;
    std::string packet_path;
    bool remote = false;
    std::string endpoint;
    int retries = 2;
    int timeout = 30;
};

int cmd_run(const RunArgs& a) {
    dci::Scenario sc = dci::load_scenario(a.scenario_path);
    dci::DelegateRoster roster;
    if (a.remote) {
        dci::RemoteConfig cfg;
        if (!a.endpoint.empty()) cfg.base_url = a.endpoint;
        cfg.retry_bound = a.retries;
        cfg.timeout_seconds = a.timeout;
        for (const auto& seat : sc.envelope.delegates)
            roster.push_back(std::make_shared<dci::RemoteDelegate>(
                seat.delegate_id, seat.archetype, cfg));
    } else {
        roster.assign(sc.council.begin(), sc.council.end());
    }

    dci::EventLog log;
    dci::DecisionPacket packet = dci::run_session(sc.envelope, roster, log);

    std::string log_path =
        a.log_path.empty() ? derived_log_path(a.scenario_path) : a.log_path;
    write_file(log_path, log.to_jsonl());

    int failed = 0;
    auto report = dci::check_expectations(sc, packet, log);
    for (const auto& check : report) {
        if (!check.ok) ++failed;
        std::cerr << (check.ok ? "   ok  " : " FAIL  ") << check.field
                  << ": expected " << check.expected;
        if (!check.ok) std::cerr << ", actual " << check.actual;
        std::cerr << "\n";
    }
    std::cerr << "scenario " << sc.name << ": " << report.size() - failed
              << "/" << report.size() << " expectations hold, log in "
              << log_path << "\n";

    emit_packet(packet, a.packet_path);
    return failed == 0 ? 0 : 1;
}

struct FuzzArgs {
    unsigned long long seed = 1;
    int runs = 200;
    std::vector<int> councils;
    std::vector<int> rounds;
    std::vector<int> depths;
    std::vector<int> spawn_caps;
    std::vector<int> ceilings;
    std::vector<double> margins;
    std::vector<double> thresholds;
    std::vector<std::string> profiles;
    bool no_mixed = false;
    std::string report_path;
};

int cmd_fuzz(const FuzzArgs& a) {
    dci::FuzzRanges ranges;
    if (!a.councils.empty()) ranges.council_sizes = a.councils;
    if (!a.rounds.empty()) ranges.max_rounds = a.rounds;
    if (!a.depths.empty()) ranges.max_depths = a.depths;
    if (!a.spawn_caps.empty()) ranges.spawn_caps = a.spawn_caps;
    if (!a.ceilings.empty()) ranges.ceilings = a.ceilings;
    if (!a.margins.empty()) ranges.margins = a.margins;
    if (!a.thresholds.empty()) ranges.thresholds = a.thresholds;
    if (!a.profiles.empty()) {
        ranges.profiles.clear();
        for (const auto& name : a.profiles)
            ranges.profiles.push_back(profile_from_name(name));
    }
    ranges.mixed_populations = !a.no_mixed;

    dci::FuzzReport report = dci::fuzz_termination(a.seed, a.runs, ranges);
    std::string text = dci::to_json(report).dump(2) + "\n";
    if (a.report_path.empty())
        std::cout << text;
    else
        write_file(a.report_path, text);

    bool clean = report.terminations == report.runs &&
                 report.bound_violations == 0 &&
                 report.completeness_failures == 0 && report.failures.empty();
    std::cerr << "fuzz: " << report.terminations << "/" << report.runs
              << " runs terminated cleanly\n";
    return clean ? 0 : 1;
}

int cmd_replay(const std::string& log_file, const std::string& packet_path) {
    std::string original_text = read_file(log_file);
    dci::ReplayResult result = dci::replay(original_text);

    bool bytes_match = result.log.to_jsonl() == original_text;
    std::cerr << "packet " << (result.identical ? "matches" : "DIFFERS from")
              << " the recorded decision\n";
    std::cerr << "event stream " << (bytes_match ? "is" : "is NOT")
              << " byte-identical\n";
    emit_packet(result.packet, packet_path);
    return (result.identical && bytes_match) ? 0 : 1;
}

int cmd_validate(const std::string& doc_path, std::string kind) {
    dci::Json doc = dci::Json::parse(read_file(doc_path), nullptr, false);
    if (doc.is_discarded()) {
        std::cerr << "rejected: document is not valid JSON\n";
        return 1;
    }
    if (kind == "auto") {
        if (doc.contains("act")) kind = "move";
        else if (doc.contains("decision")) kind = "packet";
        else {
            std::cerr << "rejected: document is neither a move (no \"act\") "
                         "nor a packet (no \"decision\")\n";
            return 1;
        }
    }
    if (kind == "move") {
        dci::ParseResult parsed = dci::parse_move(doc);
        if (!parsed.ok()) {
            std::cerr << "rejected: " << parsed.error->field << ": "
                      << parsed.error->message << " (" << parsed.error->code
                      << ")\n";
            return 1;
        }
        std::cout << dci::serialize_move(*parsed.move).dump(2) << "\n";
        std::cerr << "move accepted\n";
        return 0;
    }
    dci::DecisionPacket packet = dci::packet_from_json(doc);
    auto missing = dci::validate_completeness(packet);
    if (!missing.empty()) {
        std::cerr << "incomplete packet, missing:";
        for (const auto& field : missing) std::cerr << " " << field;
        std::cerr << "\n";
        return 1;
    }
    std::cerr << "packet complete\n";
    return 0;
}

int cmd_bound(int rounds, int spawn_cap, int depth, long long ceiling) {
    auto caps = dci::session_caps(spawn_cap, depth);
    long long sessions = 0;
    for (std::size_t d = 0; d < caps.size(); ++d) {
        std::cout << "depth " << d << ": up to " << caps[d] << " session"
                  << (caps[d] == 1 ? "" : "s") << "\n";
        sessions += caps[d];
    }
    long long bound = dci::termination_bound(rounds, caps);
    std::cout << "sessions in the tree: " << sessions << "\n";
    std::cout << "round bound: " << rounds << " x " << sessions << " = "
              << bound << "\n";
    if (ceiling > 0)
        std::cout << "effective bound with ceiling " << ceiling << ": "
                  << std::min(bound, ceiling) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deliberation engine driver"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "read default option values from an INI or TOML file");

    RunArgs run_args;
    auto* run = app.add_subcommand(
        "run", "execute a scenario file and check its expectations");
    run->add_option("scenario", run_args.scenario_path, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--log", run_args.log_path,
                    "event log destination (default: <scenario>.log.jsonl)");
    run->add_option("--packet", run_args.packet_path,
                    "write the decision packet here instead of stdout");
    run->add_flag("--remote", run_args.remote,
                  "drive the council through a completion endpoint instead "
                  "of the scripts");
    run->add_option("--endpoint", run_args.endpoint,
                    "completion endpoint base URL")
        ->envname("DCI_ENDPOINT");
    run->add_option("--retries", run_args.retries,
                    "re-prompts allowed per malformed remote reply")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--timeout", run_args.timeout,
                    "remote request timeout in seconds")
        ->check(CLI::PositiveNumber);

    FuzzArgs fuzz_args;
    auto* fuzz = app.add_subcommand(
        "fuzz", "run seeded random sessions and report termination "
                "statistics");
    fuzz->add_option("--seed", fuzz_args.seed, "base seed");
    fuzz->add_option("--runs", fuzz_args.runs, "number of sessions")
        ->check(CLI::PositiveNumber);
    fuzz->add_option("--councils", fuzz_args.councils,
                     "council sizes to draw from")
        ->delimiter(',');
    fuzz->add_option("--rounds", fuzz_args.rounds,
                     "per-session round limits to draw from")
        ->delimiter(',');
    fuzz->add_option("--depths", fuzz_args.depths,
                     "spawn depth limits to draw from")
        ->delimiter(',');
    fuzz->add_option("--spawn-caps", fuzz_args.spawn_caps,
                     "per-session spawn caps to draw from")
        ->delimiter(',');
    fuzz->add_option("--ceilings", fuzz_args.ceilings,
                     "tree round ceilings to draw from")
        ->delimiter(',');
    fuzz->add_option("--margins", fuzz_args.margins,
                     "dominance margins to draw from")
        ->delimiter(',');
    fuzz->add_option("--thresholds", fuzz_args.thresholds,
                     "majority thresholds to draw from")
        ->delimiter(',');
    fuzz->add_option("--profiles", fuzz_args.profiles,
                     "delegate profiles: cooperative, adversarial, "
                     "spawn_happy, flaky")
        ->delimiter(',');
    fuzz->add_flag("--no-mixed", fuzz_args.no_mixed,
                   "never mix profiles inside one council");
    fuzz->add_option("--report", fuzz_args.report_path,
                     "write the JSON report here instead of stdout");

    std::string replay_log, replay_packet;
    auto* replay = app.add_subcommand(
        "replay", "rebuild a session from its event log and compare");
    replay->add_option("log", replay_log, "event log in JSONL form")
        ->required()
        ->check(CLI::ExistingFile);
    replay->add_option("--packet", replay_packet,
                       "write the replayed packet here instead of stdout");

    std::string validate_doc, validate_kind = "auto";
    auto* validate = app.add_subcommand(
        "validate", "check a single move or packet document");
    validate->add_option("document", validate_doc, "JSON document file")
        ->required()
        ->check(CLI::ExistingFile);
    validate
        ->add_option("--kind", validate_kind,
                     "document kind; auto looks at the fields present")
        ->check(CLI::IsMember({"auto", "move", "packet"}));

    int bound_rounds = 0, bound_spawn = 0, bound_depth = 0;
    long long bound_ceiling = 0;
    auto* bound = app.add_subcommand(
        "bound", "print the round bound implied by a session configuration");
    bound->add_option("--rounds", bound_rounds, "rounds per session")
        ->required()
        ->check(CLI::PositiveNumber);
    bound->add_option("--spawn-cap", bound_spawn, "spawns per session")
        ->check(CLI::NonNegativeNumber);
    bound->add_option("--depth", bound_depth, "maximum spawn depth")
        ->check(CLI::NonNegativeNumber);
    bound->add_option("--ceiling", bound_ceiling,
                      "tree-wide round ceiling, 0 to ignore")
        ->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (fuzz->parsed()) return cmd_fuzz(fuzz_args);
        if (replay->parsed()) return cmd_replay(replay_log, replay_packet);
        if (validate->parsed())
            return cmd_validate(validate_doc, validate_kind);
        if (bound->parsed())
            return cmd_bound(bound_rounds, bound_spawn, bound_depth,
                             bound_ceiling);
    } catch (const dci::DciError& e) {
        std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
