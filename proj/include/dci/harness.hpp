#pragma once

// Scenario files, the termination fuzzer, and event-log replay. A scenario
// bundles an envelope with fully scripted delegate behavior and optional
// expected outcomes; the fuzzer drives randomized councils through the
// engine and checks the bound on every run; replay rebuilds a session tree
// from its own event log and must land on the same packet.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dci/engine.hpp"
#include "dci/event_log.hpp"
#include "dci/scripted.hpp"
#include "dci/wire.hpp"

namespace dci {

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

struct Scenario {
    std::string name;
    SessionEnvelope envelope;
    // ordered exactly like envelope.delegates
    std::vector<std::shared_ptr<ScriptedDelegate>> council;
    Json expectations = Json::object();
};

struct ExpectationCheck {
    std::string field;
    std::string expected;
    std::string actual;
    bool ok = false;
};

struct ScenarioOutcome {
    DecisionPacket packet;
    EventLog log;
    std::string log_path; // empty when the log stayed in memory
    std::vector<ExpectationCheck> report;
};

namespace detail {

[[noreturn]] inline void scenario_fail(const std::string& what) {
    throw DciError("ScenarioParseError", what);
}

inline int parse_round_key(const std::string& key, const std::string& where) {
    try {
        std::size_t used = 0;
        int round = std::stoi(key, &used);
        if (used != key.size() || round < 1)
            scenario_fail(where + ": round keys must be positive integers, "
                                  "got \"" + key + "\"");
        return round;
    } catch (const DciError&) {
        throw;
    } catch (...) {
        scenario_fail(where + ": round keys must be positive integers, got \"" +
                      key + "\"");
    }
}

inline const std::set<std::string>& known_expectation_keys() {
    static const std::set<std::string> keys{
        "decision",          "winner_label",    "content_contains",
        "verdict",           "forced_fallback", "fallback_method",
        "rounds",            "minority_size",   "minority_contains",
        "reopen_min",        "reopen_contains", "reopen_conditions",
        "rationale_contains","confidence",      "evidence_contains"};
    return keys;
}

} // namespace detail

// A scenario document holds "envelope", "scripts" (delegate id -> session id
// -> {proposal, turns, sheets, pick}), and an optional "expect" object.
inline Scenario scenario_from_json(const Json& doc) {
    if (!doc.is_object()) detail::scenario_fail("scenario must be an object");
    Scenario sc;
    sc.name = doc.value("name", "");
    if (!doc.contains("envelope"))
        detail::scenario_fail("missing field envelope");
    try {
        sc.envelope = envelope_from_json(doc.at("envelope"));
    } catch (const DciError& e) {
        detail::scenario_fail(std::string("envelope: ") + e.what());
    }
    if (auto why = envelope_violation(sc.envelope))
        detail::scenario_fail("envelope: " + *why);

    for (const auto& seat : sc.envelope.delegates)
        sc.council.push_back(std::make_shared<ScriptedDelegate>(
            seat.delegate_id, seat.archetype));
    auto by_id = [&](const std::string& id) -> ScriptedDelegate* {
        for (auto& d : sc.council)
            if (d->id() == id) return d.get();
        return nullptr;
    };

    const Json scripts = doc.value("scripts", Json::object());
    if (!scripts.is_object())
        detail::scenario_fail("scripts must be an object keyed by delegate id");
    for (auto it = scripts.begin(); it != scripts.end(); ++it) {
        ScriptedDelegate* delegate = by_id(it.key());
        if (!delegate)
            detail::scenario_fail("scripts: \"" + it.key() +
                                  "\" is not on the council");
        if (!it.value().is_object())
            detail::scenario_fail("scripts." + it.key() +
                                  " must be an object keyed by session id");
        for (auto sit = it.value().begin(); sit != it.value().end(); ++sit) {
            const std::string where = "scripts." + it.key() + "." + sit.key();
            const Json& block = sit.value();
            if (!block.is_object())
                detail::scenario_fail(where + " must be an object");
            ScriptedSession& session = delegate->session(sit.key());
            auto parse_at = [](const std::string& path, auto fn) {
                try {
                    fn();
                } catch (const DciError& e) {
                    if (e.code() == "ScenarioParseError") throw;
                    detail::scenario_fail(path + ": " + e.what());
                } catch (const Json::exception& e) {
                    detail::scenario_fail(path + ": " + std::string(e.what()));
                }
            };
            if (block.contains("proposal"))
                parse_at(where + ".proposal", [&] {
                    session.proposal =
                        proposal_from_json(block.at("proposal"));
                });
            const Json turns = block.value("turns", Json::object());
            for (auto tit = turns.begin(); tit != turns.end(); ++tit) {
                int round =
                    detail::parse_round_key(tit.key(), where + ".turns");
                parse_at(where + ".turns." + tit.key(), [&] {
                    session.turns[round] = turn_from_json(tit.value());
                });
            }
            const Json sheets = block.value("sheets", Json::object());
            for (auto hit = sheets.begin(); hit != sheets.end(); ++hit) {
                int round =
                    detail::parse_round_key(hit.key(), where + ".sheets");
                parse_at(where + ".sheets." + hit.key(), [&] {
                    session.sheets[round] = sheet_from_json(hit.value());
                });
            }
            if (block.contains("pick"))
                parse_at(where + ".pick", [&] {
                    session.pick = block.at("pick").get<std::string>();
                });
        }
    }

    bool stage1_covered = false;
    for (auto& d : sc.council)
        if (d->session(sc.envelope.session_id).proposal) stage1_covered = true;
    if (!stage1_covered)
        detail::scenario_fail("scripts: no delegate proposes anything for "
                              "session " + sc.envelope.session_id +
                              "; scripts must cover the proposal stage");

    sc.expectations = doc.value("expect", Json::object());
    if (!sc.expectations.is_object())
        detail::scenario_fail("expect must be an object");
    for (auto it = sc.expectations.begin(); it != sc.expectations.end(); ++it)
        if (!detail::known_expectation_keys().count(it.key()))
            detail::scenario_fail("expect: unknown expectation \"" + it.key() +
                                  "\"");
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::scenario_fail("cannot open " + path);
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded())
        detail::scenario_fail(path + " is not valid JSON");
    Scenario sc = scenario_from_json(doc);
    if (sc.name.empty()) sc.name = path;
    return sc;
}

namespace detail {

inline std::string last_verdict_kind(const EventLog& log,
                                     const std::string& session) {
    std::string kind = "none";
    for (const auto& e : log.events())
        if (e.session_id == session && e.type == "verdict_reached")
            kind = e.payload.at("kind").get<std::string>();
    return kind;
}

inline int root_rounds_used(const EventLog& log, const std::string& session) {
    for (const auto& e : log.events())
        if (e.session_id == session && e.type == "session_completed")
            return e.payload.at("rounds_used").get<int>();
    return -1;
}

inline bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

} // namespace detail

// Evaluates every expectation in the scenario against the finished run.
// The returned report carries one row per expectation, passed or not.
inline std::vector<ExpectationCheck>
check_expectations(const Scenario& sc, const DecisionPacket& packet,
                   const EventLog& log) {
    std::vector<ExpectationCheck> report;
    const Json& ex = sc.expectations;
    const std::string root = sc.envelope.session_id;
    auto add = [&](const std::string& field, const std::string& expected,
                   const std::string& actual, bool ok) {
        report.push_back(ExpectationCheck{field, expected, actual, ok});
    };

    if (ex.contains("decision"))
        add("decision", ex.at("decision").get<std::string>(),
            packet.decision.option_id,
            ex.at("decision") == packet.decision.option_id);
    if (ex.contains("winner_label"))
        add("winner_label", ex.at("winner_label").get<std::string>(),
            packet.decision.label,
            ex.at("winner_label") == packet.decision.label);
    if (ex.contains("content_contains"))
        add("content_contains", ex.at("content_contains").get<std::string>(),
            packet.decision.content,
            detail::contains(packet.decision.content,
                             ex.at("content_contains").get<std::string>()));
    if (ex.contains("verdict")) {
        std::string kind = detail::last_verdict_kind(log, root);
        add("verdict", ex.at("verdict").get<std::string>(), kind,
            ex.at("verdict") == kind);
    }
    if (ex.contains("forced_fallback"))
        add("forced_fallback", ex.at("forced_fallback").dump(),
            packet.forced_fallback ? "true" : "false",
            ex.at("forced_fallback").get<bool>() == packet.forced_fallback);
    if (ex.contains("fallback_method")) {
        std::string actual = packet.fallback_method
                                 ? to_string(*packet.fallback_method)
                                 : "none";
        add("fallback_method", ex.at("fallback_method").get<std::string>(),
            actual, ex.at("fallback_method") == actual);
    }
    if (ex.contains("rounds")) {
        int used = detail::root_rounds_used(log, root);
        add("rounds", ex.at("rounds").dump(), std::to_string(used),
            ex.at("rounds").get<int>() == used);
    }
    if (ex.contains("minority_size"))
        add("minority_size", ex.at("minority_size").dump(),
            std::to_string(packet.minority_report.size()),
            ex.at("minority_size").get<std::size_t>() ==
                packet.minority_report.size());
    if (ex.contains("minority_contains")) {
        std::string needle = ex.at("minority_contains").get<std::string>();
        bool found = false;
        std::string joined;
        for (const auto& m : packet.minority_report) {
            joined += m.position + " | " + m.reasoning + "\n";
            if (detail::contains(m.position, needle) ||
                detail::contains(m.reasoning, needle))
                found = true;
        }
        add("minority_contains", needle, joined, found);
    }
    if (ex.contains("reopen_min"))
        add("reopen_min", ex.at("reopen_min").dump(),
            std::to_string(packet.reopen_conditions.size()),
            packet.reopen_conditions.size() >=
                ex.at("reopen_min").get<std::size_t>());
    if (ex.contains("reopen_contains"))
        for (const auto& needle : ex.at("reopen_contains")) {
            bool found = false;
            for (const auto& c : packet.reopen_conditions)
                if (detail::contains(c, needle.get<std::string>()))
                    found = true;
            add("reopen_contains", needle.get<std::string>(),
                Json(packet.reopen_conditions).dump(), found);
        }
    if (ex.contains("reopen_conditions")) {
        Json actual = packet.reopen_conditions;
        add("reopen_conditions", ex.at("reopen_conditions").dump(),
            actual.dump(), ex.at("reopen_conditions") == actual);
    }
    if (ex.contains("rationale_contains"))
        add("rationale_contains",
            ex.at("rationale_contains").get<std::string>(), packet.rationale,
            detail::contains(packet.rationale,
                             ex.at("rationale_contains").get<std::string>()));
    if (ex.contains("confidence"))
        add("confidence", ex.at("confidence").dump(),
            std::to_string(packet.confidence),
            std::fabs(ex.at("confidence").get<double>() - packet.confidence) <=
                1e-9);
    if (ex.contains("evidence_contains"))
        for (const auto& needle : ex.at("evidence_contains")) {
            bool found = false;
            for (const auto& s : packet.supporting_evidence)
                if (detail::contains(s, needle.get<std::string>()))
                    found = true;
            add("evidence_contains", needle.get<std::string>(),
                Json(packet.supporting_evidence).dump(), found);
        }
    return report;
}

// Runs a parsed scenario. Expectation failures throw after the whole report
// is assembled, naming the first failed field with both values.
inline ScenarioOutcome run_scenario(const Scenario& sc,
                                    const std::string& log_path = "") {
    ScenarioOutcome out;
    DelegateRoster roster(sc.council.begin(), sc.council.end());
    out.packet = run_session(sc.envelope, roster, out.log);
    out.report = check_expectations(sc, out.packet, out.log);
    if (!log_path.empty()) {
        std::ofstream f(log_path);
        if (!f)
            throw DciError("ScenarioParseError",
                           "cannot write log to " + log_path);
        out.log.write_jsonl(f);
        out.log_path = log_path;
    }
    for (const auto& check : out.report)
        if (!check.ok)
            throw DciError("ExpectationMismatch",
                           check.field + ": expected " + check.expected +
                               ", actual " + check.actual);
    return out;
}

inline ScenarioOutcome run_scenario_file(const std::string& path,
                                         std::string log_path = "") {
    Scenario sc = load_scenario(path);
    if (log_path.empty()) {
        log_path = path;
        std::size_t dot = log_path.rfind(".json");
        if (dot != std::string::npos) log_path.erase(dot);
        log_path += ".log.jsonl";
    }
    return run_scenario(sc, log_path);
}

// ---------------------------------------------------------------------------
// Termination fuzzer
// ---------------------------------------------------------------------------

struct FuzzRanges {
    std::vector<int> council_sizes{2, 3, 4, 5};
    std::vector<int> max_rounds{1, 2, 3, 4};
    std::vector<int> max_depths{0, 1, 2};
    std::vector<int> spawn_caps{0, 1, 2};
    std::vector<int> ceilings{4, 10, 20, 50};
    std::vector<double> margins{0.05, 0.15, 0.3};
    std::vector<double> thresholds{0.5, 0.6, 0.75};
    std::vector<FuzzProfile> profiles{
        FuzzProfile::cooperative, FuzzProfile::adversarial,
        FuzzProfile::spawn_happy, FuzzProfile::flaky};
    // when set, some runs draw a different profile per seat
    bool mixed_populations = true;
};

struct FuzzReport {
    long long runs = 0;
    long long terminations = 0;
    int max_rounds_observed = 0;
    double fallback_rate = 0.0;
    long long bound_violations = 0;
    long long completeness_failures = 0;
    std::vector<std::string> failures; // one line per failed run
};

inline std::optional<std::string> ranges_violation(const FuzzRanges& r) {
    auto empty = [](const auto& v) { return v.empty(); };
    if (empty(r.council_sizes) || empty(r.max_rounds) || empty(r.max_depths) ||
        empty(r.spawn_caps) || empty(r.ceilings) || empty(r.margins) ||
        empty(r.thresholds) || empty(r.profiles))
        return "every range needs at least one value";
    for (int n : r.council_sizes)
        if (n < 2) return "council sizes must be at least 2";
    for (int n : r.max_rounds)
        if (n < 1) return "round budgets must be at least 1";
    for (int n : r.max_depths)
        if (n < 0) return "depths cannot be negative";
    for (int n : r.spawn_caps)
        if (n < 0) return "spawn caps cannot be negative";
    for (int n : r.ceilings)
        if (n < 1) return "ceilings must be at least 1";
    for (double m : r.margins)
        if (m <= 0.0) return "margins must be positive";
    for (double t : r.thresholds)
        if (t < 0.0 || t >= 1.0) return "thresholds must sit in [0, 1)";
    return std::nullopt;
}

// Runs n randomized sessions and checks, per run, that the engine returned,
// that the packet is complete, and that the whole tree stayed inside
// min(max_rounds * session count bound, ceiling). Failures never throw; they
// land in the report so a single counterexample is visible with its seed.
inline FuzzReport fuzz_termination(unsigned long long seed, int n_runs,
                                   const FuzzRanges& ranges = FuzzRanges{}) {
    if (auto why = ranges_violation(ranges))
        throw DciError("InvalidEnvelope", "fuzz ranges: " + *why);

    FuzzReport report;
    long long fallbacks = 0;
    for (int run = 0; run < n_runs; ++run) {
        std::seed_seq seq{static_cast<unsigned long long>(seed),
                          static_cast<unsigned long long>(run)};
        std::mt19937 rng(seq);
        auto pick_int = [&](const std::vector<int>& v) {
            return v[rng() % v.size()];
        };
        auto pick_double = [&](const std::vector<double>& v) {
            return v[rng() % v.size()];
        };

        FuzzProfile profile = ranges.profiles[rng() % ranges.profiles.size()];
        bool mixed = ranges.mixed_populations && ranges.profiles.size() > 1 &&
                     rng() % 4 == 0;

        SessionEnvelope env;
        env.session_id = "F-" + std::to_string(run);
        env.problem = "fuzzed decision problem " + std::to_string(run);
        env.max_rounds = pick_int(ranges.max_rounds);
        env.max_options = 5;
        env.finalist_count = 3;
        env.convergence_margin = pick_double(ranges.margins);
        env.majority_threshold = pick_double(ranges.thresholds);
        env.max_depth = pick_int(ranges.max_depths);
        env.spawn_cap = pick_int(ranges.spawn_caps);
        env.tree_round_ceiling = pick_int(ranges.ceilings);
        int criteria_count = 1 + static_cast<int>(rng() % 3);
        for (int c = 0; c < criteria_count; ++c)
            env.criteria.push_back(
                Criterion{"c" + std::to_string(c + 1),
                          1.0 + static_cast<double>(rng() % 3)});

        int council = pick_int(ranges.council_sizes);
        // the adversarial population splits into two equal camps; an odd
        // council would let one camp win by majority and the run would stop
        // probing the fallback path
        if (!mixed && profile == FuzzProfile::adversarial && council % 2 != 0)
            council += 1;
        const ArchetypeKind kinds[4] = {
            ArchetypeKind::framer, ArchetypeKind::explorer,
            ArchetypeKind::challenger, ArchetypeKind::integrator};
        DelegateRoster roster;
        for (int i = 0; i < council; ++i) {
            std::string id = "d" + std::to_string(i + 1);
            env.delegates.push_back(CouncilSeat{id, kinds[i % 4]});
            FuzzProfile seat_profile =
                mixed ? ranges.profiles[rng() % ranges.profiles.size()]
                      : profile;
            roster.push_back(std::make_shared<RandomDelegate>(
                id, kinds[i % 4], seat_profile,
                static_cast<unsigned long>(rng()), i));
        }

        report.runs += 1;
        std::string tag = "run " + std::to_string(run) + " (seed " +
                          std::to_string(seed) + ", profile " +
                          (mixed ? "mixed" : to_string(profile)) + ")";
        EventLog log;
        DecisionPacket packet;
        try {
            packet = run_session(env, roster, log);
        } catch (const std::exception& e) {
            report.failures.push_back(tag + ": threw " + e.what());
            continue;
        }
        report.terminations += 1;
        if (packet.forced_fallback) fallbacks += 1;

        auto missing = validate_completeness(packet);
        if (!missing.empty()) {
            report.completeness_failures += 1;
            report.failures.push_back(tag + ": packet missing " + missing[0]);
        }

        int tree_rounds = 0;
        for (const auto& e : log.events())
            if (e.type == "session_completed")
                tree_rounds = std::max(
                    tree_rounds, e.payload.at("tree_rounds").get<int>());
        long long bound = std::min<long long>(
            termination_bound(env.max_rounds,
                              session_caps(env.spawn_cap, env.max_depth)),
            env.tree_round_ceiling);
        if (tree_rounds > bound) {
            report.bound_violations += 1;
            report.failures.push_back(
                tag + ": used " + std::to_string(tree_rounds) +
                " rounds against a bound of " + std::to_string(bound));
        }
        report.max_rounds_observed =
            std::max(report.max_rounds_observed, tree_rounds);
    }
    report.fallback_rate =
        report.runs > 0 ? static_cast<double>(fallbacks) / report.runs : 0.0;
    return report;
}

inline Json to_json(const FuzzReport& r) {
    return Json{{"runs", r.runs},
                {"terminations", r.terminations},
                {"max_rounds_observed", r.max_rounds_observed},
                {"fallback_rate", r.fallback_rate},
                {"bound_violations", r.bound_violations},
                {"completeness_failures", r.completeness_failures},
                {"failures", r.failures}};
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

// Everything a delegate ever emitted, indexed from a parsed event log. The
// engine logs raw outputs (including rejected sheets and proposals), so
// feeding them back through a fresh run takes exactly the original path.
struct ReplayIndex {
    std::map<std::pair<std::string, std::string>, Proposal> proposals;
    std::map<std::tuple<std::string, std::string, int>, DelegateTurn> turns;
    std::map<std::tuple<std::string, std::string, int>, ScoreSheet> sheets;
    std::map<std::pair<std::string, std::string>,
             std::optional<std::string>> picks;

    static ReplayIndex build(const std::vector<Event>& events) {
        ReplayIndex idx;
        for (const auto& e : events) {
            try {
                if (e.type == "proposal_submitted" ||
                    e.type == "proposal_rejected") {
                    idx.proposals[{e.session_id,
                                   e.payload.at("author")
                                       .get<std::string>()}] =
                        proposal_from_json(e.payload.at("proposal"));
                } else if (e.type == "turn_submitted") {
                    idx.turns[{e.session_id,
                               e.payload.at("author").get<std::string>(),
                               e.round}] =
                        turn_from_json(e.payload.at("turn"));
                } else if (e.type == "sheet_recorded" ||
                           e.type == "sheet_rejected") {
                    idx.sheets[{e.session_id,
                                e.payload.at("delegate").get<std::string>(),
                                e.round}] =
                        sheet_from_json(e.payload.at("sheet"));
                } else if (e.type == "integrator_pick") {
                    std::optional<std::string> picked;
                    if (!e.payload.at("picked").is_null())
                        picked = e.payload.at("picked").get<std::string>();
                    idx.picks[{e.session_id,
                               e.payload.at("delegate").get<std::string>()}] =
                        picked;
                }
            } catch (const DciError& err) {
                throw DciError("LogCorruption",
                               "event " + std::to_string(e.seq) + " (" +
                                   e.type + "): " + err.what());
            } catch (const Json::exception& err) {
                throw DciError("LogCorruption",
                               "event " + std::to_string(e.seq) + " (" +
                                   e.type + "): " + err.what());
            }
        }
        return idx;
    }
};

class ReplayDelegate : public IDelegate {
public:
    ReplayDelegate(std::string id, ArchetypeKind kind,
                   std::shared_ptr<const ReplayIndex> index)
        : id_(std::move(id)), kind_(kind), index_(std::move(index)) {}

    std::string id() const override { return id_; }
    ArchetypeKind archetype() const override { return kind_; }

    void begin_session(const std::string& session_id) override {
        stack_.push_back(session_id);
    }
    void end_session(const std::string&) override {
        if (!stack_.empty()) stack_.pop_back();
    }

    std::optional<Proposal>
    generate_proposal(const std::string&) override {
        auto it = index_->proposals.find({session(), id_});
        if (it == index_->proposals.end()) return std::nullopt;
        return it->second;
    }

    std::optional<DelegateTurn>
    contribute(const std::vector<CandidateOption>&, int round) override {
        round_ = round;
        auto it = index_->turns.find({session(), id_, round});
        if (it == index_->turns.end()) return std::nullopt;
        return it->second;
    }

    std::optional<ScoreSheet>
    score(const std::vector<CandidateOption>&,
          const std::vector<Criterion>&) override {
        auto it = index_->sheets.find({session(), id_, round_});
        if (it == index_->sheets.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::string>
    integrator_pick(const std::vector<std::string>&) override {
        auto it = index_->picks.find({session(), id_});
        if (it == index_->picks.end()) return std::nullopt;
        return it->second;
    }

private:
    std::string session() const {
        return stack_.empty() ? std::string("S-1") : stack_.back();
    }

    std::string id_;
    ArchetypeKind kind_;
    std::shared_ptr<const ReplayIndex> index_;
    std::vector<std::string> stack_;
    int round_ = 0;
};

struct ReplayResult {
    DecisionPacket packet;   // from the fresh run
    DecisionPacket original; // from the log being replayed
    bool identical = false;  // field-identical packets
    EventLog log;            // the replayed event stream
};

inline ReplayResult replay(const std::vector<Event>& events) {
    if (events.empty())
        throw DciError("LogCorruption", "log contains no events");
    const Event& first = events.front();
    if (first.type != "session_started")
        throw DciError("LogCorruption",
                       "log does not begin with session_started");
    SessionEnvelope env;
    try {
        env = envelope_from_json(first.payload.at("envelope"));
    } catch (const DciError& e) {
        throw DciError("LogCorruption",
                       std::string("session_started: ") + e.what());
    } catch (const Json::exception& e) {
        throw DciError("LogCorruption",
                       std::string("session_started: ") + e.what());
    }
    const std::string root = first.session_id;

    ReplayResult out;
    bool have_original = false;
    for (const auto& e : events)
        if (e.session_id == root && e.type == "packet_finalized") {
            try {
                out.original = packet_from_json(e.payload.at("packet"));
            } catch (const std::exception& err) {
                throw DciError("LogCorruption",
                               std::string("packet_finalized: ") + err.what());
            }
            have_original = true;
        }
    if (!have_original)
        throw DciError("LogCorruption",
                       "log holds no finalized packet for session " + root);

    auto index = std::make_shared<const ReplayIndex>(ReplayIndex::build(events));
    DelegateRoster roster;
    for (const auto& seat : env.delegates)
        roster.push_back(std::make_shared<ReplayDelegate>(
            seat.delegate_id, seat.archetype, index));

    auto ledger = std::make_shared<RoundLedger>();
    ledger->rounds_used_in_tree =
        first.payload.value("tree_rounds_at_start", 0);

    out.packet = run_session(env, roster, out.log, ledger);
    out.identical = to_json(out.packet) == to_json(out.original);
    return out;
}

inline ReplayResult replay(const std::string& jsonl_text) {
    return replay(parse_event_log(jsonl_text));
}

inline ReplayResult replay_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DciError("LogCorruption", "cannot open " + path);
    return replay(parse_event_log(in));
}

} // namespace dci
