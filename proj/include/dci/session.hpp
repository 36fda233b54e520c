#pragma once
// Session envelope, phase progression, round budgets, and bounded recursive
// sub-sessions sharing one tree-wide round ledger.

#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dci/delegate.hpp"
#include "dci/error.hpp"
#include "dci/grammar.hpp"
#include "dci/option.hpp"
#include "dci/workspace.hpp"

namespace dci {

struct CouncilSeat {
    std::string delegate_id;
    ArchetypeKind archetype = ArchetypeKind::framer;
};

struct SessionEnvelope {
    std::string session_id = "S-1";
    std::string problem;
    std::vector<CouncilSeat> delegates;
    int max_rounds = 2;
    std::vector<Criterion> criteria;
    int max_options = 5;
    int finalist_count = 3;
    double convergence_margin = 0.15;
    double majority_threshold = 0.5; // strict: share must exceed it
    std::string fallback_rule = "outranking";
    int depth = 0;
    int max_depth = 2;
    int tree_round_ceiling = 50;
    int spawn_cap = 2; // children one session may spawn (the per-depth cap)
    // domain fit phi per delegate, per criterion; missing entries mean 1.
    std::map<std::string, std::map<std::string, double>> domain_fit;
};

inline std::optional<std::string>
envelope_violation(const SessionEnvelope& e) {
    if (e.problem.empty()) return "problem text is empty";
    if (e.delegates.size() < 2) return "council needs at least 2 delegates";
    if (e.max_rounds < 1) return "max_rounds must be >= 1";
    if (e.criteria.empty()) return "criteria list is empty";
    if (e.max_options < 1) return "max_options must be >= 1";
    if (e.finalist_count < 1 || e.finalist_count > e.max_options)
        return "finalist_count must lie in [1, max_options]";
    if (!(e.convergence_margin > 0.0)) return "convergence_margin must be > 0";
    if (e.majority_threshold < 0.0 || e.majority_threshold >= 1.0)
        return "majority_threshold must lie in [0,1)";
    if (e.depth < 0 || e.depth > e.max_depth)
        return "depth must lie in [0, max_depth]";
    if (e.tree_round_ceiling < 1) return "tree_round_ceiling must be >= 1";
    if (e.spawn_cap < 0) return "spawn_cap must be >= 0";
    double wsum = 0.0;
    for (const auto& c : e.criteria) {
        if (c.id.empty()) return "criterion with empty id";
        if (c.weight < 0.0) return "criterion weight must be >= 0";
        wsum += c.weight;
    }
    if (!(wsum > 0.0)) return "criterion weights sum to zero";
    std::set<std::string> ids;
    for (const auto& d : e.delegates)
        if (!ids.insert(d.delegate_id).second)
            return "duplicate delegate id " + d.delegate_id;
    std::set<std::string> cids;
    for (const auto& c : e.criteria)
        if (!cids.insert(c.id).second)
            return "duplicate criterion id " + c.id;
    return std::nullopt;
}

// One counter for the whole session tree; every Stage 3-6 iteration
// anywhere consumes from it.
struct RoundLedger {
    int rounds_used_in_tree = 0;

    bool try_consume(int ceiling) {
        if (rounds_used_in_tree >= ceiling) return false;
        ++rounds_used_in_tree;
        return true;
    }
    bool exhausted(int ceiling) const { return rounds_used_in_tree >= ceiling; }
};

struct SessionState {
    SessionEnvelope envelope; // weights normalized
    Workspace workspace;
    Phase phase = Phase::arrival;
    int current_round = 0;  // 1-based once the loop starts
    int rounds_used = 0;    // per-session counter
    int rounds_budget = 0;  // max_rounds minus what spawns carved away
    int children_spawned = 0;
    std::shared_ptr<RoundLedger> ledger;
    std::set<std::string> known_move_ids;
    std::map<std::string, DelegateState> delegate_states;

    // phase exit artifacts
    int stage1_turns = 0;        // proposals received plus skipped turns
    bool candidates_ready = false;
    bool decided = false;

    bool weights_renormalized = false;
    double original_weight_sum = 1.0;

    int remaining_rounds() const { return rounds_budget - rounds_used; }
};

// Validates the envelope, normalizes criterion weights to sum 1, seeds the
// workspace with the problem, and registers with the tree ledger (creating
// one for a root session).
inline SessionState init_session(const SessionEnvelope& envelope,
                                 std::shared_ptr<RoundLedger> ledger = nullptr) {
    if (auto why = envelope_violation(envelope))
        throw DciError("InvalidEnvelope", *why);

    SessionState s;
    s.envelope = envelope;
    double wsum = 0.0;
    for (const auto& c : s.envelope.criteria) wsum += c.weight;
    s.original_weight_sum = wsum;
    if (std::abs(wsum - 1.0) > 1e-12) {
        for (auto& c : s.envelope.criteria) c.weight /= wsum;
        s.weights_renormalized = true;
    }

    s.workspace = Workspace::init(envelope.problem);
    s.phase = Phase::arrival;
    s.rounds_budget = envelope.max_rounds;
    s.ledger = ledger ? std::move(ledger) : std::make_shared<RoundLedger>();
    for (const auto& seat : envelope.delegates) {
        DelegateState d;
        d.view = "";
        d.confidence = 0.5;
        s.delegate_states[seat.delegate_id] = d;
    }
    return s;
}

// Strictly forward phase step, gated on the current phase's exit artifact.
inline void advance_phase(SessionState& s) {
    switch (s.phase) {
        case Phase::arrival:
            if (s.workspace.problem_view().empty())
                throw DciError("MissingExitArtifact",
                               "arrival needs a shared problem statement");
            s.phase = Phase::independent_first_thought;
            return;
        case Phase::independent_first_thought:
            if (s.stage1_turns < int(s.envelope.delegates.size()))
                throw DciError("MissingExitArtifact",
                               "independent first thought needs one proposal "
                               "(or logged skip) per delegate, have " +
                                   std::to_string(s.stage1_turns) + " of " +
                                   std::to_string(s.envelope.delegates.size()));
            s.phase = Phase::mutual_engagement;
            return;
        case Phase::mutual_engagement:
            if (!s.candidates_ready)
                throw DciError("MissingExitArtifact",
                               "mutual engagement needs a candidate option set");
            s.phase = Phase::collective_shaping;
            return;
        case Phase::collective_shaping:
            if (!s.decided)
                throw DciError("MissingExitArtifact",
                               "collective shaping needs a decided winner");
            s.phase = Phase::closure;
            return;
        case Phase::closure:
            throw DciError("PhaseMismatch", "closure is the final phase");
    }
}

// The one permitted repeat: the round loop re-enters mutual engagement from
// collective shaping while rounds remain.
inline void loop_back_phase(SessionState& s) {
    if (s.phase != Phase::collective_shaping)
        throw DciError("PhaseMismatch",
                       "loop-back is only defined from collective_shaping");
    s.phase = Phase::mutual_engagement;
}

struct SpawnRefusal {
    std::string code; // DepthExhausted, CeilingExhausted, SpawnCapExhausted,
                      // BudgetExhausted
    std::string reason;
};

using SpawnOutcome = std::variant<SessionEnvelope, SpawnRefusal>;

// Child envelopes are depth plus one, share the tree ledger, and take
// min(requested, parent remaining - 1) rounds carved out of the parent's
// budget, so the parent always retains at least one round.
inline SpawnOutcome spawn_subsession(SessionState& parent,
                                     const std::string& subproblem,
                                     int requested_rounds) {
    const SessionEnvelope& pe = parent.envelope;
    if (pe.depth + 1 > pe.max_depth)
        return SpawnRefusal{"DepthExhausted",
                            "child depth " + std::to_string(pe.depth + 1) +
                                " would exceed max_depth " +
                                std::to_string(pe.max_depth)};
    if (parent.ledger->exhausted(pe.tree_round_ceiling))
        return SpawnRefusal{"CeilingExhausted",
                            "tree used all " +
                                std::to_string(pe.tree_round_ceiling) +
                                " rounds"};
    if (parent.children_spawned >= pe.spawn_cap)
        return SpawnRefusal{"SpawnCapExhausted",
                            "session already spawned " +
                                std::to_string(parent.children_spawned) +
                                " children (cap " +
                                std::to_string(pe.spawn_cap) + ")"};
    int grant = std::min(requested_rounds, parent.remaining_rounds() - 1);
    if (grant < 1)
        return SpawnRefusal{"BudgetExhausted",
                            "parent has " +
                                std::to_string(parent.remaining_rounds()) +
                                " rounds left; carving would leave the child "
                                "with none"};

    SessionEnvelope child = pe;
    child.session_id =
        pe.session_id + "." + std::to_string(parent.children_spawned + 1);
    child.problem = subproblem;
    child.depth = pe.depth + 1;
    child.max_rounds = grant;

    parent.rounds_budget -= grant;
    parent.children_spawned += 1;
    return child;
}

// Theorem bound: rounds per session times sessions per tree.
inline long long termination_bound(int max_rounds,
                                   const std::vector<long long>& per_depth_caps) {
    long long sessions = std::accumulate(per_depth_caps.begin(),
                                         per_depth_caps.end(), 0LL);
    return static_cast<long long>(max_rounds) * sessions;
}

// Per-depth session caps implied by a per-session spawn cap:
// B_0 = 1, B_d = spawn_cap^d.
inline std::vector<long long> session_caps(int spawn_cap, int max_depth) {
    std::vector<long long> caps;
    long long level = 1;
    for (int d = 0; d <= max_depth; ++d) {
        caps.push_back(level);
        level *= spawn_cap;
    }
    return caps;
}

// ---------------------------------------------------------------------------
// Envelope wire form (config file field names)
// ---------------------------------------------------------------------------

inline Json to_json(const SessionEnvelope& e) {
    Json criteria = Json::array();
    for (const auto& c : e.criteria)
        criteria.push_back(Json{{"id", c.id}, {"weight", c.weight}});
    Json delegates = Json::array();
    for (const auto& d : e.delegates)
        delegates.push_back(Json{{"id", d.delegate_id},
                                 {"archetype", to_string(d.archetype)}});
    Json doc{{"session_id", e.session_id},
             {"problem", e.problem},
             {"delegates", delegates},
             {"criteria", criteria},
             {"max_rounds", e.max_rounds},
             {"max_options", e.max_options},
             {"finalist_count", e.finalist_count},
             {"convergence_margin", e.convergence_margin},
             {"majority_threshold", e.majority_threshold},
             {"fallback_rule", e.fallback_rule},
             {"depth", e.depth},
             {"max_depth", e.max_depth},
             {"tree_ceiling", e.tree_round_ceiling},
             {"spawn_cap", e.spawn_cap}};
    if (!e.domain_fit.empty()) {
        Json fit = Json::object();
        for (const auto& [delegate, by_criterion] : e.domain_fit) {
            Json row = Json::object();
            for (const auto& [criterion, phi] : by_criterion)
                row[criterion] = phi;
            fit[delegate] = row;
        }
        doc["domain_fit"] = fit;
    }
    return doc;
}

inline SessionEnvelope envelope_from_json(const Json& doc) {
    SessionEnvelope e;
    if (!doc.is_object())
        throw DciError("InvalidEnvelope", "envelope must be an object");
    auto get = [&](const char* key, auto& out, bool required) {
        if (!doc.contains(key)) {
            if (required)
                throw DciError("InvalidEnvelope",
                               std::string("missing field ") + key);
            return;
        }
        try {
            out = doc.at(key).get<std::decay_t<decltype(out)>>();
        } catch (const Json::exception&) {
            throw DciError("InvalidEnvelope",
                           std::string("field has wrong type: ") + key);
        }
    };
    get("session_id", e.session_id, false);
    get("problem", e.problem, true);
    get("max_rounds", e.max_rounds, false);
    get("max_options", e.max_options, false);
    get("finalist_count", e.finalist_count, false);
    get("convergence_margin", e.convergence_margin, false);
    get("majority_threshold", e.majority_threshold, false);
    get("fallback_rule", e.fallback_rule, false);
    get("depth", e.depth, false);
    get("max_depth", e.max_depth, false);
    get("tree_ceiling", e.tree_round_ceiling, false);
    get("spawn_cap", e.spawn_cap, false);

    if (!doc.contains("delegates") || !doc.at("delegates").is_array())
        throw DciError("InvalidEnvelope", "missing delegates array");
    for (const auto& d : doc.at("delegates")) {
        CouncilSeat seat;
        if (!d.contains("id") || !d.contains("archetype"))
            throw DciError("InvalidEnvelope",
                           "delegate entries need id and archetype");
        seat.delegate_id = d.at("id").get<std::string>();
        auto kind = archetype_from_string(d.at("archetype").get<std::string>());
        if (!kind)
            throw DciError("InvalidEnvelope",
                           "unknown archetype " +
                               d.at("archetype").get<std::string>());
        seat.archetype = *kind;
        e.delegates.push_back(seat);
    }
    if (!doc.contains("criteria") || !doc.at("criteria").is_array())
        throw DciError("InvalidEnvelope", "missing criteria array");
    for (const auto& c : doc.at("criteria")) {
        if (!c.contains("id") || !c.contains("weight"))
            throw DciError("InvalidEnvelope",
                           "criterion entries need id and weight");
        e.criteria.push_back(Criterion{c.at("id").get<std::string>(),
                                       c.at("weight").get<double>()});
    }
    if (doc.contains("domain_fit")) {
        for (auto it = doc.at("domain_fit").begin();
             it != doc.at("domain_fit").end(); ++it) {
            for (auto cit = it.value().begin(); cit != it.value().end(); ++cit)
                e.domain_fit[it.key()][cit.key()] = cit.value().get<double>();
        }
    }
    return e;
}

} // namespace dci
