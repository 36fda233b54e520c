#pragma once
// Interaction grammar: typed epistemic moves, act families, response grammar,
// and the move wire format (parse / serialize / validate).

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dci/error.hpp"

namespace dci {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Wire vocabulary
// ---------------------------------------------------------------------------

enum class SpeechMode {
    exploratory,
    analytical,
    critical,
    integrative,
    reflective,
    decisional,
};

enum class Act {
    frame,
    propose,
    clarify,
    ask,
    challenge,
    extend,
    reframe,
    bridge,
    synthesize,
    ground,
    update,
    recommend,
    spawn,
    recall,
};

enum class Family {
    orienting,
    generative,
    critical,
    integrative,
    epistemic,
    decisional,
};

enum class MoveForce { soft, hard };

enum class Phase {
    arrival,
    independent_first_thought,
    mutual_engagement,
    collective_shaping,
    closure,
};

// Responses certain acts invite. Only challenge and synthesize have a
// defined response set; every other act maps to the empty set.
enum class ResponseKind {
    defend,
    refine,
    update,
    concede,
    affirm,
    sharpen,
    surface_omission,
    recommend,
};

inline constexpr std::array<Act, 14> kAllActs = {
    Act::frame,   Act::propose, Act::clarify,    Act::ask,
    Act::challenge, Act::extend, Act::reframe,   Act::bridge,
    Act::synthesize, Act::ground, Act::update,   Act::recommend,
    Act::spawn,   Act::recall,
};

inline constexpr std::array<SpeechMode, 6> kAllModes = {
    SpeechMode::exploratory, SpeechMode::analytical,  SpeechMode::critical,
    SpeechMode::integrative, SpeechMode::reflective,  SpeechMode::decisional,
};

inline constexpr std::array<Phase, 5> kAllPhases = {
    Phase::arrival,
    Phase::independent_first_thought,
    Phase::mutual_engagement,
    Phase::collective_shaping,
    Phase::closure,
};

inline const char* to_string(Act a) {
    switch (a) {
        case Act::frame:      return "frame";
        case Act::propose:    return "propose";
        case Act::clarify:    return "clarify";
        case Act::ask:        return "ask";
        case Act::challenge:  return "challenge";
        case Act::extend:     return "extend";
        case Act::reframe:    return "reframe";
        case Act::bridge:     return "bridge";
        case Act::synthesize: return "synthesize";
        case Act::ground:     return "ground";
        case Act::update:     return "update";
        case Act::recommend:  return "recommend";
        case Act::spawn:      return "spawn";
        case Act::recall:     return "recall";
    }
    return "unknown";
}

inline const char* to_string(SpeechMode m) {
    switch (m) {
        case SpeechMode::exploratory: return "exploratory";
        case SpeechMode::analytical:  return "analytical";
        case SpeechMode::critical:    return "critical";
        case SpeechMode::integrative: return "integrative";
        case SpeechMode::reflective:  return "reflective";
        case SpeechMode::decisional:  return "decisional";
    }
    return "unknown";
}

inline const char* to_string(Family f) {
    switch (f) {
        case Family::orienting:   return "Orienting";
        case Family::generative:  return "Generative";
        case Family::critical:    return "Critical";
        case Family::integrative: return "Integrative";
        case Family::epistemic:   return "Epistemic";
        case Family::decisional:  return "Decisional";
    }
    return "unknown";
}

inline const char* to_string(MoveForce f) {
    return f == MoveForce::soft ? "soft" : "hard";
}

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::arrival:                   return "arrival";
        case Phase::independent_first_thought: return "independent_first_thought";
        case Phase::mutual_engagement:         return "mutual_engagement";
        case Phase::collective_shaping:        return "collective_shaping";
        case Phase::closure:                   return "closure";
    }
    return "unknown";
}

inline const char* to_string(ResponseKind r) {
    switch (r) {
        case ResponseKind::defend:           return "defend";
        case ResponseKind::refine:           return "refine";
        case ResponseKind::update:           return "update";
        case ResponseKind::concede:          return "concede";
        case ResponseKind::affirm:           return "affirm";
        case ResponseKind::sharpen:          return "sharpen";
        case ResponseKind::surface_omission: return "surface-omission";
        case ResponseKind::recommend:        return "recommend";
    }
    return "unknown";
}

inline std::optional<Act> act_from_string(std::string_view s) {
    for (Act a : kAllActs)
        if (s == to_string(a)) return a;
    return std::nullopt;
}

inline std::optional<SpeechMode> mode_from_string(std::string_view s) {
    for (SpeechMode m : kAllModes)
        if (s == to_string(m)) return m;
    return std::nullopt;
}

inline std::optional<MoveForce> force_from_string(std::string_view s) {
    if (s == "soft") return MoveForce::soft;
    if (s == "hard") return MoveForce::hard;
    return std::nullopt;
}

inline std::optional<Phase> phase_from_string(std::string_view s) {
    for (Phase p : kAllPhases)
        if (s == to_string(p)) return p;
    return std::nullopt;
}

// Family is a total function of the act.
inline Family act_family(Act a) {
    switch (a) {
        case Act::frame:
        case Act::clarify:
        case Act::reframe:
            return Family::orienting;
        case Act::propose:
        case Act::extend:
        case Act::spawn:
            return Family::generative;
        case Act::ask:
        case Act::challenge:
            return Family::critical;
        case Act::bridge:
        case Act::synthesize:
        case Act::recall:
            return Family::integrative;
        case Act::ground:
        case Act::update:
            return Family::epistemic;
        case Act::recommend:
            return Family::decisional;
    }
    return Family::decisional; // unreachable
}

inline std::set<ResponseKind> expected_responses(Act a) {
    switch (a) {
        case Act::challenge:
            return {ResponseKind::defend, ResponseKind::refine,
                    ResponseKind::update, ResponseKind::concede};
        case Act::synthesize:
            return {ResponseKind::affirm, ResponseKind::sharpen,
                    ResponseKind::surface_omission, ResponseKind::recommend};
        default:
            return {};
    }
}

// ---------------------------------------------------------------------------
// Move
// ---------------------------------------------------------------------------

// One typed epistemic act: the (mode, act, intent) triple plus its target,
// force, and confidence. `extras` holds unknown wire fields verbatim.
struct Move {
    std::string move_id;
    std::string session_id;
    int round = 1;
    std::string phase;
    std::string actor;
    SpeechMode mode = SpeechMode::exploratory;
    Act act = Act::propose;
    std::string intent;
    std::string target;
    std::string content;
    double confidence = 0.5;
    MoveForce move_force = MoveForce::soft;
    bool meta_level = false;
    Json extras = Json::object();
};

// Targets take the form "contribution:<move_id>", "problem" or "workspace".
struct TargetRef {
    enum class Kind { problem, workspace, contribution };
    Kind kind = Kind::problem;
    std::string move_id; // set when kind == contribution
};

inline std::optional<TargetRef> parse_target(std::string_view s) {
    if (s == "problem") return TargetRef{TargetRef::Kind::problem, ""};
    if (s == "workspace") return TargetRef{TargetRef::Kind::workspace, ""};
    constexpr std::string_view prefix = "contribution:";
    if (s.size() > prefix.size() && s.substr(0, prefix.size()) == prefix)
        return TargetRef{TargetRef::Kind::contribution,
                         std::string(s.substr(prefix.size()))};
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct ParseError {
    std::string code;    // MissingField, UnknownAct, UnknownMode,
                         // OutOfRangeConfidence, InvalidField
    std::string field;
    std::string message;
};

struct ParseResult {
    std::optional<Move> move;
    std::optional<ParseError> error;
    bool ok() const { return move.has_value(); }
};

namespace detail {

inline const std::array<const char*, 13>& move_field_names() {
    static const std::array<const char*, 13> names = {
        "move_id", "session_id", "round",      "phase",      "actor",
        "mode",    "act",        "intent",     "target",     "content",
        "confidence", "move_force", "meta_level"};
    return names;
}

inline ParseResult parse_fail(std::string code, std::string field,
                              std::string msg) {
    return ParseResult{std::nullopt, ParseError{std::move(code),
                                                std::move(field),
                                                std::move(msg)}};
}

} // namespace detail

// Parses one move document. Fields are checked in wire order and the error
// names the first offending field.
inline ParseResult parse_move(const Json& doc) {
    using detail::parse_fail;
    if (!doc.is_object())
        return parse_fail("InvalidField", "", "move document must be an object");

    for (const char* name : detail::move_field_names()) {
        if (!doc.contains(name))
            return parse_fail("MissingField", name,
                              std::string("missing required field: ") + name);
    }

    Move m;
    auto str_field = [&](const char* name, std::string& out) -> std::optional<ParseResult> {
        const Json& v = doc.at(name);
        if (!v.is_string())
            return parse_fail("InvalidField", name,
                              std::string(name) + " must be a string");
        out = v.get<std::string>();
        return std::nullopt;
    };

    if (auto e = str_field("move_id", m.move_id)) return *e;
    if (auto e = str_field("session_id", m.session_id)) return *e;

    {
        const Json& v = doc.at("round");
        if (!v.is_number_integer() && !v.is_number_unsigned())
            return parse_fail("InvalidField", "round", "round must be an integer");
        m.round = v.get<int>();
    }

    if (auto e = str_field("phase", m.phase)) return *e;
    if (auto e = str_field("actor", m.actor)) return *e;

    {
        std::string s;
        if (auto e = str_field("mode", s)) return *e;
        auto mode = mode_from_string(s);
        if (!mode)
            return parse_fail("UnknownMode", "mode", "unknown speech mode: " + s);
        m.mode = *mode;
    }
    {
        std::string s;
        if (auto e = str_field("act", s)) return *e;
        auto act = act_from_string(s);
        if (!act)
            return parse_fail("UnknownAct", "act", "unknown act: " + s);
        m.act = *act;
    }

    if (auto e = str_field("intent", m.intent)) return *e;
    if (auto e = str_field("target", m.target)) return *e;
    if (auto e = str_field("content", m.content)) return *e;

    {
        const Json& v = doc.at("confidence");
        if (!v.is_number())
            return parse_fail("InvalidField", "confidence",
                              "confidence must be a number");
        m.confidence = v.get<double>();
        if (m.confidence < 0.0 || m.confidence > 1.0)
            return parse_fail("OutOfRangeConfidence", "confidence",
                              "confidence must lie in [0,1]");
    }
    {
        std::string s;
        if (auto e = str_field("move_force", s)) return *e;
        auto f = force_from_string(s);
        if (!f)
            return parse_fail("InvalidField", "move_force",
                              "move_force must be soft or hard: " + s);
        m.move_force = *f;
    }
    {
        const Json& v = doc.at("meta_level");
        if (!v.is_boolean())
            return parse_fail("InvalidField", "meta_level",
                              "meta_level must be a boolean");
        m.meta_level = v.get<bool>();
    }

    // Unknown fields ride along untouched.
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        bool known = false;
        for (const char* name : detail::move_field_names())
            if (it.key() == name) { known = true; break; }
        if (!known) m.extras[it.key()] = it.value();
    }

    return ParseResult{std::move(m), std::nullopt};
}

inline Json serialize_move(const Move& m) {
    Json doc = Json::object();
    doc["move_id"] = m.move_id;
    doc["session_id"] = m.session_id;
    doc["round"] = m.round;
    doc["phase"] = m.phase;
    doc["actor"] = m.actor;
    doc["mode"] = to_string(m.mode);
    doc["act"] = to_string(m.act);
    doc["intent"] = m.intent;
    doc["target"] = m.target;
    doc["content"] = m.content;
    doc["confidence"] = m.confidence;
    doc["move_force"] = to_string(m.move_force);
    doc["meta_level"] = m.meta_level;
    for (auto it = m.extras.begin(); it != m.extras.end(); ++it)
        doc[it.key()] = it.value();
    return doc;
}

// ---------------------------------------------------------------------------
// Validation against session context
// ---------------------------------------------------------------------------

struct Rejection {
    std::string code;   // DanglingTarget, PhaseMismatch, RoundMismatch, ...
    std::string field;
    std::string reason; // machine-readable, suitable for a re-prompt
};

struct SessionContext {
    std::string session_id;             // empty = do not check
    int round = 1;
    Phase phase = Phase::arrival;
    const std::set<std::string>* known_ids = nullptr; // resolvable move ids
    int depth = 0;
    int max_depth = 2;
};

struct ValidationResult {
    bool accepted = false;
    Rejection rejection;
    static ValidationResult accept() { return ValidationResult{true, {}}; }
    static ValidationResult reject(std::string code, std::string field,
                                   std::string reason) {
        return ValidationResult{false, Rejection{std::move(code),
                                                 std::move(field),
                                                 std::move(reason)}};
    }
};

// Accepts iff the move invariants hold and the move fits the session context.
// Never throws; every invalid move yields a Rejection with a reason.
inline ValidationResult validate_move(const Move& m, const SessionContext& ctx) {
    using VR = ValidationResult;
    if (m.confidence < 0.0 || m.confidence > 1.0)
        return VR::reject("OutOfRangeConfidence", "confidence",
                          "confidence must lie in [0,1]");
    if (m.round < 1)
        return VR::reject("InvalidRound", "round", "round must be >= 1");
    if (m.move_id.empty())
        return VR::reject("EmptyField", "move_id", "move_id must be non-empty");
    if (m.intent.empty())
        return VR::reject("EmptyField", "intent", "intent must be non-empty");
    if (m.content.empty())
        return VR::reject("EmptyField", "content", "content must be non-empty");

    if (!ctx.session_id.empty() && m.session_id != ctx.session_id)
        return VR::reject("SessionMismatch", "session_id",
                          "move session_id '" + m.session_id +
                              "' does not match session '" + ctx.session_id + "'");
    if (m.round != ctx.round)
        return VR::reject("RoundMismatch", "round",
                          "move round " + std::to_string(m.round) +
                              " does not match session round " +
                              std::to_string(ctx.round));
    if (m.phase != to_string(ctx.phase))
        return VR::reject("PhaseMismatch", "phase",
                          "move phase '" + m.phase + "' does not match session phase '" +
                              std::string(to_string(ctx.phase)) + "'");
    if (ctx.known_ids && ctx.known_ids->count(m.move_id))
        return VR::reject("DuplicateMoveId", "move_id",
                          "move_id '" + m.move_id + "' already used");

    auto target = parse_target(m.target);
    if (!target)
        return VR::reject("InvalidTarget", "target",
                          "target must be 'problem', 'workspace' or "
                          "'contribution:<move_id>'");
    if (target->kind == TargetRef::Kind::contribution) {
        if (!ctx.known_ids || !ctx.known_ids->count(target->move_id))
            return VR::reject("DanglingTarget", "target",
                              "target cites unknown move_id '" +
                                  target->move_id + "'");
    }

    if (m.act == Act::spawn && ctx.depth >= ctx.max_depth)
        return VR::reject("DepthExhausted", "act",
                          "spawn not admissible at depth " +
                              std::to_string(ctx.depth) + " (max_depth " +
                              std::to_string(ctx.max_depth) + ")");

    return VR::accept();
}

} // namespace dci
