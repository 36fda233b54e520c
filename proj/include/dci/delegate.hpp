#pragma once
// Delegate identity, archetype bias tables, evolving epistemic state, and
// the abstract behavior contract scripted and remote delegates implement.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dci/error.hpp"
#include "dci/grammar.hpp"
#include "dci/option.hpp"

namespace dci {

// ---------------------------------------------------------------------------
// Archetypes
// ---------------------------------------------------------------------------

enum class ArchetypeKind { framer, explorer, challenger, integrator };

inline const char* to_string(ArchetypeKind k) {
    switch (k) {
        case ArchetypeKind::framer:     return "Framer";
        case ArchetypeKind::explorer:   return "Explorer";
        case ArchetypeKind::challenger: return "Challenger";
        case ArchetypeKind::integrator: return "Integrator";
    }
    return "unknown";
}

inline std::optional<ArchetypeKind> archetype_from_string(std::string_view s) {
    if (s == "Framer") return ArchetypeKind::framer;
    if (s == "Explorer") return ArchetypeKind::explorer;
    if (s == "Challenger") return ArchetypeKind::challenger;
    if (s == "Integrator") return ArchetypeKind::integrator;
    return std::nullopt;
}

struct Archetype {
    ArchetypeKind kind = ArchetypeKind::framer;
    std::map<Act, double> act_bias; // strictly positive, sums to 1
};

// Fixed sampling bias per archetype. Archetypes constrain tendency, not
// capability: every act keeps positive weight, so off-archetype acts stay
// possible. The named acts get the listed mass and the remainder is spread
// uniformly over the other acts.
inline Archetype default_archetype_bias(ArchetypeKind kind) {
    Archetype a;
    a.kind = kind;
    std::map<Act, double> named;
    switch (kind) {
        case ArchetypeKind::framer:
            named = {{Act::frame, 0.25}, {Act::clarify, 0.20}, {Act::reframe, 0.15}};
            break;
        case ArchetypeKind::explorer:
            named = {{Act::propose, 0.30}, {Act::extend, 0.20}, {Act::spawn, 0.10}};
            break;
        case ArchetypeKind::challenger:
            named = {{Act::challenge, 0.35}, {Act::ask, 0.20}};
            break;
        case ArchetypeKind::integrator:
            named = {{Act::bridge, 0.20}, {Act::synthesize, 0.25}, {Act::recall, 0.10}};
            break;
    }
    double named_mass = 0.0;
    for (const auto& [act, w] : named) named_mass += w;
    double rest = (1.0 - named_mass) / double(kAllActs.size() - named.size());
    for (Act act : kAllActs) {
        auto it = named.find(act);
        a.act_bias[act] = (it != named.end()) ? it->second : rest;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Delegate state
// ---------------------------------------------------------------------------

struct PositionShift {
    int round = 0;
    std::string prior_view;
    std::string new_view;
    double prior_confidence = 0.0;
    double new_confidence = 0.0;
    std::string trigger_move_id;
};

struct DelegateState {
    std::string view;
    double confidence = 0.5;
    std::set<std::string> open_questions;
    std::set<std::string> concerns;
    std::vector<PositionShift> shift_history;
};

// Appends one shift record and replaces view/confidence. Always appends,
// even when the new values equal the old ones: the history is an audit log
// and re-affirmations are part of it.
inline DelegateState record_position_shift(const DelegateState& state,
                                           const std::string& new_view,
                                           double new_confidence,
                                           const std::string& trigger_move_id,
                                           int round) {
    if (new_confidence < 0.0 || new_confidence > 1.0)
        throw DciError("OutOfRangeConfidence",
                       "confidence must lie in [0,1]");
    DelegateState next = state;
    next.shift_history.push_back(PositionShift{round, state.view, new_view,
                                               state.confidence,
                                               new_confidence,
                                               trigger_move_id});
    next.view = new_view;
    next.confidence = new_confidence;
    return next;
}

// ---------------------------------------------------------------------------
// Delegate outputs
// ---------------------------------------------------------------------------

struct Hypothesis {
    std::string label;
    std::string description;
};

// Stage 1 private submission.
struct Proposal {
    std::string author;
    std::string framing;
    std::vector<Hypothesis> hypotheses;
    std::vector<std::string> concerns;
    double confidence = 0.5;
    std::vector<std::string> suggested_criteria;
};

enum class ContributionKind {
    support,
    challenge,
    evidence,
    counterexample,
    revision_suggestion,
    uncertainty_note,
};

inline const char* to_string(ContributionKind k) {
    switch (k) {
        case ContributionKind::support:             return "support";
        case ContributionKind::challenge:           return "challenge";
        case ContributionKind::evidence:            return "evidence";
        case ContributionKind::counterexample:      return "counterexample";
        case ContributionKind::revision_suggestion: return "revision_suggestion";
        case ContributionKind::uncertainty_note:    return "uncertainty_note";
    }
    return "unknown";
}

inline std::optional<ContributionKind>
contribution_kind_from_string(std::string_view s) {
    if (s == "support") return ContributionKind::support;
    if (s == "challenge") return ContributionKind::challenge;
    if (s == "evidence") return ContributionKind::evidence;
    if (s == "counterexample") return ContributionKind::counterexample;
    if (s == "revision_suggestion") return ContributionKind::revision_suggestion;
    if (s == "uncertainty_note") return ContributionKind::uncertainty_note;
    return std::nullopt;
}

// A mid-session hypothesis riding on a revision_suggestion contribution.
// Admission requires evidence and a named option it claims to beat.
struct NewHypothesis {
    std::string label;
    std::string description;
    std::string evidence_link;
    std::string superior_to; // option_id the author claims to improve on
};

struct ChallengeContribution {
    std::string author;
    std::string option_id;
    ContributionKind kind = ContributionKind::support;
    std::string content;
    bool fatal = false;
    std::string linked_evidence; // empty when none
    std::optional<NewHypothesis> proposed_new_hypothesis;
    std::string move_id; // engine assigns "ct-<n>" when left empty
};

// Everything a delegate emits in one Stage 3 turn.
struct DelegateTurn {
    std::vector<ChallengeContribution> contributions;
    std::vector<Move> moves;
};

struct ScoreSheet {
    std::string delegate;
    // option_id -> criterion_id -> raw score s in [0,10]
    std::map<std::string, std::map<std::string, double>> scores;
    double confidence = 1.0;        // c_d
    double evidence_strength = 1.0; // e_d
    std::map<std::string, std::string> rationale;
    std::string top_choice; // recomputed by the engine as the sheet's argmax
};

// ---------------------------------------------------------------------------
// Output invariant checks (reasons, not exceptions: invalid outputs become
// logged skipped turns, never crashes)
// ---------------------------------------------------------------------------

inline std::optional<std::string> proposal_violation(const Proposal& p) {
    if (p.hypotheses.empty()) return "proposal carries no hypotheses";
    for (const auto& h : p.hypotheses)
        if (canonical_key(h.label).empty())
            return "hypothesis label is empty";
    if (p.confidence < 0.0 || p.confidence > 1.0)
        return "proposal confidence outside [0,1]";
    return std::nullopt;
}

inline std::optional<std::string>
contribution_violation(const ChallengeContribution& c) {
    if (c.fatal && c.kind != ContributionKind::challenge)
        return "fatal flag allowed only on challenge contributions";
    if (c.content.empty()) return "contribution content is empty";
    if (c.proposed_new_hypothesis) {
        if (canonical_key(c.proposed_new_hypothesis->label).empty())
            return "proposed hypothesis label is empty";
        if (c.proposed_new_hypothesis->evidence_link.empty())
            return "proposed hypothesis lacks an evidence link";
    }
    return std::nullopt;
}

// A sheet must cover every (finalist, criterion) pair with in-range values.
inline std::optional<std::string>
sheet_violation(const ScoreSheet& sheet,
                const std::vector<CandidateOption>& finalists,
                const std::vector<Criterion>& criteria) {
    if (sheet.confidence < 0.0 || sheet.confidence > 1.0)
        return "confidence outside [0,1]";
    if (sheet.evidence_strength < 0.0 || sheet.evidence_strength > 1.0)
        return "evidence_strength outside [0,1]";
    for (const auto& f : finalists) {
        auto row = sheet.scores.find(f.option_id);
        if (row == sheet.scores.end())
            return "missing scores for option " + f.option_id;
        for (const auto& c : criteria) {
            auto cell = row->second.find(c.id);
            if (cell == row->second.end())
                return "missing score for (" + f.option_id + ", " + c.id + ")";
            if (cell->second < 0.0 || cell->second > 10.0)
                return "score outside [0,10] for (" + f.option_id + ", " +
                       c.id + ")";
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Behavior contract
// ---------------------------------------------------------------------------

// Scripted and remote delegates implement this. All methods may return
// nullopt, meaning "no contribution this turn" (scenario exhausted or
// provider failed after retries); the runner logs a skipped turn and moves
// on. Implementations must not hold references into engine state; all
// effects flow through returned values.
class IDelegate {
public:
    virtual ~IDelegate() = default;

    virtual std::string id() const = 0;
    virtual ArchetypeKind archetype() const = 0;

    // Called when a (sub)session this delegate sits on starts or ends, so
    // scripted implementations can switch to the right block.
    virtual void begin_session(const std::string& session_id) { (void)session_id; }
    virtual void end_session(const std::string& session_id) { (void)session_id; }

    virtual std::optional<Proposal>
    generate_proposal(const std::string& problem) = 0;

    virtual std::optional<DelegateTurn>
    contribute(const std::vector<CandidateOption>& options, int round) = 0;

    virtual std::optional<ScoreSheet>
    score(const std::vector<CandidateOption>& finalists,
          const std::vector<Criterion>& criteria) = 0;

    virtual std::optional<std::string>
    integrator_pick(const std::vector<std::string>& top2) = 0;
};

} // namespace dci
