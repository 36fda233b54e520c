#pragma once
// Delegate implementations that need no model behind them: a scripted
// delegate fed per-session blocks (scenario files, engine tests) and a
// seeded random delegate with behavior profiles for the fuzz harness.

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dci/delegate.hpp"
#include "dci/grammar.hpp"
#include "dci/option.hpp"

namespace dci {

// Builds a move that fits a stage-3 validation context.
inline Move stage3_move(const std::string& session_id, int round,
                        const std::string& move_id, Act act,
                        const std::string& intent, const std::string& target,
                        const std::string& content, double confidence = 0.7) {
    Move m;
    m.move_id = move_id;
    m.session_id = session_id;
    m.round = round;
    m.phase = to_string(Phase::mutual_engagement);
    m.mode = SpeechMode::analytical;
    m.act = act;
    m.intent = intent;
    m.target = target;
    m.content = content;
    m.confidence = confidence;
    return m;
}

// What one delegate does in one session: at most one proposal, one turn per
// round, one sheet per round, and one integrator pick.
struct ScriptedSession {
    std::optional<Proposal> proposal;
    std::map<int, DelegateTurn> turns;
    std::map<int, ScoreSheet> sheets;
    std::optional<std::string> pick;
};

class ScriptedDelegate : public IDelegate {
public:
    ScriptedDelegate(std::string id, ArchetypeKind kind)
        : id_(std::move(id)), kind_(kind) {}

    ScriptedSession& session(const std::string& session_id) {
        return scripts_[session_id];
    }

    std::string id() const override { return id_; }
    ArchetypeKind archetype() const override { return kind_; }

    void begin_session(const std::string& session_id) override {
        active_.push_back(session_id);
    }
    void end_session(const std::string& session_id) override {
        if (!active_.empty() && active_.back() == session_id)
            active_.pop_back();
    }

    std::optional<Proposal>
    generate_proposal(const std::string&) override {
        ScriptedSession* s = current();
        return s ? s->proposal : std::nullopt;
    }

    std::optional<DelegateTurn>
    contribute(const std::vector<CandidateOption>&, int round) override {
        round_ = round;
        ScriptedSession* s = current();
        if (!s) return std::nullopt;
        auto it = s->turns.find(round);
        if (it == s->turns.end()) return std::nullopt;
        return it->second;
    }

    std::optional<ScoreSheet>
    score(const std::vector<CandidateOption>&,
          const std::vector<Criterion>&) override {
        ScriptedSession* s = current();
        if (!s) return std::nullopt;
        auto it = s->sheets.find(round_);
        if (it == s->sheets.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::string>
    integrator_pick(const std::vector<std::string>&) override {
        ScriptedSession* s = current();
        return s ? s->pick : std::nullopt;
    }

private:
    std::string id_;
    ArchetypeKind kind_;
    std::map<std::string, ScriptedSession> scripts_;
    std::vector<std::string> active_; // session stack; sub-sessions nest
    int round_ = 0;

    ScriptedSession* current() {
        if (active_.empty()) return nullptr;
        auto it = scripts_.find(active_.back());
        return it == scripts_.end() ? nullptr : &it->second;
    }
};

// ---------------------------------------------------------------------------
// Random delegates for the fuzz harness
// ---------------------------------------------------------------------------

// cooperative: everyone pools onto one label and backs it, converging fast.
// adversarial: two camps of equal size trade standing fatal objections and
//   mirror-image scores, so no convergence test ever passes (pair with an
//   even council).
// spawn_happy: spawns sub-sessions at every opportunity to grind against
//   the depth, cap, budget and ceiling limits.
// flaky: declines turns, emits malformed outputs and off-context moves, so
//   every rejection path stays hot.
enum class FuzzProfile { cooperative, adversarial, spawn_happy, flaky };

inline const char* to_string(FuzzProfile p) {
    switch (p) {
        case FuzzProfile::cooperative: return "cooperative";
        case FuzzProfile::adversarial: return "adversarial";
        case FuzzProfile::spawn_happy: return "spawn_happy";
        case FuzzProfile::flaky:       return "flaky";
    }
    return "unknown";
}

class RandomDelegate : public IDelegate {
public:
    RandomDelegate(std::string id, ArchetypeKind kind, FuzzProfile profile,
                   unsigned long seed, int index)
        : id_(std::move(id)), kind_(kind), profile_(profile), rng_(seed),
          index_(index) {}

    std::string id() const override { return id_; }
    ArchetypeKind archetype() const override { return kind_; }

    void begin_session(const std::string& session_id) override {
        active_.push_back(session_id);
    }
    void end_session(const std::string& session_id) override {
        if (!active_.empty() && active_.back() == session_id)
            active_.pop_back();
    }

    std::optional<Proposal>
    generate_proposal(const std::string& problem) override {
        if (profile_ == FuzzProfile::flaky && chance(0.4)) return std::nullopt;
        Proposal p;
        p.author = id_;
        p.framing = "delegate " + std::to_string(index_) + " reading of: " +
                    problem;
        p.confidence = 0.4 + 0.5 * uniform();
        switch (profile_) {
            case FuzzProfile::cooperative:
                p.hypotheses.push_back(
                    {"shared-direction",
                     "back the direction the council already leans toward"});
                break;
            case FuzzProfile::adversarial:
                p.hypotheses.push_back(
                    {camp_label(), "the " + camp_label() + " plan"});
                break;
            case FuzzProfile::spawn_happy:
                p.hypotheses.push_back(
                    {"path-" + std::to_string(index_),
                     "the path delegate " + std::to_string(index_) +
                         " wants to walk"});
                if (chance(0.5))
                    p.hypotheses.push_back(
                        {"path-" + std::to_string(index_) + "-alt",
                         "a second path worth keeping alive"});
                break;
            case FuzzProfile::flaky:
                if (chance(0.3))
                    p.hypotheses.push_back({"", "an unlabeled idea"});
                else
                    p.hypotheses.push_back(
                        {"rough-idea-" + std::to_string(index_),
                         "a half-formed idea"});
                break;
        }
        return p;
    }

    std::optional<DelegateTurn>
    contribute(const std::vector<CandidateOption>& options,
               int round) override {
        round_ = round;
        if (profile_ == FuzzProfile::flaky && chance(0.4)) return std::nullopt;
        DelegateTurn t;
        switch (profile_) {
            case FuzzProfile::cooperative: {
                ChallengeContribution c;
                c.option_id = options.front().option_id;
                c.kind = ContributionKind::support;
                c.content = "still the strongest direction on the table";
                t.contributions.push_back(c);
                if (chance(0.5)) {
                    ChallengeContribution e;
                    e.option_id = options.front().option_id;
                    e.kind = ContributionKind::evidence;
                    e.content = "prior art backs this direction";
                    e.linked_evidence = "note-" + std::to_string(index_);
                    t.contributions.push_back(e);
                }
                break;
            }
            case FuzzProfile::adversarial: {
                for (const auto& o : options) {
                    ChallengeContribution c;
                    c.option_id = o.option_id;
                    if (o.canonical_label == camp_label()) {
                        c.kind = ContributionKind::support;
                        c.content = "the " + camp_label() +
                                    " plan remains the only acceptable one";
                    } else {
                        c.kind = ContributionKind::challenge;
                        c.fatal = true;
                        c.content = "camp " + camp_label() +
                                    " will not accept " + o.canonical_label;
                        c.move_id = "obj-" + id_ + "-r" +
                                    std::to_string(round) + "-" + o.option_id;
                    }
                    t.contributions.push_back(c);
                }
                break;
            }
            case FuzzProfile::spawn_happy: {
                ChallengeContribution c;
                c.option_id = options.front().option_id;
                c.kind = ContributionKind::support;
                c.content = "fine as a trunk; the branches need their own look";
                t.contributions.push_back(c);
                int spawns = 1 + int(uniform() * 2.0);
                for (int k = 0; k < spawns; ++k) {
                    Move m = stage3_move(
                        session(), round,
                        id_ + "-sp-r" + std::to_string(round) + "-" +
                            std::to_string(k),
                        Act::spawn, "carve out a subproblem", "workspace",
                        "branch " + std::to_string(k) + " of " + id_ +
                            " in round " + std::to_string(round));
                    m.actor = id_;
                    m.extras["requested_rounds"] = 1 + int(uniform() * 3.0);
                    t.moves.push_back(m);
                }
                break;
            }
            case FuzzProfile::flaky: {
                if (chance(0.5)) {
                    ChallengeContribution c;
                    c.option_id = options.front().option_id;
                    c.kind = ContributionKind::challenge;
                    t.contributions.push_back(c); // empty content: rejected
                }
                if (chance(0.5)) {
                    ChallengeContribution c;
                    c.option_id = "opt-404";
                    c.kind = ContributionKind::evidence;
                    c.content = "evidence aimed at nothing";
                    t.contributions.push_back(c);
                }
                if (chance(0.5)) {
                    ChallengeContribution c;
                    c.option_id = pick_option(options);
                    c.kind = ContributionKind::uncertainty_note;
                    c.content = "unsure this holds under load";
                    t.contributions.push_back(c);
                }
                if (chance(0.3)) {
                    Move m = stage3_move(session(), round + 1,
                                         id_ + "-off-r" + std::to_string(round),
                                         Act::ask, "poke at the frame",
                                         "workspace",
                                         "a move filed against the wrong round");
                    m.actor = id_;
                    t.moves.push_back(m); // round mismatch: rejected
                }
                break;
            }
        }
        return t;
    }

    std::optional<ScoreSheet>
    score(const std::vector<CandidateOption>& finalists,
          const std::vector<Criterion>& criteria) override {
        if (profile_ == FuzzProfile::flaky && chance(0.3)) return std::nullopt;
        ScoreSheet s;
        s.delegate = id_;
        labels_.clear();
        for (const auto& f : finalists) labels_[f.option_id] = f.canonical_label;
        if (profile_ == FuzzProfile::adversarial) {
            s.confidence = 1.0;
            s.evidence_strength = 1.0;
        } else {
            s.confidence = 0.5 + 0.5 * uniform();
            s.evidence_strength = 0.5 + 0.5 * uniform();
        }
        for (const auto& f : finalists) {
            for (const auto& c : criteria) {
                double v;
                if (profile_ == FuzzProfile::adversarial)
                    v = (f.canonical_label == camp_label()) ? 9.0 : 3.0;
                else
                    v = 3.0 + 6.0 * uniform();
                if (profile_ == FuzzProfile::flaky && chance(0.05))
                    v = 15.0; // out of range: the whole sheet is rejected
                s.scores[f.option_id][c.id] = v;
            }
        }
        return s;
    }

    std::optional<std::string>
    integrator_pick(const std::vector<std::string>& top2) override {
        if (profile_ == FuzzProfile::flaky && chance(0.5)) return std::nullopt;
        if (profile_ == FuzzProfile::adversarial)
            for (const auto& id : top2) {
                auto it = labels_.find(id);
                if (it != labels_.end() && it->second == camp_label())
                    return id;
            }
        return top2.empty() ? std::nullopt
                            : std::optional<std::string>(top2.front());
    }

private:
    std::string id_;
    ArchetypeKind kind_;
    FuzzProfile profile_;
    std::mt19937 rng_;
    int index_ = 0;
    int round_ = 0;
    std::vector<std::string> active_;
    std::map<std::string, std::string> labels_; // last finalists seen

    std::string session() const {
        return active_.empty() ? std::string("S-1") : active_.back();
    }
    std::string camp_label() const {
        return "camp-" + std::to_string(index_ % 2);
    }
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    }
    bool chance(double p) { return uniform() < p; }
    std::string pick_option(const std::vector<CandidateOption>& options) {
        std::size_t i = std::size_t(uniform() * double(options.size()));
        if (i >= options.size()) i = options.size() - 1;
        return options[i].option_id;
    }
};

} // namespace dci
