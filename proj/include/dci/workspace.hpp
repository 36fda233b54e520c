#pragma once
// The shared six-section thought-space. Accepted moves are folded in via
// apply_move; each act touches only its mapped sections, and disagreements
// live on as first-class Tension objects instead of being flattened away.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dci/error.hpp"
#include "dci/grammar.hpp"

namespace dci {

struct Revision {
    std::string text;
    std::string move_id; // empty for the session-init revision
};

struct KeyFrame {
    std::string frame_id;
    std::string description;
    std::string author;
    std::vector<std::string> move_ids; // at least one
};

struct Idea {
    std::string idea_id;
    std::string description;
    std::string author;
    std::vector<std::string> supporting_move_ids; // at least one
    std::vector<std::string> supporters;          // authors, same order
    std::vector<std::string> evidence;
    std::string origin_session; // set when imported from a sub-session
};

enum class TensionStatus { open, resolved, carried_forward };

inline const char* to_string(TensionStatus s) {
    switch (s) {
        case TensionStatus::open:            return "open";
        case TensionStatus::resolved:        return "resolved";
        case TensionStatus::carried_forward: return "carried_forward";
    }
    return "unknown";
}

struct Tension {
    std::string tension_id; // "tn-<seq>"
    int seq = 0;
    std::vector<std::string> conflicting_positions; // two or more refs
    std::map<std::string, std::vector<std::string>> evidence_per_side;
    std::string resolution_condition;
    TensionStatus status = TensionStatus::open;
    std::string created_by_move;
    std::string resolved_by_move; // set on open -> resolved
    std::string origin_session;   // set when imported from a sub-session
};

struct OpenQuestion {
    std::string question_id;
    std::string text;
    std::string author;
    std::string move_id;
    std::string attached_to; // target string of the ask move
};

struct ProvenanceEntry {
    std::string move_id;
    Act act = Act::propose;
    std::vector<std::string> sections; // sections actually changed
};

// What a closing session hands to whoever deliberates next.
struct CarryForward {
    std::vector<Tension> tensions; // status carried_forward
    std::string synthesis;
    std::vector<std::string> next_actions;
};

class Workspace {
public:
    static Workspace init(const std::string& problem) {
        Workspace w;
        w.problem_view_.push_back(Revision{problem, ""});
        return w;
    }

    const std::vector<Revision>& problem_view_history() const { return problem_view_; }
    const std::string& problem_view() const { return problem_view_.back().text; }
    const std::vector<KeyFrame>& key_frames() const { return key_frames_; }
    const std::vector<Idea>& emerging_ideas() const { return ideas_; }
    const std::vector<Tension>& tensions() const { return tensions_; }
    const std::vector<OpenQuestion>& open_questions() const { return questions_; }
    const std::vector<Revision>& synthesis_history() const { return synthesis_; }
    std::string synthesis() const {
        return synthesis_.empty() ? std::string() : synthesis_.back().text;
    }
    const std::vector<std::string>& next_actions() const { return next_actions_; }
    const std::vector<ProvenanceEntry>& provenance() const { return provenance_; }

    const Idea* idea_by_id(const std::string& idea_id) const {
        for (const auto& i : ideas_)
            if (i.idea_id == idea_id) return &i;
        return nullptr;
    }

    // Resolves a move_id to the idea it originated or supports.
    const Idea* idea_by_move(const std::string& move_id) const {
        auto it = move_to_idea_.find(move_id);
        if (it == move_to_idea_.end()) return nullptr;
        return idea_by_id(it->second);
    }

    const KeyFrame* frame_by_move(const std::string& move_id) const {
        auto it = move_to_frame_.find(move_id);
        if (it == move_to_frame_.end()) return nullptr;
        for (const auto& f : key_frames_)
            if (f.frame_id == it->second) return &f;
        return nullptr;
    }

    const Tension* tension_by_move(const std::string& move_id) const {
        auto it = move_to_tension_.find(move_id);
        if (it == move_to_tension_.end()) return nullptr;
        for (const auto& t : tensions_)
            if (t.tension_id == it->second) return &t;
        return nullptr;
    }

    // Imports material produced by a closed sub-session. Fresh ids are
    // assigned here; origin_session keeps the source visible.
    Idea& import_idea(const std::string& description, const std::string& author,
                      const std::string& origin_session,
                      const std::string& move_id,
                      const std::vector<std::string>& evidence = {}) {
        Idea& idea = new_idea(description, author, move_id);
        idea.origin_session = origin_session;
        idea.evidence = evidence;
        provenance_.push_back(
            ProvenanceEntry{move_id, Act::recall, {"emerging_ideas"}});
        return idea;
    }

    Tension& import_tension(Tension t, const std::string& origin_session,
                            const std::string& move_id) {
        t.seq = ++tension_seq_;
        t.tension_id = "tn-" + std::to_string(t.seq);
        t.origin_session = origin_session;
        tensions_.push_back(std::move(t));
        if (!move_to_tension_.count(move_id))
            move_to_tension_[move_id] = tensions_.back().tension_id;
        provenance_.push_back(
            ProvenanceEntry{move_id, Act::recall, {"tensions"}});
        return tensions_.back();
    }

    friend Workspace apply_move(const Workspace& w, const Move& m);
    friend std::pair<Workspace, CarryForward> carry_forward(const Workspace& w,
                                                            Phase phase);

private:
    std::vector<Revision> problem_view_;
    std::vector<KeyFrame> key_frames_;
    std::vector<Idea> ideas_;
    std::vector<Tension> tensions_;
    std::vector<OpenQuestion> questions_;
    std::vector<Revision> synthesis_;
    std::vector<std::string> next_actions_;
    std::vector<ProvenanceEntry> provenance_;

    std::map<std::string, std::string> move_to_idea_;
    std::map<std::string, std::string> move_to_frame_;
    std::map<std::string, std::string> move_to_tension_;
    int frame_seq_ = 0;
    int idea_seq_ = 0;
    int tension_seq_ = 0;
    int question_seq_ = 0;

    Idea* mutable_idea(const std::string& idea_id) {
        for (auto& i : ideas_)
            if (i.idea_id == idea_id) return &i;
        return nullptr;
    }

    Idea& new_idea(const std::string& description, const std::string& author,
                   const std::string& move_id) {
        Idea idea;
        idea.idea_id = "idea-" + std::to_string(++idea_seq_);
        idea.description = description;
        idea.author = author;
        idea.supporting_move_ids.push_back(move_id);
        idea.supporters.push_back(author);
        ideas_.push_back(std::move(idea));
        move_to_idea_[move_id] = ideas_.back().idea_id;
        return ideas_.back();
    }

    // Best-effort resolution of a move target to a workspace position ref.
    std::string position_ref(const std::string& target) const {
        auto t = parse_target(target);
        if (!t) return target;
        if (t->kind == TargetRef::Kind::problem) return "problem";
        if (t->kind == TargetRef::Kind::workspace) return "workspace";
        auto idea = move_to_idea_.find(t->move_id);
        if (idea != move_to_idea_.end()) return idea->second;
        auto frame = move_to_frame_.find(t->move_id);
        if (frame != move_to_frame_.end()) return frame->second;
        return target; // a contribution not bound to an idea or frame
    }
};

namespace detail {

inline std::string extras_string(const Move& m, const char* key) {
    auto it = m.extras.find(key);
    if (it != m.extras.end() && it->is_string()) return it->get<std::string>();
    return {};
}

} // namespace detail

// Folds one accepted move into the workspace. Pure with respect to the
// input: returns the changed copy. Exactly the sections mapped from the
// act change; the mapping is total over all 14 acts.
inline Workspace apply_move(const Workspace& w, const Move& m) {
    Workspace next = w;
    std::vector<std::string> touched;

    auto revise_problem = [&]() {
        next.problem_view_.push_back(Revision{m.content, m.move_id});
        touched.push_back("problem_view");
    };
    auto revise_synthesis = [&]() {
        next.synthesis_.push_back(Revision{m.content, m.move_id});
        touched.push_back("synthesis");
    };
    auto add_frame = [&]() {
        KeyFrame f;
        f.frame_id = "kf-" + std::to_string(++next.frame_seq_);
        f.description = m.content;
        f.author = m.actor;
        f.move_ids.push_back(m.move_id);
        next.key_frames_.push_back(std::move(f));
        next.move_to_frame_[m.move_id] = next.key_frames_.back().frame_id;
        touched.push_back("key_frames");
    };

    switch (m.act) {
        case Act::frame:
        case Act::reframe:
            revise_problem();
            add_frame();
            break;

        case Act::clarify:
            revise_problem();
            break;

        case Act::propose:
        case Act::spawn:
            next.new_idea(m.content, m.actor, m.move_id);
            touched.push_back("emerging_ideas");
            break;

        case Act::extend: {
            auto t = parse_target(m.target);
            Idea* idea = nullptr;
            if (t && t->kind == TargetRef::Kind::contribution) {
                auto it = next.move_to_idea_.find(t->move_id);
                if (it != next.move_to_idea_.end())
                    idea = next.mutable_idea(it->second);
            }
            if (idea) {
                idea->supporting_move_ids.push_back(m.move_id);
                idea->supporters.push_back(m.actor);
                next.move_to_idea_[m.move_id] = idea->idea_id;
            } else {
                next.new_idea(m.content, m.actor, m.move_id);
            }
            touched.push_back("emerging_ideas");
            break;
        }

        case Act::ask: {
            OpenQuestion q;
            q.question_id = "q-" + std::to_string(++next.question_seq_);
            q.text = m.content;
            q.author = m.actor;
            q.move_id = m.move_id;
            q.attached_to = m.target;
            next.questions_.push_back(std::move(q));
            touched.push_back("tensions");
            break;
        }

        case Act::challenge: {
            std::string challenged = next.position_ref(m.target);

            // Soft probes only rise to a tension when the challenged idea
            // has declared support from someone besides its author.
            bool create = (m.move_force == MoveForce::hard);
            if (!create) {
                const Idea* idea = next.idea_by_id(challenged);
                if (idea) {
                    for (const auto& who : idea->supporters)
                        if (who != idea->author) { create = true; break; }
                }
            }

            // An open tension already disputing this position is
            // strengthened instead of duplicated.
            Tension* existing = nullptr;
            for (auto& t : next.tensions_) {
                if (t.status != TensionStatus::open) continue;
                for (const auto& pos : t.conflicting_positions)
                    if (pos == challenged) { existing = &t; break; }
                if (existing) break;
            }

            std::string stance = "stance:" + m.move_id;
            if (existing) {
                existing->conflicting_positions.push_back(stance);
                existing->evidence_per_side[stance].push_back(m.content);
                next.move_to_tension_[m.move_id] = existing->tension_id;
                touched.push_back("tensions");
            } else if (create) {
                Tension t;
                t.seq = ++next.tension_seq_;
                t.tension_id = "tn-" + std::to_string(t.seq);
                t.conflicting_positions = {challenged, stance};
                std::string counter = detail::extras_string(m, "counter_position");
                if (!counter.empty())
                    t.conflicting_positions.insert(
                        t.conflicting_positions.begin() + 1,
                        next.position_ref(counter));
                t.evidence_per_side[stance].push_back(m.content);
                std::string cond = detail::extras_string(m, "resolution_condition");
                t.resolution_condition =
                    cond.empty() ? "evidence decides between the positions"
                                 : cond;
                t.created_by_move = m.move_id;
                next.tensions_.push_back(std::move(t));
                next.move_to_tension_[m.move_id] = next.tensions_.back().tension_id;
                touched.push_back("tensions");
            }
            break;
        }

        case Act::bridge: {
            revise_synthesis();
            auto t = parse_target(m.target);
            if (t && t->kind == TargetRef::Kind::contribution) {
                auto it = next.move_to_tension_.find(t->move_id);
                if (it != next.move_to_tension_.end()) {
                    for (auto& tension : next.tensions_) {
                        if (tension.tension_id == it->second &&
                            tension.status == TensionStatus::open) {
                            tension.status = TensionStatus::resolved;
                            tension.resolved_by_move = m.move_id;
                            touched.push_back("tensions");
                        }
                    }
                }
            }
            break;
        }

        case Act::synthesize:
        case Act::recall:
            revise_synthesis();
            break;

        case Act::ground:
        case Act::update: {
            auto t = parse_target(m.target);
            if (t && t->kind == TargetRef::Kind::contribution) {
                auto it = next.move_to_idea_.find(t->move_id);
                if (it != next.move_to_idea_.end()) {
                    if (Idea* idea = next.mutable_idea(it->second)) {
                        idea->evidence.push_back(m.content);
                        touched.push_back("emerging_ideas");
                    }
                }
            }
            break;
        }

        case Act::recommend:
            next.next_actions_.push_back(m.content);
            touched.push_back("next_actions");
            break;
    }

    next.provenance_.push_back(ProvenanceEntry{m.move_id, m.act, touched});
    return next;
}

inline std::vector<Tension> open_tensions(const Workspace& w) {
    std::vector<Tension> out;
    for (const auto& t : w.tensions())
        if (t.status == TensionStatus::open) out.push_back(t);
    // tensions_ grows in creation order, so this is already sorted by id;
    // keep the guarantee explicit against future reordering.
    std::sort(out.begin(), out.end(),
              [](const Tension& a, const Tension& b) { return a.seq < b.seq; });
    return out;
}

// Closes out the workspace: every open tension flips to carried_forward and
// the record bundles them with the final synthesis and next actions.
inline std::pair<Workspace, CarryForward> carry_forward(const Workspace& w,
                                                        Phase phase) {
    if (phase != Phase::closure)
        throw DciError("PhaseMismatch",
                       "carry_forward requires the closure phase, session is in " +
                           std::string(to_string(phase)));
    Workspace next = w;
    CarryForward record;
    for (auto& t : next.tensions_) {
        if (t.status == TensionStatus::open) {
            t.status = TensionStatus::carried_forward;
            record.tensions.push_back(t);
        }
    }
    record.synthesis = next.synthesis();
    record.next_actions = next.next_actions_;
    return {std::move(next), std::move(record)};
}

// ---------------------------------------------------------------------------
// Snapshot export: six section names as top-level keys
// ---------------------------------------------------------------------------

inline Json to_json(const Tension& t) {
    Json sides = Json::object();
    for (const auto& [side, evidence] : t.evidence_per_side)
        sides[side] = evidence;
    return Json{{"tension_id", t.tension_id},
                {"conflicting_positions", t.conflicting_positions},
                {"evidence_per_side", sides},
                {"resolution_condition", t.resolution_condition},
                {"status", to_string(t.status)},
                {"created_by_move", t.created_by_move},
                {"resolved_by_move", t.resolved_by_move},
                {"origin_session", t.origin_session}};
}

inline Json snapshot(const Workspace& w) {
    Json doc = Json::object();
    doc["problem_view"] = Json{{"current", w.problem_view()},
                               {"revisions", Json::array()}};
    for (const auto& r : w.problem_view_history())
        doc["problem_view"]["revisions"].push_back(
            Json{{"text", r.text}, {"move_id", r.move_id}});

    doc["key_frames"] = Json::array();
    for (const auto& f : w.key_frames())
        doc["key_frames"].push_back(Json{{"frame_id", f.frame_id},
                                         {"description", f.description},
                                         {"author", f.author},
                                         {"move_ids", f.move_ids}});

    doc["emerging_ideas"] = Json::array();
    for (const auto& i : w.emerging_ideas())
        doc["emerging_ideas"].push_back(
            Json{{"idea_id", i.idea_id},
                 {"description", i.description},
                 {"author", i.author},
                 {"supporting_move_ids", i.supporting_move_ids},
                 {"evidence", i.evidence},
                 {"origin_session", i.origin_session}});

    Json items = Json::array();
    for (const auto& t : w.tensions()) items.push_back(to_json(t));
    Json questions = Json::array();
    for (const auto& q : w.open_questions())
        questions.push_back(Json{{"question_id", q.question_id},
                                 {"text", q.text},
                                 {"author", q.author},
                                 {"move_id", q.move_id},
                                 {"attached_to", q.attached_to}});
    doc["tensions"] = Json{{"items", items}, {"open_questions", questions}};

    doc["synthesis"] = Json{{"current", w.synthesis()}, {"revisions", Json::array()}};
    for (const auto& r : w.synthesis_history())
        doc["synthesis"]["revisions"].push_back(
            Json{{"text", r.text}, {"move_id", r.move_id}});

    doc["next_actions"] = w.next_actions();
    return doc;
}

} // namespace dci
