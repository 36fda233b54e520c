#pragma once
// Drives a full deliberation: the eight-stage flow per session, recursive
// sub-sessions carved from the parent budget against one tree-wide round
// ledger, and a complete decision packet on every exit path. All delegate
// interaction goes through IDelegate; every outcome lands in the event log.

#include <algorithm>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dci/convergence.hpp"
#include "dci/delegate.hpp"
#include "dci/error.hpp"
#include "dci/event_log.hpp"
#include "dci/grammar.hpp"
#include "dci/option.hpp"
#include "dci/packet.hpp"
#include "dci/session.hpp"
#include "dci/wire.hpp"
#include "dci/workspace.hpp"

namespace dci {

using DelegateRoster = std::vector<std::shared_ptr<IDelegate>>;

inline const char* stage_name(int stage) {
    switch (stage) {
        case 0: return "session_init";
        case 1: return "independent_proposals";
        case 2: return "canonicalize_and_cluster";
        case 3: return "challenge_and_evidence";
        case 4: return "revision_and_compression";
        case 5: return "scoring";
        case 6: return "convergence_test";
        case 7: return "structured_fallback";
        case 8: return "actionization";
    }
    return "unknown";
}

// Folds a closed child session back into the parent workspace: the child's
// decision becomes an imported idea, each minority entry becomes a tension,
// and carried-forward tensions transfer with their origin attached.
inline void recall_result(SessionState& parent, const DecisionPacket& child,
                          const std::string& child_session_id,
                          std::string spawn_move_id = {},
                          const CarryForward* carry = nullptr) {
    if (spawn_move_id.empty()) spawn_move_id = "recall:" + child_session_id;
    parent.workspace.import_idea(child.decision.content,
                                 "session:" + child_session_id,
                                 child_session_id, spawn_move_id,
                                 child.supporting_evidence);
    for (const auto& m : child.minority_report) {
        Tension t;
        t.conflicting_positions = {child.decision.label, m.position};
        t.evidence_per_side[m.position].push_back(m.reasoning);
        t.resolution_condition =
            child.reopen_conditions.empty()
                ? "new material evidence on the selected option"
                : child.reopen_conditions.front();
        t.status = TensionStatus::carried_forward;
        t.created_by_move = spawn_move_id;
        parent.workspace.import_tension(std::move(t), child_session_id,
                                        spawn_move_id);
    }
    if (carry)
        for (const auto& t : carry->tensions)
            parent.workspace.import_tension(t, child_session_id,
                                            spawn_move_id);
}

namespace detail {

struct PendingSpawn {
    std::string by_move;
    std::string author;
    std::string subproblem;
    int requested_rounds = 1;
};

class SessionRunner {
public:
    SessionRunner(const SessionEnvelope& envelope, const DelegateRoster& roster,
                  EventLog& log, std::shared_ptr<RoundLedger> ledger)
        : state_(init_session(envelope, std::move(ledger))),
          roster_(roster),
          log_(log) {}

    DecisionPacket run(CarryForward* out_carry) {
        check_roster();
        for (const auto& d : roster_) {
            try { d->begin_session(env().session_id); } catch (...) {}
        }
        log_event("session_started",
                  Json{{"envelope", to_json(env())},
                       {"tree_rounds_at_start",
                        state_.ledger->rounds_used_in_tree}});
        if (state_.weights_renormalized)
            log_event("weights_renormalized",
                      Json{{"original_sum", state_.original_weight_sum}});
        enter_stage(0);
        advance(false);
        enter_stage(1);
        collect_proposals();
        advance(false);
        enter_stage(2);
        cluster_options();
        run_rounds();
        if (!state_.decided) run_fallback();
        advance(false); // closure
        DecisionPacket packet = finalize_packet(out_carry);
        for (const auto& d : roster_) {
            try { d->end_session(env().session_id); } catch (...) {}
        }
        return packet;
    }

private:
    SessionState state_;
    const DelegateRoster& roster_;
    EventLog& log_;

    std::vector<CandidateOption> options_;
    std::vector<CandidateOption> finalists_;
    std::vector<ScoreSheet> sheets_; // most recent scoring round
    ScoreTable table_;
    std::vector<RankedOption> ranking_;
    std::vector<MergeDirective> pending_merges_;
    std::vector<PendingSpawn> pending_spawns_;
    std::vector<std::string> reopen_suggestions_;
    int contribution_seq_ = 0;
    std::string winner_;
    bool forced_ = false;
    std::optional<FallbackMethod> method_;
    std::string verdict_rationale_;

    const SessionEnvelope& env() const { return state_.envelope; }

    void log_event(const std::string& type, Json payload = Json::object()) {
        log_.append(type, env().session_id, state_.current_round,
                    std::move(payload));
    }

    void enter_stage(int stage) {
        log_event("stage_entered",
                  Json{{"stage", stage}, {"name", stage_name(stage)}});
    }

    void advance(bool loop) {
        Phase from = state_.phase;
        if (loop)
            loop_back_phase(state_);
        else
            advance_phase(state_);
        log_event("phase_advanced", Json{{"from", to_string(from)},
                                         {"to", to_string(state_.phase)},
                                         {"loop", loop},
                                         {"workspace", snapshot(state_.workspace)}});
    }

    void check_roster() {
        if (roster_.size() != env().delegates.size())
            throw DciError("InvalidEnvelope",
                           "envelope lists " +
                               std::to_string(env().delegates.size()) +
                               " delegates but the roster has " +
                               std::to_string(roster_.size()));
        for (std::size_t i = 0; i < roster_.size(); ++i) {
            if (!roster_[i])
                throw DciError("InvalidEnvelope", "null delegate in roster");
            const CouncilSeat& seat = env().delegates[i];
            if (roster_[i]->id() != seat.delegate_id)
                throw DciError("InvalidEnvelope",
                               "seat " + std::to_string(i) + " names '" +
                                   seat.delegate_id + "' but the roster has '" +
                                   roster_[i]->id() + "'");
            if (roster_[i]->archetype() != seat.archetype)
                throw DciError("InvalidEnvelope",
                               "archetype mismatch for " + seat.delegate_id);
        }
    }

    // ---- Stage 1 ----------------------------------------------------------

    void collect_proposals() {
        std::vector<PoolEntry> pool;
        for (const auto& d : roster_) {
            std::optional<Proposal> p;
            std::string failure;
            try {
                p = d->generate_proposal(env().problem);
            } catch (const std::exception& e) {
                failure = std::string("provider failure: ") + e.what();
            } catch (...) {
                failure = "provider failure";
            }
            state_.stage1_turns += 1;
            if (!p) {
                log_event("turn_skipped",
                          Json{{"author", d->id()},
                               {"stage", 1},
                               {"reason", failure.empty() ? "declined"
                                                          : failure}});
                continue;
            }
            p->author = d->id();
            if (auto why = proposal_violation(*p)) {
                // keep the raw document: a replay has to re-submit it to
                // take the same path
                log_event("proposal_rejected",
                          Json{{"author", d->id()},
                               {"proposal", to_json(*p)},
                               {"reason", *why}});
                continue;
            }
            log_event("proposal_submitted",
                      Json{{"author", d->id()}, {"proposal", to_json(*p)}});
            auto& ds = state_.delegate_states[d->id()];
            ds.view = p->framing;
            ds.confidence = p->confidence;
            for (const auto& c : p->concerns) ds.concerns.insert(c);
            for (const auto& h : p->hypotheses)
                pool.push_back(PoolEntry{d->id(), h.label, h.description, ""});
        }
        pool_ = std::move(pool);
    }

    // ---- Stage 2 ----------------------------------------------------------

    void cluster_options() {
        if (pool_.empty()) {
            // A council that produced nothing still has to decide something;
            // the baseline keeps every later stage total.
            pool_.push_back(PoolEntry{
                "engine", "status-quo",
                "retain the current approach until new hypotheses arrive", ""});
            log_event("baseline_inserted",
                      Json{{"reason", "no hypotheses survived the proposal "
                                      "stage"}});
        }
        std::vector<DroppedCluster> dropped;
        options_ = canonicalize_and_cluster(pool_, env().max_options, &dropped);
        for (const auto& o : options_)
            log_event("option_created",
                      Json{{"option", o.option_id},
                           {"label", o.canonical_label},
                           {"members", (int)o.member_hypotheses.size()}});
        for (const auto& d : dropped)
            log_event("option_dropped", Json{{"label", d.canonical_label},
                                             {"members", d.members},
                                             {"reason", d.reason}});
        state_.candidates_ready = true;
    }

    // ---- round loop -------------------------------------------------------

    void run_rounds() {
        while (state_.rounds_used < state_.rounds_budget) {
            if (!state_.ledger->try_consume(env().tree_round_ceiling)) {
                log_event("ceiling_reached",
                          Json{{"used", state_.ledger->rounds_used_in_tree},
                               {"ceiling", env().tree_round_ceiling}});
                break;
            }
            state_.rounds_used += 1;
            state_.current_round = state_.rounds_used;

            enter_stage(3);
            collect_turns();
            advance(false); // mutual_engagement -> collective_shaping
            enter_stage(4);
            compress_options();
            enter_stage(5);
            score_finalists();
            enter_stage(6);
            ConvergenceVerdict v = test_convergence(
                ranking_, finalists_, env().convergence_margin,
                env().majority_threshold, sheets_, (int)roster_.size());
            log_event("verdict_reached",
                      Json{{"kind", to_string(v.kind)},
                           {"winner", v.winner ? Json(*v.winner) : Json()}});
            if (v.kind != VerdictKind::none) {
                state_.decided = true;
                winner_ = *v.winner;
                forced_ = false;
                verdict_rationale_ = compose_rationale(v);
                skip_pending_spawns("session converged");
                return;
            }
            if (state_.rounds_used >= state_.rounds_budget) {
                skip_pending_spawns("round budget exhausted");
                return; // collective_shaping, undecided: fallback next
            }
            process_pending_spawns();
            if (state_.ledger->exhausted(env().tree_round_ceiling)) {
                log_event("ceiling_reached",
                          Json{{"used", state_.ledger->rounds_used_in_tree},
                               {"ceiling", env().tree_round_ceiling}});
                return; // keep the last scored table for the fallback
            }
            advance(true); // loop back to mutual_engagement
        }
        if (state_.phase == Phase::mutual_engagement) {
            // The loop never ran: the tree ceiling was gone before the first
            // round. Finalists come straight from the option set and the
            // fallback works without scores.
            CompressionLog flog;
            finalists_ = select_finalists(options_, env().finalist_count, &flog);
            log_finalists(flog);
            table_ = ScoreTable{};
            table_.criteria = env().criteria;
            ranking_ = aggregate_scores(finalists_, table_);
            advance(false);
        }
    }

    // ---- Stage 3 ----------------------------------------------------------

    void collect_turns() {
        std::vector<ChallengeContribution> admission_batch;
        for (const auto& d : roster_) {
            std::optional<DelegateTurn> turn;
            std::string failure;
            try {
                turn = d->contribute(options_, state_.current_round);
            } catch (const std::exception& e) {
                failure = std::string("provider failure: ") + e.what();
            } catch (...) {
                failure = "provider failure";
            }
            if (!turn) {
                log_event("turn_skipped",
                          Json{{"author", d->id()},
                               {"stage", 3},
                               {"reason", failure.empty() ? "declined"
                                                          : failure}});
                continue;
            }
            log_event("turn_submitted",
                      Json{{"author", d->id()}, {"turn", to_json(*turn)}});
            process_contributions(d->id(), turn->contributions,
                                  admission_batch);
            process_moves(d->id(), turn->moves);
        }
        auto outcome =
            admit_new_hypotheses(options_, admission_batch,
                                 state_.current_round, env().max_rounds,
                                 env().max_options);
        for (const auto& r : outcome.refusals)
            log_event("admission_refused",
                      Json{{"author", r.author},
                           {"label", r.hypothesis.label},
                           {"reason", r.reason}});
        options_ = std::move(outcome.options);
        for (const auto& id : outcome.admitted_ids)
            log_event("option_admitted",
                      Json{{"option", id},
                           {"label", detail::option_label(options_, id)}});
    }

    void process_contributions(const std::string& author,
                               std::vector<ChallengeContribution> contributions,
                               std::vector<ChallengeContribution>& batch) {
        for (auto& c : contributions) {
            c.author = author;
            auto reject = [&](const std::string& reason) {
                log_event("contribution_rejected",
                          Json{{"author", author},
                               {"option", c.option_id},
                               {"kind", to_string(c.kind)},
                               {"reason", reason}});
            };
            if (auto why = contribution_violation(c)) {
                reject(*why);
                continue;
            }
            CandidateOption* target = nullptr;
            for (auto& o : options_)
                if (o.option_id == c.option_id) { target = &o; break; }
            // A revision_suggestion exists to carry a new hypothesis; every
            // other kind records onto an option and needs a live target.
            if (!target && c.kind != ContributionKind::revision_suggestion) {
                reject("unknown option '" + c.option_id + "'");
                continue;
            }
            if (c.move_id.empty()) {
                do {
                    c.move_id = "ct-" + std::to_string(++contribution_seq_);
                } while (state_.known_move_ids.count(c.move_id));
            } else if (state_.known_move_ids.count(c.move_id)) {
                reject("duplicate id '" + c.move_id + "'");
                continue;
            }
            state_.known_move_ids.insert(c.move_id);
            if (target) {
                record_contribution(*target, c, state_.current_round);
                log_event("contribution_recorded",
                          Json{{"author", author},
                               {"option", c.option_id},
                               {"kind", to_string(c.kind)},
                               {"fatal", c.fatal},
                               {"move_id", c.move_id}});
            }
            if (c.proposed_new_hypothesis) batch.push_back(c);
        }
    }

    void process_moves(const std::string& author, std::vector<Move> moves) {
        for (auto& m : moves) {
            if (m.actor.empty()) author_stamp(m, author);
            SessionContext ctx;
            ctx.session_id = env().session_id;
            ctx.round = state_.current_round;
            ctx.phase = state_.phase;
            ctx.known_ids = &state_.known_move_ids;
            ctx.depth = env().depth;
            ctx.max_depth = env().max_depth;
            ValidationResult vr = validate_move(m, ctx);
            if (!vr.accepted) {
                log_event("move_rejected",
                          Json{{"author", author},
                               {"move", serialize_move(m)},
                               {"code", vr.rejection.code},
                               {"field", vr.rejection.field},
                               {"reason", vr.rejection.reason}});
                continue;
            }
            state_.known_move_ids.insert(m.move_id);
            const Workspace before = state_.workspace;
            state_.workspace = apply_move(before, m);
            Json sections = Json::array();
            if (!state_.workspace.provenance().empty() &&
                state_.workspace.provenance().size() >
                    before.provenance().size())
                for (const auto& s :
                     state_.workspace.provenance().back().sections)
                    sections.push_back(s);
            log_event("move_accepted", Json{{"author", author},
                                            {"move", serialize_move(m)},
                                            {"sections", sections}});
            apply_move_consequences(author, m);
        }
    }

    static void author_stamp(Move& m, const std::string& author) {
        m.actor = author;
    }

    void apply_move_consequences(const std::string& author, const Move& m) {
        bool concession = (m.act == Act::update) ||
                          (detail::extras_string(m, "response") == "concede");
        if (concession) {
            auto t = parse_target(m.target);
            if (t && t->kind == TargetRef::Kind::contribution &&
                withdraw_objection(options_, t->move_id))
                log_event("objection_withdrawn",
                          Json{{"objection_move", t->move_id},
                               {"by_move", m.move_id}});
        }
        if (m.act == Act::update) {
            auto& ds = state_.delegate_states[author];
            ds = record_position_shift(ds, m.content, m.confidence, m.move_id,
                                       state_.current_round);
        }
        if (m.act == Act::bridge) {
            auto it = m.extras.find("bridges");
            if (it != m.extras.end() && it->is_array() && it->size() == 2 &&
                (*it)[0].is_string() && (*it)[1].is_string())
                pending_merges_.push_back(
                    MergeDirective{(*it)[0].get<std::string>(),
                                   (*it)[1].get<std::string>(), m.move_id});
        }
        if (m.act == Act::recommend && m.move_force == MoveForce::hard)
            reopen_suggestions_.push_back(m.content);
        if (m.act == Act::spawn) {
            int requested = 1;
            auto it = m.extras.find("requested_rounds");
            if (it != m.extras.end() && it->is_number_integer())
                requested = it->get<int>();
            pending_spawns_.push_back(
                PendingSpawn{m.move_id, author, m.content, requested});
        }
    }

    // ---- Stage 4 ----------------------------------------------------------

    void compress_options() {
        CompressionLog clog;
        options_ = revise_and_compress(options_, sheets_, pending_merges_,
                                       env().max_options, &clog);
        pending_merges_.clear();
        for (const auto& r : clog.removed)
            log_event("option_removed", Json{{"option", r.option_id},
                                             {"dominated_by", r.dominated_by}});
        for (const auto& m : clog.merged)
            log_event("option_merged", Json{{"kept", m.kept},
                                            {"absorbed", m.absorbed},
                                            {"by_move", m.move_id}});
        for (const auto& t : clog.truncated)
            log_event("option_truncated",
                      Json{{"option", t.option_id}, {"support", t.support}});
        CompressionLog flog;
        finalists_ = select_finalists(options_, env().finalist_count, &flog);
        log_finalists(flog);
    }

    void log_finalists(const CompressionLog& flog) {
        Json ids = Json::array();
        for (const auto& f : finalists_) ids.push_back(f.option_id);
        Json cut = Json::array();
        for (const auto& t : flog.truncated) cut.push_back(t.option_id);
        log_event("finalists_selected",
                  Json{{"options", ids}, {"cut", cut}});
    }

    // ---- Stage 5 ----------------------------------------------------------

    void score_finalists() {
        sheets_.clear();
        for (const auto& d : roster_) {
            std::optional<ScoreSheet> s;
            std::string failure;
            try {
                s = d->score(finalists_, env().criteria);
            } catch (const std::exception& e) {
                failure = std::string("provider failure: ") + e.what();
            } catch (...) {
                failure = "provider failure";
            }
            if (!s) {
                log_event("turn_skipped",
                          Json{{"author", d->id()},
                               {"stage", 5},
                               {"reason", failure.empty() ? "declined"
                                                          : failure}});
                continue;
            }
            s->delegate = d->id();
            if (auto why = sheet_violation(*s, finalists_, env().criteria)) {
                log_event("sheet_rejected", Json{{"delegate", d->id()},
                                                 {"sheet", to_json(*s)},
                                                 {"reason", *why}});
                continue;
            }
            auto fit = env().domain_fit.find(d->id());
            s->top_choice = compute_top_choice(
                *s, finalists_, env().criteria,
                fit != env().domain_fit.end()
                    ? fit->second
                    : std::map<std::string, double>{});
            log_event("sheet_recorded",
                      Json{{"delegate", d->id()}, {"sheet", to_json(*s)}});
            sheets_.push_back(std::move(*s));
        }
        table_ = build_score_table(sheets_, finalists_, env().criteria,
                                   env().domain_fit);
        ranking_ = aggregate_scores(finalists_, table_);
        Json ranks = Json::array();
        for (const auto& r : ranking_)
            ranks.push_back(Json{{"option", r.option_id},
                                 {"total", r.total},
                                 {"normalized", r.normalized}});
        log_event("ranking_computed", Json{{"ranking", ranks}});
    }

    // ---- spawning ---------------------------------------------------------

    void skip_pending_spawns(const std::string& reason) {
        for (const auto& p : pending_spawns_)
            log_event("spawn_skipped",
                      Json{{"by_move", p.by_move}, {"reason", reason}});
        pending_spawns_.clear();
    }

    void process_pending_spawns() {
        std::vector<PendingSpawn> pending = std::move(pending_spawns_);
        pending_spawns_.clear();
        for (const auto& p : pending) {
            SpawnOutcome out =
                spawn_subsession(state_, p.subproblem, p.requested_rounds);
            if (auto* refusal = std::get_if<SpawnRefusal>(&out)) {
                log_event("spawn_refused", Json{{"by_move", p.by_move},
                                                {"code", refusal->code},
                                                {"reason", refusal->reason}});
                continue;
            }
            const SessionEnvelope& child_env = std::get<SessionEnvelope>(out);
            log_event("subsession_spawned",
                      Json{{"child", child_env.session_id},
                           {"by_move", p.by_move},
                           {"granted_rounds", child_env.max_rounds},
                           {"subproblem", p.subproblem}});
            SessionRunner child(child_env, roster_, log_, state_.ledger);
            CarryForward carry;
            DecisionPacket child_packet = child.run(&carry);
            log_event("subsession_completed",
                      Json{{"child", child_env.session_id}});
            recall_result(state_, child_packet, child_env.session_id,
                          p.by_move, &carry);
            log_event("recall_applied",
                      Json{{"child", child_env.session_id},
                           {"decision", child_packet.decision.label},
                           {"tensions",
                            (int)(child_packet.minority_report.size() +
                                  carry.tensions.size())}});
        }
    }

    // ---- Stage 7 ----------------------------------------------------------

    void run_fallback() {
        enter_stage(7);
        std::shared_ptr<IDelegate> integrator = roster_.front();
        for (const auto& d : roster_)
            if (d->archetype() == ArchetypeKind::integrator) {
                integrator = d;
                break;
            }
        auto pick = [&](const std::vector<std::string>& top2)
            -> std::optional<std::string> {
            std::optional<std::string> choice;
            try {
                choice = integrator->integrator_pick(top2);
            } catch (...) {
                choice = std::nullopt;
            }
            log_event("integrator_pick",
                      Json{{"delegate", integrator->id()},
                           {"top2", top2},
                           {"picked", choice ? Json(*choice) : Json()}});
            return choice;
        };
        FallbackResult r = fallback_select(finalists_, table_, pick);
        log_event("fallback_selected", Json{{"winner", r.winner},
                                            {"method", to_string(r.method)},
                                            {"levels_tried", r.levels_tried}});
        winner_ = r.winner;
        forced_ = true;
        method_ = r.method;
        state_.decided = true;
    }

    // ---- Stage 8 ----------------------------------------------------------

    std::string compose_rationale(const ConvergenceVerdict& v) const {
        const std::string label = detail::option_label(finalists_, winner_);
        char buf[240];
        switch (v.kind) {
            case VerdictKind::score_dominance:
                if (ranking_.size() < 2) {
                    std::snprintf(buf, sizeof buf,
                                  "score dominance: '%s' is the only finalist "
                                  "after round %d",
                                  label.c_str(), state_.current_round);
                } else {
                    std::snprintf(buf, sizeof buf,
                                  "score dominance: '%s' leads the runner-up "
                                  "by %.4f normalized points after round %d",
                                  label.c_str(),
                                  ranking_[0].normalized -
                                      ranking_[1].normalized,
                                  state_.current_round);
                }
                break;
            case VerdictKind::majority_backing: {
                int backers = 0;
                for (const auto& s : sheets_)
                    if (s.top_choice == winner_) ++backers;
                std::snprintf(buf, sizeof buf,
                              "majority backing: %d of %d delegates ranked "
                              "'%s' first in round %d",
                              backers, (int)roster_.size(), label.c_str(),
                              state_.current_round);
                break;
            }
            case VerdictKind::no_blocking_objection:
                std::snprintf(buf, sizeof buf,
                              "no blocking objection: '%s' leads after round "
                              "%d with no standing fatal objections",
                              label.c_str(), state_.current_round);
                break;
            case VerdictKind::none:
                buf[0] = '\0';
                break;
        }
        return buf;
    }

    DecisionPacket finalize_packet(CarryForward* out_carry) {
        enter_stage(8);
        PacketContext ctx;
        ctx.delegate_states = state_.delegate_states;
        ctx.next_actions = state_.workspace.next_actions();
        ctx.reopen_suggestions = reopen_suggestions_;
        ctx.rationale = verdict_rationale_;
        DecisionPacket packet = finalize_decision(winner_, finalists_, sheets_,
                                                  forced_, method_, ctx);
        auto [closed, carry] = carry_forward(state_.workspace, state_.phase);
        state_.workspace = std::move(closed);
        log_event("carry_forward_recorded",
                  Json{{"tensions", (int)carry.tensions.size()},
                       {"next_actions", (int)carry.next_actions.size()}});
        if (out_carry) *out_carry = std::move(carry);
        log_event("packet_finalized", Json{{"packet", to_json(packet)}});
        log_event("session_completed",
                  Json{{"rounds_used", state_.rounds_used},
                       {"tree_rounds", state_.ledger->rounds_used_in_tree}});
        return packet;
    }

    std::vector<PoolEntry> pool_;
};

} // namespace detail

// Runs one session (and any sub-sessions it spawns) to completion. The
// roster must line up with the envelope's council seats. A root call may
// omit the ledger; sub-sessions share the caller's.
inline DecisionPacket run_session(const SessionEnvelope& envelope,
                                  const DelegateRoster& delegates,
                                  EventLog& log,
                                  std::shared_ptr<RoundLedger> ledger = nullptr,
                                  CarryForward* out_carry = nullptr) {
    detail::SessionRunner runner(envelope, delegates, log, std::move(ledger));
    return runner.run(out_carry);
}

} // namespace dci
