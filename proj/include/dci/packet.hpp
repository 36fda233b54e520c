#pragma once
// The decision packet: the terminal artifact of every session. Construction
// is pure; the builder copies the winner's record, preserves dissent with
// reasoning and confidence, and always emits at least one reopen condition.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dci/convergence.hpp"
#include "dci/delegate.hpp"
#include "dci/error.hpp"
#include "dci/option.hpp"

namespace dci {

struct Decision {
    std::string option_id;
    std::string label;
    std::string content; // the winning hypotheses' descriptions, joined
};

struct MinorityEntry {
    std::string delegate;
    std::string position;
    std::string reasoning;
    double confidence = 0.0;
};

struct DecisionPacket {
    Decision decision;
    std::string rationale;
    std::vector<std::string> supporting_evidence;
    std::vector<Objection> residual_objections;
    std::vector<MinorityEntry> minority_report;
    std::vector<std::string> action_plan;
    std::vector<std::string> assumptions;
    std::vector<std::string> risks;
    std::vector<std::string> reopen_conditions; // never empty
    double confidence = 0.0;
    bool forced_fallback = false;
    std::optional<FallbackMethod> fallback_method; // present iff forced
};

// Everything the builder needs beyond the finalists and sheets. All fields
// optional; the builder degrades gracefully.
struct PacketContext {
    std::map<std::string, DelegateState> delegate_states;
    std::vector<std::string> next_actions;
    std::vector<std::string> reopen_suggestions; // from hard recommend moves
    std::string rationale;
};

namespace detail {

inline const CandidateOption*
find_option(const std::vector<CandidateOption>& options,
            const std::string& option_id) {
    for (const auto& o : options)
        if (o.option_id == option_id) return &o;
    return nullptr;
}

inline std::string option_label(const std::vector<CandidateOption>& options,
                                const std::string& option_id) {
    const CandidateOption* o = find_option(options, option_id);
    return o ? o->canonical_label : option_id;
}

} // namespace detail

// One entry per delegate whose top choice diverges from the winner or who
// holds a standing objection against it. Entries keep the delegate's own
// view text, its reasoning, and its final confidence; council order (the
// order of the sheets) is preserved, objectors without sheets follow.
inline std::vector<MinorityEntry>
build_minority_report(const std::vector<CandidateOption>& finalists,
                      const std::vector<ScoreSheet>& sheets,
                      const std::string& winner_id,
                      const std::map<std::string, DelegateState>& states = {}) {
    const CandidateOption* winner = detail::find_option(finalists, winner_id);

    auto standing_objection = [&](const std::string& delegate)
        -> const Objection* {
        if (!winner) return nullptr;
        for (const auto& obj : winner->record.objections)
            if (obj.author == delegate && !obj.withdrawn) return &obj;
        return nullptr;
    };
    auto view_of = [&](const std::string& delegate) -> std::string {
        auto it = states.find(delegate);
        return (it != states.end()) ? it->second.view : std::string();
    };

    std::vector<MinorityEntry> report;
    std::set<std::string> covered;

    for (const auto& sheet : sheets) {
        bool divergent = !sheet.top_choice.empty() &&
                         sheet.top_choice != winner_id;
        const Objection* obj = standing_objection(sheet.delegate);
        if (!divergent && !obj) continue;

        MinorityEntry e;
        e.delegate = sheet.delegate;
        e.confidence = sheet.confidence;
        e.position = view_of(sheet.delegate);
        if (e.position.empty())
            e.position = divergent
                             ? "prefers " + detail::option_label(
                                                finalists, sheet.top_choice)
                             : "objects to the selected option";
        auto why = sheet.rationale.find(sheet.top_choice);
        if (divergent && why != sheet.rationale.end() && !why->second.empty())
            e.reasoning = why->second;
        else if (obj)
            e.reasoning = obj->content;
        else
            e.reasoning = "scored " +
                          detail::option_label(finalists, sheet.top_choice) +
                          " above the selected option";
        report.push_back(std::move(e));
        covered.insert(sheet.delegate);
    }

    // objectors who never filed a sheet still dissent
    if (winner) {
        for (const auto& obj : winner->record.objections) {
            if (obj.withdrawn || covered.count(obj.author)) continue;
            MinorityEntry e;
            e.delegate = obj.author;
            e.position = view_of(obj.author);
            if (e.position.empty()) e.position = "objects to the selected option";
            e.reasoning = obj.content;
            auto it = states.find(obj.author);
            e.confidence = (it != states.end()) ? it->second.confidence : 0.5;
            report.push_back(std::move(e));
            covered.insert(obj.author);
        }
    }
    return report;
}

// One condition per winner assumption, one per fatal standing objection,
// plus any delegate-authored suggestions, deduplicated by normalized text.
// Never empty: a generic condition covers the case of no sources.
inline std::vector<std::string>
derive_reopen_conditions(const OptionRecord& winner_record,
                         const std::vector<std::string>& suggestions = {}) {
    std::vector<std::string> conditions;
    std::set<std::string> seen;
    auto add = [&](const std::string& text) {
        std::string key = canonical_key(text);
        if (key.empty() || seen.count(key)) return;
        seen.insert(key);
        conditions.push_back(text);
    };

    for (const auto& a : winner_record.assumptions)
        add("assumption \"" + a.text + "\" no longer holds");
    for (const auto& obj : winner_record.objections)
        if (obj.fatal && !obj.withdrawn)
            add("evidence substantiates objection \"" + obj.content + "\"");
    for (const auto& s : suggestions) add(s);

    if (conditions.empty())
        conditions.push_back("new material evidence on the selected option");
    return conditions;
}

// Mean confidence of the delegates backing the winner; when nobody backs it
// (the forced case), the weakest sheet confidence; with no sheets at all,
// the weakest delegate state confidence.
inline double
compute_packet_confidence(const std::vector<ScoreSheet>& sheets,
                          const std::string& winner_id,
                          const std::map<std::string, DelegateState>& states) {
    double backer_sum = 0.0;
    int backers = 0;
    for (const auto& s : sheets) {
        if (s.top_choice == winner_id) {
            backer_sum += s.confidence;
            ++backers;
        }
    }
    if (backers > 0) return backer_sum / backers;
    if (!sheets.empty()) {
        double lo = sheets[0].confidence;
        for (const auto& s : sheets) lo = std::min(lo, s.confidence);
        return lo;
    }
    if (!states.empty()) {
        double lo = 1.0;
        for (const auto& [id, st] : states) lo = std::min(lo, st.confidence);
        return lo;
    }
    return 0.0;
}

// Checks the packet's own fields; an empty result means complete. The names
// returned match the serialized keys.
inline std::vector<std::string>
validate_completeness(const DecisionPacket& p) {
    std::vector<std::string> missing;
    if (p.decision.option_id.empty() || p.decision.label.empty())
        missing.push_back("decision");
    if (p.rationale.empty()) missing.push_back("rationale");
    if (p.reopen_conditions.empty()) missing.push_back("reopen_conditions");
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
        missing.push_back("confidence");
    if (p.forced_fallback && !p.fallback_method)
        missing.push_back("fallback_method");
    return missing;
}

inline DecisionPacket
finalize_decision(const std::string& winner_id,
                  const std::vector<CandidateOption>& finalists,
                  const std::vector<ScoreSheet>& sheets, bool forced,
                  std::optional<FallbackMethod> method,
                  const PacketContext& ctx = {}) {
    const CandidateOption* winner = detail::find_option(finalists, winner_id);
    if (!winner)
        throw DciError("UnknownOption",
                       "winner '" + winner_id + "' is not a finalist");
    if (forced && !method)
        throw DciError("InvalidPacket",
                       "a forced decision must name its fallback method");

    DecisionPacket p;
    p.decision.option_id = winner->option_id;
    p.decision.label = winner->canonical_label;
    {
        std::set<std::string> seen;
        for (const auto& h : winner->member_hypotheses) {
            const std::string& text =
                h.description.empty() ? h.label : h.description;
            if (text.empty() || seen.count(text)) continue;
            seen.insert(text);
            if (!p.decision.content.empty()) p.decision.content += "; ";
            p.decision.content += text;
        }
        if (p.decision.content.empty()) p.decision.content = winner->canonical_label;
    }

    p.rationale = ctx.rationale;
    if (p.rationale.empty())
        p.rationale = forced
                          ? "selected by the " + std::string(to_string(*method)) +
                                " fallback rule after the convergence tests failed"
                          : "converged on '" + winner->canonical_label + "'";

    for (const auto& ev : winner->record.evidence)
        p.supporting_evidence.push_back(ev.text);
    for (const auto& obj : winner->record.objections)
        if (!obj.withdrawn) p.residual_objections.push_back(obj);
    for (const auto& a : winner->record.assumptions)
        p.assumptions.push_back(a.text);
    for (const auto& r : winner->record.risks) p.risks.push_back(r.text);

    p.minority_report =
        build_minority_report(finalists, sheets, winner_id, ctx.delegate_states);
    p.action_plan = ctx.next_actions;
    p.reopen_conditions =
        derive_reopen_conditions(winner->record, ctx.reopen_suggestions);
    p.confidence =
        compute_packet_confidence(sheets, winner_id, ctx.delegate_states);
    p.forced_fallback = forced;
    if (forced) p.fallback_method = method;
    return p;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

inline Json to_json(const Objection& o) {
    Json j;
    j["author"] = o.author;
    j["round"] = o.round;
    j["content"] = o.content;
    j["fatal"] = o.fatal;
    j["withdrawn"] = o.withdrawn;
    j["move_id"] = o.move_id;
    j["option_id"] = o.option_id;
    return j;
}

inline Objection objection_from_json(const Json& j) {
    Objection o;
    o.author = j.at("author").get<std::string>();
    o.round = j.at("round").get<int>();
    o.content = j.at("content").get<std::string>();
    o.fatal = j.at("fatal").get<bool>();
    o.withdrawn = j.at("withdrawn").get<bool>();
    o.move_id = j.at("move_id").get<std::string>();
    o.option_id = j.at("option_id").get<std::string>();
    return o;
}

inline Json to_json(const DecisionPacket& p) {
    Json j;
    j["decision"] = Json{{"option_id", p.decision.option_id},
                         {"label", p.decision.label},
                         {"content", p.decision.content}};
    j["rationale"] = p.rationale;
    j["supporting_evidence"] = p.supporting_evidence;
    j["residual_objections"] = Json::array();
    for (const auto& o : p.residual_objections)
        j["residual_objections"].push_back(to_json(o));
    j["minority_report"] = Json::array();
    for (const auto& m : p.minority_report)
        j["minority_report"].push_back(Json{{"delegate", m.delegate},
                                            {"position", m.position},
                                            {"reasoning", m.reasoning},
                                            {"confidence", m.confidence}});
    j["action_plan"] = p.action_plan;
    j["assumptions"] = p.assumptions;
    j["risks"] = p.risks;
    j["reopen_conditions"] = p.reopen_conditions;
    j["confidence"] = p.confidence;
    j["forced_fallback"] = p.forced_fallback;
    if (p.fallback_method)
        j["fallback_method"] = to_string(*p.fallback_method);
    return j;
}

inline DecisionPacket packet_from_json(const Json& j) {
    auto require = [&](const char* key) -> const Json& {
        if (!j.contains(key))
            throw DciError("InvalidPacket",
                           std::string("missing field '") + key + "'");
        return j.at(key);
    };

    DecisionPacket p;
    const Json& d = require("decision");
    p.decision.option_id = d.at("option_id").get<std::string>();
    p.decision.label = d.at("label").get<std::string>();
    p.decision.content = d.at("content").get<std::string>();
    p.rationale = require("rationale").get<std::string>();
    for (const auto& e : require("supporting_evidence"))
        p.supporting_evidence.push_back(e.get<std::string>());
    for (const auto& o : require("residual_objections"))
        p.residual_objections.push_back(objection_from_json(o));
    for (const auto& m : require("minority_report")) {
        MinorityEntry e;
        e.delegate = m.at("delegate").get<std::string>();
        e.position = m.at("position").get<std::string>();
        e.reasoning = m.at("reasoning").get<std::string>();
        e.confidence = m.at("confidence").get<double>();
        p.minority_report.push_back(std::move(e));
    }
    for (const auto& a : require("action_plan"))
        p.action_plan.push_back(a.get<std::string>());
    for (const auto& a : require("assumptions"))
        p.assumptions.push_back(a.get<std::string>());
    for (const auto& r : require("risks"))
        p.risks.push_back(r.get<std::string>());
    for (const auto& c : require("reopen_conditions"))
        p.reopen_conditions.push_back(c.get<std::string>());
    p.confidence = require("confidence").get<double>();
    p.forced_fallback = require("forced_fallback").get<bool>();
    if (j.contains("fallback_method")) {
        std::string m = j.at("fallback_method").get<std::string>();
        if (m == "outranking") p.fallback_method = FallbackMethod::outranking;
        else if (m == "minimax_regret") p.fallback_method = FallbackMethod::minimax_regret;
        else if (m == "robust_satisficing") p.fallback_method = FallbackMethod::robust_satisficing;
        else if (m == "integrator") p.fallback_method = FallbackMethod::integrator;
        else throw DciError("InvalidPacket", "unknown fallback method '" + m + "'");
    }
    return p;
}

} // namespace dci
