#pragma once
// JSON forms for delegate outputs: proposals, turns, contributions, and
// score sheets. These are what event logs store and what scripted sessions
// are written in. Moves have their own pair in grammar.hpp.

#include <optional>
#include <string>
#include <vector>

#include "dci/delegate.hpp"
#include "dci/error.hpp"
#include "dci/grammar.hpp"

namespace dci {

inline Json to_json(const Proposal& p) {
    Json hyps = Json::array();
    for (const auto& h : p.hypotheses)
        hyps.push_back(Json{{"label", h.label}, {"description", h.description}});
    return Json{{"author", p.author},
                {"framing", p.framing},
                {"hypotheses", hyps},
                {"concerns", p.concerns},
                {"confidence", p.confidence},
                {"suggested_criteria", p.suggested_criteria}};
}

inline Proposal proposal_from_json(const Json& doc) {
    Proposal p;
    p.author = doc.value("author", std::string());
    p.framing = doc.value("framing", std::string());
    if (doc.contains("hypotheses"))
        for (const auto& h : doc.at("hypotheses")) {
            Hypothesis hyp;
            hyp.label = h.value("label", std::string());
            hyp.description = h.value("description", std::string());
            p.hypotheses.push_back(std::move(hyp));
        }
    if (doc.contains("concerns"))
        p.concerns = doc.at("concerns").get<std::vector<std::string>>();
    p.confidence = doc.value("confidence", 0.5);
    if (doc.contains("suggested_criteria"))
        p.suggested_criteria =
            doc.at("suggested_criteria").get<std::vector<std::string>>();
    return p;
}

inline Json to_json(const NewHypothesis& h) {
    return Json{{"label", h.label},
                {"description", h.description},
                {"evidence_link", h.evidence_link},
                {"superior_to", h.superior_to}};
}

inline NewHypothesis new_hypothesis_from_json(const Json& doc) {
    NewHypothesis h;
    h.label = doc.value("label", std::string());
    h.description = doc.value("description", std::string());
    h.evidence_link = doc.value("evidence_link", std::string());
    h.superior_to = doc.value("superior_to", std::string());
    return h;
}

inline Json to_json(const ChallengeContribution& c) {
    Json doc{{"author", c.author},
             {"option_id", c.option_id},
             {"kind", to_string(c.kind)},
             {"content", c.content},
             {"fatal", c.fatal},
             {"linked_evidence", c.linked_evidence},
             {"move_id", c.move_id}};
    if (c.proposed_new_hypothesis)
        doc["proposed_new_hypothesis"] = to_json(*c.proposed_new_hypothesis);
    return doc;
}

inline ChallengeContribution contribution_from_json(const Json& doc) {
    ChallengeContribution c;
    c.author = doc.value("author", std::string());
    c.option_id = doc.value("option_id", std::string());
    std::string kind = doc.value("kind", std::string("support"));
    auto k = contribution_kind_from_string(kind);
    if (!k)
        throw DciError("InvalidContribution",
                       "unknown contribution kind '" + kind + "'");
    c.kind = *k;
    c.content = doc.value("content", std::string());
    c.fatal = doc.value("fatal", false);
    c.linked_evidence = doc.value("linked_evidence", std::string());
    c.move_id = doc.value("move_id", std::string());
    if (doc.contains("proposed_new_hypothesis"))
        c.proposed_new_hypothesis =
            new_hypothesis_from_json(doc.at("proposed_new_hypothesis"));
    return c;
}

inline Json to_json(const DelegateTurn& t) {
    Json contributions = Json::array();
    for (const auto& c : t.contributions) contributions.push_back(to_json(c));
    Json moves = Json::array();
    for (const auto& m : t.moves) moves.push_back(serialize_move(m));
    return Json{{"contributions", contributions}, {"moves", moves}};
}

inline DelegateTurn turn_from_json(const Json& doc) {
    DelegateTurn t;
    if (doc.contains("contributions"))
        for (const auto& c : doc.at("contributions"))
            t.contributions.push_back(contribution_from_json(c));
    if (doc.contains("moves"))
        for (const auto& m : doc.at("moves")) {
            auto parsed = parse_move(m);
            if (!parsed.ok())
                throw DciError("InvalidMoveDoc",
                               parsed.error
                                   ? parsed.error->field + ": " +
                                         parsed.error->message
                                   : std::string("unparseable move"));
            t.moves.push_back(*parsed.move);
        }
    return t;
}

inline Json to_json(const ScoreSheet& s) {
    Json scores = Json::object();
    for (const auto& [option, row] : s.scores) {
        Json r = Json::object();
        for (const auto& [criterion, value] : row) r[criterion] = value;
        scores[option] = r;
    }
    Json rationale = Json::object();
    for (const auto& [option, text] : s.rationale) rationale[option] = text;
    return Json{{"delegate", s.delegate},
                {"scores", scores},
                {"confidence", s.confidence},
                {"evidence_strength", s.evidence_strength},
                {"rationale", rationale},
                {"top_choice", s.top_choice}};
}

inline ScoreSheet sheet_from_json(const Json& doc) {
    ScoreSheet s;
    s.delegate = doc.value("delegate", std::string());
    if (doc.contains("scores"))
        for (auto row = doc.at("scores").begin(); row != doc.at("scores").end();
             ++row)
            for (auto cell = row.value().begin(); cell != row.value().end();
                 ++cell)
                s.scores[row.key()][cell.key()] = cell.value().get<double>();
    s.confidence = doc.value("confidence", 1.0);
    s.evidence_strength = doc.value("evidence_strength", 1.0);
    if (doc.contains("rationale"))
        for (auto it = doc.at("rationale").begin();
             it != doc.at("rationale").end(); ++it)
            s.rationale[it.key()] = it.value().get<std::string>();
    s.top_choice = doc.value("top_choice", std::string());
    return s;
}

} // namespace dci
