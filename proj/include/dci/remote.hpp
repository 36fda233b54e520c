#pragma once

// Adapter that turns a text completion endpoint into a delegate. Each stage
// sends one request: a system text carrying the archetype orientation and
// the document grammar, plus a stage prompt with the live context. The reply
// may wrap its JSON documents in prose; the adapter extracts every balanced
// object and converts the ones it recognizes. A reply with no usable
// documents is rejected and re-prompted with the reason, up to the retry
// bound, after which the turn is skipped. Transport problems throw
// ProviderFailure and the engine records the skipped turn instead.
//
// This header pulls in httplib (sockets, threads); include it only where a
// remote council is actually wired up.

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>

#include "dci/delegate.hpp"
#include "dci/wire.hpp"

namespace dci {

struct RemoteConfig {
    std::string base_url = "http://127.0.0.1:8089";
    std::string path = "/complete";
    int retry_bound = 2; // re-prompts after the first rejected reply
    int timeout_seconds = 30;
};

namespace detail {

// Pulls every balanced, parseable JSON object out of free-form text.
// String literals and escapes are honoured, so braces inside strings do not
// confuse the scan; regions that fail to parse are skipped.
inline std::vector<Json> extract_json_objects(const std::string& text) {
    std::vector<Json> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '{') {
            ++i;
            continue;
        }
        int depth = 0;
        bool in_string = false, escaped = false;
        std::size_t j = i;
        for (; j < text.size(); ++j) {
            char c = text[j];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') depth += 1;
            else if (c == '}') {
                depth -= 1;
                if (depth == 0) break;
            }
        }
        if (j >= text.size()) break; // unbalanced tail
        Json doc = Json::parse(text.substr(i, j - i + 1), nullptr, false);
        if (!doc.is_discarded() && doc.is_object()) {
            out.push_back(std::move(doc));
            i = j + 1;
        } else {
            i += 1; // not a document; rescan inside
        }
    }
    return out;
}

inline std::string grammar_instructions() {
    return
        "Reply with JSON documents only, optionally surrounded by short "
        "prose. Recognized documents:\n"
        "- proposal: {\"framing\", \"hypotheses\": [{\"label\", "
        "\"description\"}], \"concerns\": [], \"confidence\": 0..1, "
        "\"suggested_criteria\": []}\n"
        "- contribution: {\"option_id\", \"kind\": "
        "support|challenge|evidence|counterexample|revision_suggestion|"
        "uncertainty_note, \"content\", \"fatal\": bool (challenges only), "
        "\"linked_evidence\", \"move_id\"}\n"
        "- move: {\"move_id\", \"session_id\", \"round\", \"phase\", "
        "\"actor\", \"act\", \"intent\", \"target\", \"content\", "
        "\"confidence\", \"move_force\": soft|hard, \"mode\", "
        "\"meta_level\"}\n"
        "- score sheet: {\"scores\": {option: {criterion: 0..10}}, "
        "\"confidence\": 0..1, \"evidence_strength\": 0..1, \"rationale\": "
        "{option: text}, \"top_choice\"}\n"
        "- pick: {\"picked\": \"option-id\"}\n"
        "Reuse the exact labels of ideas you consider equivalent to "
        "existing ones.";
}

inline std::string archetype_orientation(ArchetypeKind kind) {
    Archetype a = default_archetype_bias(kind);
    std::ostringstream os;
    os << "You deliberate as the " << to_string(kind)
       << " archetype. Favoured acts:";
    for (const auto& [act, weight] : a.act_bias)
        if (weight > 1.0 / 14.0 + 1e-12)
            os << " " << to_string(act);
    os << ". Any act stays legal; the archetype shapes tendency, not "
          "permission.";
    return os.str();
}

} // namespace detail

class RemoteDelegate : public IDelegate {
public:
    RemoteDelegate(std::string id, ArchetypeKind kind, RemoteConfig config)
        : id_(std::move(id)), kind_(kind), config_(std::move(config)) {}

    std::string id() const override { return id_; }
    ArchetypeKind archetype() const override { return kind_; }

    void begin_session(const std::string& session_id) override {
        sessions_.push_back(session_id);
    }
    void end_session(const std::string&) override {
        if (!sessions_.empty()) sessions_.pop_back();
    }

    std::optional<Proposal>
    generate_proposal(const std::string& problem) override {
        std::ostringstream prompt;
        prompt << "Session " << session() << ", proposal stage.\n"
               << "Problem: " << problem << "\n"
               << "Emit one proposal document with your framing, one or two "
                  "hypotheses, your concerns, and your confidence.";
        return ask<Proposal>(prompt.str(), [](const Json& doc)
                                 -> std::optional<Proposal> {
            if (!doc.contains("hypotheses")) return std::nullopt;
            return proposal_from_json(doc);
        });
    }

    std::optional<DelegateTurn>
    contribute(const std::vector<CandidateOption>& options,
               int round) override {
        round_ = round;
        std::ostringstream prompt;
        prompt << "Session " << session() << ", challenge stage, round "
               << round << ".\nCandidate options:\n";
        for (const auto& o : options) {
            prompt << "- " << o.option_id << " \"" << o.canonical_label
                   << "\":";
            for (std::size_t k = 0; k < o.member_hypotheses.size(); ++k)
                prompt << (k ? "; " : " ")
                       << o.member_hypotheses[k].description;
            prompt << "\n";
        }
        prompt << "Emit contribution documents (support, challenge, "
                  "evidence, counterexample, revision_suggestion, "
                  "uncertainty_note) and, if needed, move documents with "
                  "session_id \""
               << session() << "\", round " << round
               << ", phase \"mutual_engagement\". A full turn may also come "
                  "as one {\"contributions\": [...], \"moves\": [...]} "
                  "document.";
        return ask_turn(prompt.str());
    }

    std::optional<ScoreSheet>
    score(const std::vector<CandidateOption>& finalists,
          const std::vector<Criterion>& criteria) override {
        std::ostringstream prompt;
        prompt << "Session " << session() << ", scoring stage, round "
               << round_ << ".\nFinalists:\n";
        for (const auto& f : finalists)
            prompt << "- " << f.option_id << " \"" << f.canonical_label
                   << "\"\n";
        prompt << "Criteria:";
        for (const auto& c : criteria) prompt << " " << c.id;
        prompt << "\nEmit one score sheet document covering every finalist "
                  "on every criterion with scores in [0,10].";
        return ask<ScoreSheet>(prompt.str(), [](const Json& doc)
                                   -> std::optional<ScoreSheet> {
            if (!doc.contains("scores")) return std::nullopt;
            return sheet_from_json(doc);
        });
    }

    std::optional<std::string>
    integrator_pick(const std::vector<std::string>& top2) override {
        std::ostringstream prompt;
        prompt << "Session " << session()
               << ", fallback stage. The convergence tests failed. Pick one "
                  "of the two leading options: "
               << top2[0] << " or " << top2[1]
               << ". Emit {\"picked\": \"<option-id>\"} or "
                  "{\"picked\": null} to decline.";
        bool declined = false;
        auto picked = ask<std::string>(
            prompt.str(),
            [&declined](const Json& doc) -> std::optional<std::string> {
                if (!doc.contains("picked")) return std::nullopt;
                if (doc.at("picked").is_null()) {
                    declined = true;
                    return std::nullopt;
                }
                return doc.at("picked").get<std::string>();
            },
            &declined);
        return picked;
    }

private:
    std::string session() const {
        return sessions_.empty() ? std::string("S-1") : sessions_.back();
    }

    // One completion round trip. Anything other than a well-formed reply
    // from a reachable endpoint is the provider's failure, not the model's.
    std::string complete(const std::string& prompt) const {
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        Json body{{"system",
                   detail::archetype_orientation(kind_) + "\n\n" +
                       detail::grammar_instructions()},
                  {"prompt", prompt}};
        auto res = client.Post(config_.path, body.dump(), "application/json");
        if (!res)
            throw DciError("ProviderFailure",
                           id_ + ": cannot reach " + config_.base_url +
                               config_.path);
        if (res->status != 200)
            throw DciError("ProviderFailure",
                           id_ + ": endpoint returned status " +
                               std::to_string(res->status));
        Json reply = Json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.is_object() ||
            !reply.contains("text") || !reply.at("text").is_string())
            throw DciError("ProviderFailure",
                           id_ + ": reply body is not {\"text\": ...}");
        return reply.at("text").get<std::string>();
    }

    // Reject-and-reprompt loop: convert the first recognizable document;
    // otherwise append the rejection reason and try again, bounded.
    template <typename T, typename Converter>
    std::optional<T> ask(const std::string& stage_prompt, Converter convert,
                         const bool* stop = nullptr) {
        std::string complaint;
        for (int attempt = 0; attempt <= config_.retry_bound; ++attempt) {
            std::string text = complete(reprompt(stage_prompt, complaint));
            std::string why = "reply contained no recognizable document";
            for (const Json& doc : detail::extract_json_objects(text)) {
                try {
                    if (auto value = convert(doc)) return value;
                    if (stop && *stop) return std::nullopt;
                } catch (const DciError& e) {
                    why = e.what();
                }
            }
            complaint = why;
        }
        return std::nullopt;
    }

    // Stage 3 accepts either one full turn document or loose contribution
    // and move documents; a malformed move is a rejection with its parser's
    // field-level reason.
    std::optional<DelegateTurn> ask_turn(const std::string& stage_prompt) {
        std::string complaint;
        for (int attempt = 0; attempt <= config_.retry_bound; ++attempt) {
            std::string text = complete(reprompt(stage_prompt, complaint));
            DelegateTurn turn;
            bool got_any = false;
            std::string why;
            for (const Json& doc : detail::extract_json_objects(text)) {
                try {
                    if (doc.contains("contributions") ||
                        doc.contains("moves")) {
                        DelegateTurn t = turn_from_json(doc);
                        turn.contributions.insert(turn.contributions.end(),
                                                  t.contributions.begin(),
                                                  t.contributions.end());
                        turn.moves.insert(turn.moves.end(), t.moves.begin(),
                                          t.moves.end());
                        got_any = true;
                    } else if (doc.contains("act")) {
                        ParseResult parsed = parse_move(doc);
                        if (!parsed.ok())
                            throw DciError("InvalidMoveDoc",
                                           parsed.error->field + ": " +
                                               parsed.error->message);
                        turn.moves.push_back(*parsed.move);
                        got_any = true;
                    } else if (doc.contains("kind")) {
                        turn.contributions.push_back(
                            contribution_from_json(doc));
                        got_any = true;
                    }
                } catch (const DciError& e) {
                    got_any = false;
                    why = e.what();
                    break;
                }
            }
            if (got_any) return turn;
            complaint = why.empty()
                            ? "reply contained no recognizable document"
                            : why;
        }
        return std::nullopt;
    }

    static std::string reprompt(const std::string& stage_prompt,
                                const std::string& complaint) {
        if (complaint.empty()) return stage_prompt;
        return stage_prompt +
               "\n\nYour previous reply was rejected: " + complaint +
               "\nRe-emit corrected JSON documents only.";
    }

    std::string id_;
    ArchetypeKind kind_;
    RemoteConfig config_;
    std::vector<std::string> sessions_;
    int round_ = 0;
};

} // namespace dci
