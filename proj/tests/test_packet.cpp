#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "dci/packet.hpp"

using namespace dci;
using Catch::Approx;

namespace {

CandidateOption option_with(int seq, const std::string& label,
                            const std::string& description) {
    CandidateOption o;
    o.seq = seq;
    o.option_id = "opt-" + std::to_string(seq);
    o.canonical_label = canonical_key(label);
    o.member_hypotheses.push_back(PoolEntry{"d0", label, description, ""});
    return o;
}

Objection objection(const std::string& author, const std::string& content,
                    bool fatal, const std::string& option_id,
                    bool withdrawn = false) {
    Objection o;
    o.author = author;
    o.round = 1;
    o.content = content;
    o.fatal = fatal;
    o.withdrawn = withdrawn;
    o.move_id = "ct-" + author + "-" + content.substr(0, 4);
    o.option_id = option_id;
    return o;
}

ScoreSheet sheet_backing(const std::string& delegate, const std::string& top,
                         double confidence) {
    ScoreSheet s;
    s.delegate = delegate;
    s.confidence = confidence;
    s.top_choice = top;
    return s;
}

bool packets_equal(const DecisionPacket& a, const DecisionPacket& b) {
    if (a.decision.option_id != b.decision.option_id) return false;
    if (a.decision.label != b.decision.label) return false;
    if (a.decision.content != b.decision.content) return false;
    if (a.rationale != b.rationale) return false;
    if (a.supporting_evidence != b.supporting_evidence) return false;
    if (a.residual_objections.size() != b.residual_objections.size())
        return false;
    for (std::size_t i = 0; i < a.residual_objections.size(); ++i) {
        const Objection& x = a.residual_objections[i];
        const Objection& y = b.residual_objections[i];
        if (x.author != y.author || x.round != y.round ||
            x.content != y.content || x.fatal != y.fatal ||
            x.withdrawn != y.withdrawn || x.move_id != y.move_id ||
            x.option_id != y.option_id)
            return false;
    }
    if (a.minority_report.size() != b.minority_report.size()) return false;
    for (std::size_t i = 0; i < a.minority_report.size(); ++i) {
        const MinorityEntry& x = a.minority_report[i];
        const MinorityEntry& y = b.minority_report[i];
        if (x.delegate != y.delegate || x.position != y.position ||
            x.reasoning != y.reasoning || x.confidence != y.confidence)
            return false;
    }
    if (a.action_plan != b.action_plan) return false;
    if (a.assumptions != b.assumptions) return false;
    if (a.risks != b.risks) return false;
    if (a.reopen_conditions != b.reopen_conditions) return false;
    if (a.confidence != b.confidence) return false;
    if (a.forced_fallback != b.forced_fallback) return false;
    if (a.fallback_method.has_value() != b.fallback_method.has_value())
        return false;
    if (a.fallback_method && *a.fallback_method != *b.fallback_method)
        return false;
    return true;
}

} // namespace

TEST_CASE("unanimous backing with no objections yields a clean packet") {
    std::vector<CandidateOption> finalists = {
        option_with(1, "alpha", "the alpha plan"),
        option_with(2, "beta", "the beta plan"),
    };
    std::vector<ScoreSheet> sheets = {
        sheet_backing("d0", "opt-1", 0.8),
        sheet_backing("d1", "opt-1", 0.6),
    };
    auto p = finalize_decision("opt-1", finalists, sheets, false, std::nullopt);

    CHECK(p.decision.option_id == "opt-1");
    CHECK(p.decision.label == "alpha");
    CHECK(p.decision.content == "the alpha plan");
    CHECK(p.minority_report.empty());
    CHECK(p.residual_objections.empty());
    CHECK_FALSE(p.forced_fallback);
    CHECK_FALSE(p.fallback_method.has_value());
    CHECK(p.confidence == Approx(0.7));
    REQUIRE(p.reopen_conditions.size() == 1);
    CHECK(p.reopen_conditions[0] ==
          "new material evidence on the selected option");
    CHECK(validate_completeness(p).empty());
    CHECK_FALSE(p.rationale.empty());
}

TEST_CASE("a single divergent top choice produces one minority entry") {
    std::vector<CandidateOption> finalists = {
        option_with(1, "alpha", ""),
        option_with(2, "beta", ""),
    };
    std::vector<ScoreSheet> sheets = {
        sheet_backing("d0", "opt-1", 0.8),
        sheet_backing("d1", "opt-1", 0.7),
        sheet_backing("d2", "opt-1", 0.9),
        sheet_backing("d3", "opt-2", 0.65),
    };
    sheets[3].rationale["opt-2"] = "beta is simpler to operate";

    auto report = build_minority_report(finalists, sheets, "opt-1");
    REQUIRE(report.size() == 1);
    CHECK(report[0].delegate == "d3");
    CHECK(report[0].position == "prefers beta");
    CHECK(report[0].reasoning == "beta is simpler to operate");
    CHECK(report[0].confidence == Approx(0.65));

    auto p = finalize_decision("opt-1", finalists, sheets, false, std::nullopt);
    REQUIRE(p.minority_report.size() == 1);
    CHECK(p.minority_report[0].delegate == "d3");
}

TEST_CASE("a standing objection is dissent even from a backer") {
    std::vector<CandidateOption> finalists = {option_with(1, "alpha", "")};
    finalists[0].record.objections.push_back(
        objection("d1", "latency unproven at scale", true, "opt-1"));

    std::vector<ScoreSheet> sheets = {
        sheet_backing("d0", "opt-1", 0.8),
        sheet_backing("d1", "opt-1", 0.6), // backs it AND objects
    };
    auto report = build_minority_report(finalists, sheets, "opt-1");
    REQUIRE(report.size() == 1);
    CHECK(report[0].delegate == "d1");
    CHECK(report[0].position == "objects to the selected option");
    CHECK(report[0].reasoning == "latency unproven at scale");
    CHECK(report[0].confidence == Approx(0.6));

    SECTION("withdrawing the objection clears the dissent") {
        finalists[0].record.objections[0].withdrawn = true;
        CHECK(build_minority_report(finalists, sheets, "opt-1").empty());
    }
    SECTION("an objector without a sheet still appears, with state confidence") {
        finalists[0].record.objections.push_back(
            objection("d7", "no rollback story", false, "opt-1"));
        std::map<std::string, DelegateState> states;
        states["d7"].view = "we need a reversible path";
        states["d7"].confidence = 0.4;
        auto r = build_minority_report(finalists, sheets, "opt-1", states);
        REQUIRE(r.size() == 2);
        CHECK(r[1].delegate == "d7");
        CHECK(r[1].position == "we need a reversible path");
        CHECK(r[1].reasoning == "no rollback story");
        CHECK(r[1].confidence == Approx(0.4));
    }
    SECTION("both triggers on one delegate still give one entry") {
        std::vector<CandidateOption> two = {option_with(1, "alpha", ""),
                                            option_with(2, "beta", "")};
        two[0].record.objections.push_back(
            objection("d1", "latency unproven at scale", true, "opt-1"));
        std::vector<ScoreSheet> s2 = {sheet_backing("d0", "opt-1", 0.8),
                                      sheet_backing("d1", "opt-2", 0.6)};
        auto r = build_minority_report(two, s2, "opt-1");
        REQUIRE(r.size() == 1);
        CHECK(r[0].delegate == "d1");
    }
}

TEST_CASE("residual objections keep everything not withdrawn") {
    std::vector<CandidateOption> finalists = {option_with(1, "alpha", "")};
    finalists[0].record.objections.push_back(
        objection("d1", "fatal flaw", true, "opt-1"));
    finalists[0].record.objections.push_back(
        objection("d2", "mild concern", false, "opt-1"));
    finalists[0].record.objections.push_back(
        objection("d3", "retracted", true, "opt-1", /*withdrawn=*/true));

    auto p = finalize_decision("opt-1", finalists, {}, true,
                               FallbackMethod::outranking);
    REQUIRE(p.residual_objections.size() == 2);
    CHECK(p.residual_objections[0].content == "fatal flaw");
    CHECK(p.residual_objections[1].content == "mild concern");
}

TEST_CASE("assumptions and risks are copied from the winner's record") {
    std::vector<CandidateOption> finalists = {option_with(1, "alpha", "")};
    finalists[0].record.assumptions.push_back(
        Attributed{"d0", 1, "traffic stays under 100K/s"});
    finalists[0].record.assumptions.push_back(
        Attributed{"d1", 2, "team size stays at four"});
    finalists[0].record.risks.push_back(
        Attributed{"d2", 1, "vendor lock-in"});
    finalists[0].record.evidence.push_back(
        Attributed{"d0", 1, "benchmark run 2026-05"});

    auto p = finalize_decision("opt-1", finalists, {}, false, std::nullopt);
    CHECK(p.assumptions == std::vector<std::string>{
                               "traffic stays under 100K/s",
                               "team size stays at four"});
    CHECK(p.risks == std::vector<std::string>{"vendor lock-in"});
    CHECK(p.supporting_evidence ==
          std::vector<std::string>{"benchmark run 2026-05"});
}

TEST_CASE("reopen conditions come from assumptions, fatal objections, and suggestions") {
    OptionRecord record;
    record.assumptions.push_back(Attributed{"d0", 1, "load stays flat"});
    record.assumptions.push_back(Attributed{"d1", 1, "budget is fixed"});

    SECTION("two assumptions, nothing else: two conditions") {
        auto c = derive_reopen_conditions(record);
        REQUIRE(c.size() == 2);
        CHECK(c[0] == "assumption \"load stays flat\" no longer holds");
        CHECK(c[1] == "assumption \"budget is fixed\" no longer holds");
    }
    SECTION("fatal standing objections add conditions, withdrawn ones do not") {
        record.objections.push_back(objection("d2", "data loss risk", true, "opt-1"));
        record.objections.push_back(objection("d3", "minor gripe", false, "opt-1"));
        record.objections.push_back(
            objection("d2", "stale concern", true, "opt-1", /*withdrawn=*/true));
        auto c = derive_reopen_conditions(record);
        REQUIRE(c.size() == 3);
        CHECK(c[2] == "evidence substantiates objection \"data loss risk\"");
    }
    SECTION("delegate suggestions pass through and duplicates collapse") {
        auto c = derive_reopen_conditions(
            record, {"throughput requirement increases 10x",
                     "Assumption \"load stays flat\"  no longer HOLDS",
                     "throughput requirement increases 10x"});
        REQUIRE(c.size() == 3); // 2 assumptions + 1 novel suggestion
        CHECK(c[2] == "throughput requirement increases 10x");
    }
    SECTION("all sources empty: the generic condition") {
        auto c = derive_reopen_conditions(OptionRecord{});
        REQUIRE(c.size() == 1);
        CHECK(c[0] == "new material evidence on the selected option");
    }
}

TEST_CASE("packet confidence follows the backer-mean rule") {
    std::vector<ScoreSheet> sheets = {
        sheet_backing("d0", "opt-1", 0.8),
        sheet_backing("d1", "opt-1", 0.6),
        sheet_backing("d2", "opt-2", 0.4),
    };
    SECTION("mean over backers when the winner has any") {
        CHECK(compute_packet_confidence(sheets, "opt-1", {}) == Approx(0.7));
    }
    SECTION("minimum over all sheets when nobody backs the winner") {
        CHECK(compute_packet_confidence(sheets, "opt-9", {}) == Approx(0.4));
    }
    SECTION("minimum over delegate states when there are no sheets") {
        std::map<std::string, DelegateState> states;
        states["d0"].confidence = 0.9;
        states["d1"].confidence = 0.3;
        CHECK(compute_packet_confidence({}, "opt-1", states) == Approx(0.3));
    }
    SECTION("no information at all reads as zero confidence") {
        CHECK(compute_packet_confidence({}, "opt-1", {}) == 0.0);
    }
}

TEST_CASE("a forced packet names its method and the builder enforces that") {
    std::vector<CandidateOption> finalists = {option_with(1, "alpha", "")};
    auto p = finalize_decision("opt-1", finalists, {}, true,
                               FallbackMethod::minimax_regret);
    CHECK(p.forced_fallback);
    REQUIRE(p.fallback_method.has_value());
    CHECK(*p.fallback_method == FallbackMethod::minimax_regret);
    CHECK(validate_completeness(p).empty());

    CHECK_THROWS_AS(
        finalize_decision("opt-1", finalists, {}, true, std::nullopt),
        DciError);
    CHECK_THROWS_AS(
        finalize_decision("opt-9", finalists, {}, false, std::nullopt),
        DciError);
}

TEST_CASE("completeness validation names each missing field") {
    std::vector<CandidateOption> finalists = {option_with(1, "alpha", "")};
    auto p = finalize_decision("opt-1", finalists, {}, false, std::nullopt);
    CHECK(validate_completeness(p).empty());

    DecisionPacket no_reopen = p;
    no_reopen.reopen_conditions.clear();
    CHECK(validate_completeness(no_reopen) ==
          std::vector<std::string>{"reopen_conditions"});

    DecisionPacket forced_without = p;
    forced_without.forced_fallback = true;
    CHECK(validate_completeness(forced_without) ==
          std::vector<std::string>{"fallback_method"});

    DecisionPacket silent = p;
    silent.rationale.clear();
    CHECK(validate_completeness(silent) ==
          std::vector<std::string>{"rationale"});

    DecisionPacket unsure = p;
    unsure.confidence = 1.5;
    CHECK(validate_completeness(unsure) ==
          std::vector<std::string>{"confidence"});

    DecisionPacket headless = p;
    headless.decision.option_id.clear();
    CHECK(validate_completeness(headless) ==
          std::vector<std::string>{"decision"});
}

TEST_CASE("serialization round-trips field-identically") {
    std::vector<CandidateOption> finalists = {
        option_with(1, "alpha", "the alpha plan"),
        option_with(2, "beta", "the beta plan"),
    };
    finalists[0].record.assumptions.push_back(Attributed{"d0", 1, "flat load"});
    finalists[0].record.risks.push_back(Attributed{"d1", 2, "lock-in"});
    finalists[0].record.evidence.push_back(Attributed{"d0", 1, "bench"});
    finalists[0].record.objections.push_back(
        objection("d2", "unproven", true, "opt-1"));

    std::vector<ScoreSheet> sheets = {
        sheet_backing("d0", "opt-1", 0.8),
        sheet_backing("d1", "opt-2", 0.55),
        sheet_backing("d2", "opt-1", 0.7),
    };
    sheets[1].rationale["opt-2"] = "simpler";

    PacketContext ctx;
    ctx.next_actions = {"prototype alpha", "schedule load test"};
    ctx.reopen_suggestions = {"traffic doubles"};
    ctx.rationale = "clear margin over the runner-up";

    auto p = finalize_decision("opt-1", finalists, sheets, true,
                               FallbackMethod::integrator, ctx);
    Json doc = to_json(p);
    auto q = packet_from_json(doc);
    CHECK(packets_equal(p, q));
    CHECK(to_json(q) == doc);

    // exported key set matches the closing-stage return fields
    std::set<std::string> keys;
    for (auto it = doc.begin(); it != doc.end(); ++it) keys.insert(it.key());
    CHECK(keys == std::set<std::string>{
                      "decision", "rationale", "supporting_evidence",
                      "residual_objections", "minority_report", "action_plan",
                      "assumptions", "risks", "reopen_conditions", "confidence",
                      "forced_fallback", "fallback_method"});

    // the method key is absent on a natural convergence
    auto natural = finalize_decision("opt-1", finalists, sheets, false,
                                     std::nullopt, ctx);
    CHECK_FALSE(to_json(natural).contains("fallback_method"));
    auto r = packet_from_json(to_json(natural));
    CHECK(packets_equal(natural, r));
    CHECK_FALSE(r.fallback_method.has_value());

    // a document missing a field is rejected with the field named
    Json broken = doc;
    broken.erase("reopen_conditions");
    CHECK_THROWS_AS(packet_from_json(broken), DciError);
    try {
        packet_from_json(broken);
    } catch (const DciError& e) {
        CHECK(e.code() == "InvalidPacket");
        CHECK(std::string(e.what()).find("reopen_conditions") !=
              std::string::npos);
    }
}

TEST_CASE("merged winners join their distinct member descriptions") {
    CandidateOption merged = option_with(1, "alpha", "the alpha plan");
    merged.member_hypotheses.push_back(
        PoolEntry{"d1", "alpha", "the alpha plan", ""}); // duplicate text
    merged.member_hypotheses.push_back(
        PoolEntry{"d2", "beta", "the beta refinement", ""});

    auto p = finalize_decision("opt-1", {merged}, {}, false, std::nullopt);
    CHECK(p.decision.content == "the alpha plan; the beta refinement");
}
