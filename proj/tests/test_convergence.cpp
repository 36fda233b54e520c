#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dci/convergence.hpp"

using namespace dci;
using Catch::Approx;

// ===========================================================================
// Independent oracles. These re-derive the expected behavior from scratch
// on plain arrays so the engine implementation has something honest to be
// checked against.
// ===========================================================================

namespace oracle {

// naive total: for raw arrays indexed [delegate][option][criterion]
double naive_total(const std::vector<std::vector<std::vector<double>>>& s,
                   const std::vector<double>& c, const std::vector<double>& e,
                   const std::vector<std::vector<double>>& phi,
                   const std::vector<double>& w, std::size_t option) {
    double total = 0.0;
    for (std::size_t crit = 0; crit < w.size(); ++crit) {
        double inner = 0.0;
        for (std::size_t d = 0; d < s.size(); ++d)
            inner += s[d][option][crit] * c[d] * e[d] * phi[d][crit];
        total += w[crit] * inner;
    }
    return total;
}

// independent label normalization for the clustering check
std::string norm(const std::string& label) {
    std::string squeezed;
    for (char ch : label) {
        char low = (ch >= 'A' && ch <= 'Z') ? char(ch - 'A' + 'a') : ch;
        bool space = (low == ' ' || low == '\t' || low == '\n' || low == '\r');
        if (space) {
            if (!squeezed.empty() && squeezed.back() != ' ')
                squeezed.push_back(' ');
        } else {
            squeezed.push_back(low);
        }
    }
    while (!squeezed.empty() && squeezed.back() == ' ') squeezed.pop_back();
    return squeezed;
}

std::size_t distinct_groups(const std::vector<std::string>& labels) {
    std::set<std::string> keys;
    for (const auto& l : labels) keys.insert(norm(l));
    return keys.size();
}

// pairwise win per the outranking rule, from raw arrays
bool pair_win(const std::vector<std::vector<std::vector<double>>>& s,
              const std::vector<double>& c, const std::vector<double>& e,
              const std::vector<std::vector<double>>& phi,
              const std::vector<double>& w, std::size_t a, std::size_t b) {
    double sum = 0.0;
    for (std::size_t crit = 0; crit < w.size(); ++crit) {
        double agg_a = 0.0, agg_b = 0.0;
        for (std::size_t d = 0; d < s.size(); ++d) {
            agg_a += s[d][a][crit] * c[d] * e[d] * phi[d][crit];
            agg_b += s[d][b][crit] * c[d] * e[d] * phi[d][crit];
        }
        double diff = agg_a - agg_b;
        sum += w[crit] * ((diff > 0) ? 1.0 : (diff < 0) ? -1.0 : 0.0);
    }
    return sum > 0.0;
}

// strict dominance per the stated rule, recomputed from record counts
bool dominates(int sup_a, int fatal_a, int ev_a, int sup_b, int fatal_b,
               int ev_b, bool b_was_top) {
    if (b_was_top) return false;
    if (sup_a < sup_b || fatal_a > fatal_b || ev_a < ev_b) return false;
    return sup_a > sup_b || fatal_a < fatal_b || ev_a > ev_b;
}

} // namespace oracle

// ===========================================================================
// helpers
// ===========================================================================

namespace {

CandidateOption make_option(int seq, const std::string& label) {
    CandidateOption o;
    o.seq = seq;
    o.option_id = "opt-" + std::to_string(seq);
    o.canonical_label = canonical_key(label);
    o.member_hypotheses.push_back(PoolEntry{"d0", label, label, ""});
    return o;
}

void add_support(CandidateOption& o, int count, const std::string& who = "d0") {
    for (int i = 0; i < count; ++i)
        o.record.pros.push_back(Attributed{who, 1, "pro"});
}

void add_evidence(CandidateOption& o, int count, const std::string& who = "d0") {
    for (int i = 0; i < count; ++i)
        o.record.evidence.push_back(Attributed{who, 1, "ev"});
}

void add_fatal(CandidateOption& o, int count, const std::string& who = "d1") {
    for (int i = 0; i < count; ++i) {
        Objection obj;
        obj.author = who;
        obj.round = 1;
        obj.content = "fatal flaw";
        obj.fatal = true;
        obj.move_id = "ob-" + o.option_id + "-" + std::to_string(i);
        obj.option_id = o.option_id;
        o.record.objections.push_back(obj);
    }
}

// Builds a complete ScoreTable from raw arrays, mirroring the oracle's
// indexing: s[delegate][option][criterion].
ScoreTable table_from_arrays(const std::vector<std::vector<std::vector<double>>>& s,
                             const std::vector<double>& c,
                             const std::vector<double>& e,
                             const std::vector<std::vector<double>>& phi,
                             const std::vector<double>& w) {
    ScoreTable t;
    for (std::size_t crit = 0; crit < w.size(); ++crit)
        t.criteria.push_back(Criterion{"c" + std::to_string(crit + 1), w[crit]});
    for (std::size_t d = 0; d < s.size(); ++d) {
        std::string delegate = "d" + std::to_string(d);
        for (std::size_t o = 0; o < s[d].size(); ++o) {
            std::string option = "opt-" + std::to_string(o + 1);
            for (std::size_t crit = 0; crit < w.size(); ++crit)
                t.cells[delegate][option]["c" + std::to_string(crit + 1)] =
                    ScoreCell{s[d][o][crit], c[d], e[d], phi[d][crit]};
        }
    }
    return t;
}

std::vector<CandidateOption> plain_options(std::size_t count) {
    std::vector<CandidateOption> v;
    for (std::size_t i = 0; i < count; ++i)
        v.push_back(make_option(int(i + 1), "label " + std::to_string(i + 1)));
    return v;
}

} // namespace

// ===========================================================================
// Stage 2: clustering
// ===========================================================================

TEST_CASE("clustering groups equal keys and keeps appearance order") {
    std::vector<PoolEntry> pool = {
        {"d0", "kafka-idempotent", "use kafka with idempotent consumers", ""},
        {"d1", "Kafka-Idempotent", "same idea, different case", ""},
        {"d2", "immutable-ledger", "event-sourced ledger db", ""},
        {"d3", "reframe-guarantees", "question the delivery guarantee", ""},
    };
    auto options = canonicalize_and_cluster(pool, 5);
    REQUIRE(options.size() == oracle::distinct_groups(
                                  {"kafka-idempotent", "Kafka-Idempotent",
                                   "immutable-ledger", "reframe-guarantees"}));
    REQUIRE(options.size() == 3);
    CHECK(options[0].option_id == "opt-1");
    CHECK(options[0].canonical_label == "kafka-idempotent");
    CHECK(options[0].member_hypotheses.size() == 2);
    CHECK(options[1].canonical_label == "immutable-ledger");
    CHECK(options[2].canonical_label == "reframe-guarantees");
}

TEST_CASE("clustering caps at max options, largest clusters first") {
    std::vector<PoolEntry> pool;
    for (int i = 0; i < 7; ++i)
        pool.push_back({"d" + std::to_string(i), "idea-" + std::to_string(i),
                        "desc", ""});
    std::vector<DroppedCluster> dropped;
    auto options = canonicalize_and_cluster(pool, 5, &dropped);
    CHECK(options.size() == 5);
    REQUIRE(dropped.size() == 2);
    // all singletons: earliest authorship wins, so the last two fall off
    CHECK(dropped[0].canonical_label == "idea-5");
    CHECK(dropped[1].canonical_label == "idea-6");

    // with unequal sizes the big cluster survives regardless of position
    std::vector<PoolEntry> pool2 = {
        {"d0", "alpha", "", ""}, {"d1", "alpha", "", ""},
        {"d2", "beta", "", ""},  {"d0", "gamma", "", ""},
        {"d1", "gamma", "", ""}, {"d2", "gamma", "", ""},
        {"d3", "delta", "", ""},
    };
    std::vector<DroppedCluster> dropped2;
    auto options2 = canonicalize_and_cluster(pool2, 2, &dropped2);
    REQUIRE(options2.size() == 2);
    CHECK(options2[0].canonical_label == "alpha"); // appearance order kept
    CHECK(options2[0].option_id == "opt-1");
    CHECK(options2[1].canonical_label == "gamma");
    CHECK(options2[1].option_id == "opt-2");
    CHECK(dropped2.size() == 2);
}

TEST_CASE("clustering of a single entry and an empty pool") {
    auto one = canonicalize_and_cluster({{"d0", "only idea", "", ""}}, 5);
    REQUIRE(one.size() == 1);
    CHECK(one[0].option_id == "opt-1");

    CHECK_THROWS_AS(canonicalize_and_cluster({}, 5), DciError);
    try {
        canonicalize_and_cluster({}, 5);
    } catch (const DciError& e) {
        CHECK(e.code() == "EmptyPool");
    }
}

// ===========================================================================
// Stage 3: records and admission
// ===========================================================================

TEST_CASE("contribution kinds land in their record lists") {
    CandidateOption o = make_option(1, "alpha");
    auto contribute = [&](ContributionKind kind, const std::string& content,
                          bool fatal = false) {
        ChallengeContribution c;
        c.author = "d1";
        c.option_id = o.option_id;
        c.kind = kind;
        c.content = content;
        c.fatal = fatal;
        c.move_id = "ct-" + content;
        record_contribution(o, c, 2);
    };

    contribute(ContributionKind::support, "works today");
    contribute(ContributionKind::challenge, "fails under load", true);
    contribute(ContributionKind::evidence, "load test results");
    contribute(ContributionKind::counterexample, "region outage case");
    contribute(ContributionKind::uncertainty_note, "traffic shape unknown");
    contribute(ContributionKind::revision_suggestion, "try variant");

    CHECK(o.record.pros.size() == 1);
    CHECK(o.record.cons.size() == 1);
    CHECK(o.record.evidence.size() == 1);
    CHECK(o.record.risks.size() == 1);
    CHECK(o.record.assumptions.size() == 1);
    REQUIRE(o.record.objections.size() == 1);
    CHECK(o.record.objections[0].fatal);
    CHECK(o.record.objections[0].author == "d1");
    CHECK(o.record.objections[0].round == 2);
    CHECK_FALSE(o.record.objections[0].withdrawn);
    CHECK(o.record.pros[0].author == "d1");
}

TEST_CASE("objections can be withdrawn by their contribution id") {
    std::vector<CandidateOption> options = {make_option(1, "alpha")};
    ChallengeContribution c;
    c.author = "d1";
    c.option_id = "opt-1";
    c.kind = ContributionKind::challenge;
    c.content = "fatal flaw";
    c.fatal = true;
    c.move_id = "ct-9";
    record_contribution(options[0], c, 1);

    CHECK(count_fatal_open_objections(options[0].record) == 1);
    CHECK_FALSE(withdraw_objection(options, "ct-404"));
    CHECK(withdraw_objection(options, "ct-9"));
    CHECK(count_fatal_open_objections(options[0].record) == 0);
    CHECK(options[0].record.objections.size() == 1); // preserved, flagged
}

TEST_CASE("hypothesis admission enforces all four gates and capacity") {
    std::vector<CandidateOption> existing = {make_option(1, "alpha"),
                                             make_option(2, "beta")};
    auto suggestion = [&](const std::string& label, const std::string& link,
                          const std::string& superior_to) {
        ChallengeContribution c;
        c.author = "d2";
        c.option_id = "opt-1";
        c.kind = ContributionKind::revision_suggestion;
        c.content = "richer variant";
        c.proposed_new_hypothesis = NewHypothesis{label, "desc", link, superior_to};
        return c;
    };

    SECTION("admitted when every gate passes") {
        auto out = admit_new_hypotheses(
            existing, {suggestion("gamma", "bench:raw", "opt-1")}, 1, 2, 5);
        REQUIRE(out.admitted_ids == std::vector<std::string>{"opt-3"});
        REQUIRE(out.options.size() == 3);
        CHECK(out.options[2].canonical_label == "gamma");
        CHECK(out.options[2].seq == 3);
        CHECK(out.refusals.empty());
    }
    SECTION("cutoff: round must be before max_rounds") {
        auto out = admit_new_hypotheses(
            existing, {suggestion("gamma", "bench:raw", "opt-1")}, 2, 2, 5);
        CHECK(out.admitted_ids.empty());
        REQUIRE(out.refusals.size() == 1);
        CHECK(out.refusals[0].reason.find("cutoff") != std::string::npos);
    }
    SECTION("must be materially distinct") {
        auto out = admit_new_hypotheses(
            existing, {suggestion("  ALPHA ", "bench:raw", "opt-1")}, 1, 2, 5);
        CHECK(out.admitted_ids.empty());
        REQUIRE(out.refusals.size() == 1);
        CHECK(out.refusals[0].reason.find("distinct") != std::string::npos);
    }
    SECTION("must carry evidence") {
        auto out = admit_new_hypotheses(
            existing, {suggestion("gamma", "", "opt-1")}, 1, 2, 5);
        CHECK(out.admitted_ids.empty());
        REQUIRE(out.refusals.size() == 1);
        CHECK(out.refusals[0].reason.find("evidence") != std::string::npos);
    }
    SECTION("must name a real option it claims to beat") {
        auto out = admit_new_hypotheses(
            existing, {suggestion("gamma", "bench:raw", "opt-77")}, 1, 2, 5);
        CHECK(out.admitted_ids.empty());
        REQUIRE(out.refusals.size() == 1);
        CHECK(out.refusals[0].reason.find("opt-77") != std::string::npos);
    }
    SECTION("full option set refuses with a log entry") {
        auto out = admit_new_hypotheses(
            existing, {suggestion("gamma", "bench:raw", "opt-1")}, 1, 2, 2);
        CHECK(out.admitted_ids.empty());
        REQUIRE(out.refusals.size() == 1);
        CHECK(out.refusals[0].reason.find("full") != std::string::npos);
    }
    SECTION("second duplicate within one batch is refused") {
        auto out = admit_new_hypotheses(
            existing,
            {suggestion("gamma", "bench:raw", "opt-1"),
             suggestion("Gamma", "bench:other", "opt-2")},
            1, 2, 5);
        CHECK(out.admitted_ids.size() == 1);
        CHECK(out.refusals.size() == 1);
    }
}

TEST_CASE("no admission at or past the cutoff over random streams") {
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 200; ++trial) {
        int r_max = 1 + int(rng() % 4);
        int k_max = 2 + int(rng() % 4);
        std::vector<CandidateOption> options = plain_options(1 + rng() % 2);
        std::size_t before_cap = options.size();
        for (int round = 1; round <= r_max; ++round) {
            std::vector<ChallengeContribution> batch;
            int n = int(rng() % 3);
            for (int i = 0; i < n; ++i) {
                ChallengeContribution c;
                c.author = "d" + std::to_string(rng() % 4);
                c.option_id = "opt-1";
                c.kind = ContributionKind::revision_suggestion;
                c.content = "variant";
                c.proposed_new_hypothesis = NewHypothesis{
                    "hyp-" + std::to_string(trial) + "-" +
                        std::to_string(round) + "-" + std::to_string(i),
                    "d", (rng() % 2) ? "link" : "", "opt-1"};
                batch.push_back(c);
            }
            auto out = admit_new_hypotheses(options, batch, round, r_max, k_max);
            if (round >= r_max) {
                CHECK(out.options.size() == options.size());
                CHECK(out.admitted_ids.empty());
            }
            CHECK(out.options.size() <= std::max<std::size_t>(k_max, before_cap));
            CHECK(out.options.size() >= options.size());
            options = out.options;
        }
    }
}

// ===========================================================================
// Stage 4: dominance and compression
// ===========================================================================

TEST_CASE("an option worse on every axis is removed") {
    CandidateOption strong = make_option(1, "alpha");
    add_support(strong, 3);
    add_evidence(strong, 2);
    CandidateOption weak = make_option(2, "beta");
    add_support(weak, 1);
    add_evidence(weak, 0);
    add_fatal(weak, 2);

    REQUIRE(oracle::dominates(3, 0, 2, 1, 2, 0, false));
    CHECK(strictly_dominates(strong, weak, {}));
    CHECK_FALSE(strictly_dominates(weak, strong, {}));

    CompressionLog log;
    auto kept = revise_and_compress({strong, weak}, {}, {}, 5, &log);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].option_id == "opt-1");
    REQUIRE(log.removed.size() == 1);
    CHECK(log.removed[0].option_id == "opt-2");
    CHECK(log.removed[0].dominated_by == "opt-1");
}

TEST_CASE("equal records do not dominate and nothing is removed") {
    CandidateOption a = make_option(1, "alpha");
    CandidateOption b = make_option(2, "beta");
    add_support(a, 2);
    add_support(b, 2);
    CHECK_FALSE(strictly_dominates(a, b, {}));
    CHECK_FALSE(strictly_dominates(b, a, {}));
    auto kept = revise_and_compress({a, b}, {}, {}, 5);
    CHECK(kept.size() == 2);
}

TEST_CASE("a delegate's top choice cannot be dominated away") {
    CandidateOption strong = make_option(1, "alpha");
    add_support(strong, 5);
    add_evidence(strong, 3);
    CandidateOption protege = make_option(2, "beta");

    ScoreSheet sheet;
    sheet.delegate = "d3";
    sheet.top_choice = "opt-2";

    CHECK(strictly_dominates(strong, protege, {}));
    CHECK_FALSE(strictly_dominates(strong, protege, {sheet}));
    auto kept = revise_and_compress({strong, protege}, {sheet}, {}, 5);
    CHECK(kept.size() == 2);
}

TEST_CASE("dominance matches the brute-force oracle on random records") {
    std::mt19937 rng(991);
    for (int trial = 0; trial < 500; ++trial) {
        int sup_a = int(rng() % 4), sup_b = int(rng() % 4);
        int fat_a = int(rng() % 3), fat_b = int(rng() % 3);
        int ev_a = int(rng() % 4), ev_b = int(rng() % 4);
        bool b_top = (rng() % 4) == 0;

        CandidateOption a = make_option(1, "alpha");
        CandidateOption b = make_option(2, "beta");
        add_support(a, sup_a);
        add_support(b, sup_b);
        add_fatal(a, fat_a);
        add_fatal(b, fat_b);
        add_evidence(a, ev_a);
        add_evidence(b, ev_b);
        std::vector<ScoreSheet> sheets;
        if (b_top) {
            ScoreSheet s;
            s.delegate = "d0";
            s.top_choice = "opt-2";
            sheets.push_back(s);
        }
        CHECK(strictly_dominates(a, b, sheets) ==
              oracle::dominates(sup_a, fat_a, ev_a, sup_b, fat_b, ev_b, b_top));
    }
}

TEST_CASE("bridge-declared compatibility merges into the older option") {
    CandidateOption a = make_option(1, "alpha");
    add_support(a, 1);
    CandidateOption b = make_option(2, "beta");
    add_support(b, 2);
    add_fatal(b, 1);
    CandidateOption c = make_option(3, "gamma");
    add_support(c, 1); // keeps gamma out of dominance range

    CompressionLog log;
    auto kept = revise_and_compress(
        {a, b, c}, {}, {MergeDirective{"alpha", "BETA", "mv-77"}}, 5, &log);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].option_id == "opt-1");
    CHECK(support_count(kept[0]) == 3); // absorbed beta's supports
    CHECK(count_fatal_open_objections(kept[0].record) == 1);
    CHECK(kept[0].member_hypotheses.size() == 2);
    REQUIRE(log.merged.size() == 1);
    CHECK(log.merged[0].kept == "opt-1");
    CHECK(log.merged[0].absorbed == "opt-2");
    CHECK(log.merged[0].move_id == "mv-77");
}

TEST_CASE("truncation keeps the best-supported options, ties by id") {
    std::vector<CandidateOption> options = plain_options(4);
    add_support(options[0], 1);
    add_support(options[1], 3);
    add_support(options[2], 1);
    add_support(options[3], 2);

    CompressionLog log;
    auto finalists = select_finalists(options, 2, &log);
    REQUIRE(finalists.size() == 2);
    // supports are (1,3,1,2): top two are opt-2 (3) and opt-4 (2),
    // reported in their original order
    CHECK(finalists[0].option_id == "opt-2");
    CHECK(finalists[1].option_id == "opt-4");
    REQUIRE(log.truncated.size() == 2);
    CHECK(log.truncated[0].option_id == "opt-1");
    CHECK(log.truncated[1].option_id == "opt-3");

    // tie at the cut line goes to the lower option id
    std::vector<CandidateOption> tied = plain_options(3);
    add_support(tied[0], 1);
    add_support(tied[1], 1);
    add_support(tied[2], 1);
    auto pick2 = select_finalists(tied, 2);
    REQUIRE(pick2.size() == 2);
    CHECK(pick2[0].option_id == "opt-1");
    CHECK(pick2[1].option_id == "opt-2");

    // finalist selection never removes by dominance: a weaker option in a
    // roomy field survives selection untouched
    std::vector<CandidateOption> roomy = plain_options(2);
    add_support(roomy[0], 4);
    auto both = select_finalists(roomy, 3);
    CHECK(both.size() == 2);
}

TEST_CASE("under-capacity sets survive whole and one option always remains") {
    auto two = plain_options(2);
    CHECK(select_finalists(two, 3).size() == 2);

    auto one = plain_options(1);
    CHECK(revise_and_compress(one, {}, {}, 1).size() == 1);
}

// ===========================================================================
// Stage 5: scoring
// ===========================================================================

TEST_CASE("single-cell total matches the hand-computed product") {
    // one criterion w=1, one delegate, s=7, c=0.8, e=0.5, phi=1
    auto t = table_from_arrays({{{7.0}}}, {0.8}, {0.5}, {{1.0}}, {1.0});
    TotalScore ts = total_score("opt-1", t);
    CHECK(ts.total == Approx(2.8).margin(1e-12));
    CHECK(ts.normalized == Approx(0.28).margin(1e-12));
}

TEST_CASE("two-delegate two-criterion table matches the worked example") {
    // w={0.6,0.4}; both delegates score option1 (8,6), option2 (7,9);
    // all c=e=phi=1. Total(opt-1)=0.6*(8+8)+0.4*(6+6)=14.4
    std::vector<std::vector<std::vector<double>>> s = {
        {{8, 6}, {7, 9}},
        {{8, 6}, {7, 9}},
    };
    auto t = table_from_arrays(s, {1, 1}, {1, 1}, {{1, 1}, {1, 1}}, {0.6, 0.4});
    TotalScore ts1 = total_score("opt-1", t);
    CHECK(ts1.total == Approx(14.4).margin(1e-12));
    CHECK(ts1.normalized == Approx(0.72).margin(1e-12));
    CHECK(ts1.total ==
          Approx(oracle::naive_total(s, {1, 1}, {1, 1}, {{1, 1}, {1, 1}},
                                     {0.6, 0.4}, 0)).margin(1e-12));

    TotalScore ts2 = total_score("opt-2", t);
    CHECK(ts2.total == Approx(0.6 * 14 + 0.4 * 18).margin(1e-12));
}

TEST_CASE("perfect scores with unit factors normalize to exactly one") {
    std::vector<std::vector<std::vector<double>>> s = {
        {{10, 10}}, {{10, 10}}, {{10, 10}},
    };
    auto t = table_from_arrays(s, {1, 1, 1}, {1, 1, 1},
                               {{1, 1}, {1, 1}, {1, 1}}, {0.5, 0.5});
    CHECK(total_score("opt-1", t).normalized == Approx(1.0).margin(1e-12));
}

TEST_CASE("a thousand random tables agree with the naive oracle") {
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> uscore(0.0, 10.0);
    std::uniform_real_distribution<double> ufactor(0.0, 1.0);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + rng() % 4;  // delegates
        std::size_t f = 1 + rng() % 3;  // finalists
        std::size_t p = 1 + rng() % 4;  // criteria

        std::vector<std::vector<std::vector<double>>> s(
            n, std::vector<std::vector<double>>(f, std::vector<double>(p)));
        std::vector<double> c(n), e(n);
        std::vector<std::vector<double>> phi(n, std::vector<double>(p));
        std::vector<double> w(p);
        double wsum = 0.0;
        for (auto& x : w) { x = ufactor(rng) + 1e-3; wsum += x; }
        for (auto& x : w) x /= wsum;
        for (std::size_t d = 0; d < n; ++d) {
            c[d] = ufactor(rng);
            e[d] = ufactor(rng);
            for (std::size_t o = 0; o < f; ++o)
                for (std::size_t k = 0; k < p; ++k) s[d][o][k] = uscore(rng);
            for (std::size_t k = 0; k < p; ++k) phi[d][k] = ufactor(rng);
        }

        ScoreTable t = table_from_arrays(s, c, e, phi, w);
        for (std::size_t o = 0; o < f; ++o) {
            double expected = oracle::naive_total(s, c, e, phi, w, o);
            double actual =
                total_score("opt-" + std::to_string(o + 1), t).total;
            double rel = std::abs(actual - expected) /
                         std::max(1.0, std::abs(expected));
            worst_rel = std::max(worst_rel, rel);
        }
    }
    CHECK(worst_rel <= 1e-9);
}

TEST_CASE("incomplete tables are a hard error") {
    auto t = table_from_arrays({{{7.0}}}, {0.8}, {0.5}, {{1.0}}, {1.0});
    CHECK_THROWS_AS(total_score("opt-9", t), DciError);
    t.criteria.push_back(Criterion{"c2", 0.5});
    CHECK_THROWS_AS(total_score("opt-1", t), DciError);
    try {
        total_score("opt-1", t);
    } catch (const DciError& e) {
        CHECK(e.code() == "IncompleteTable");
    }
}

TEST_CASE("ranking sorts by normalized total with ties by option order") {
    std::vector<std::vector<std::vector<double>>> s = {
        {{8, 8}, {6, 6}, {8, 8}},
    };
    auto t = table_from_arrays(s, {1}, {1}, {{1, 1}}, {0.5, 0.5});
    auto finalists = plain_options(3);
    auto ranking = aggregate_scores(finalists, t);
    REQUIRE(ranking.size() == 3);
    CHECK(ranking[0].option_id == "opt-1"); // ties with opt-3, lower seq first
    CHECK(ranking[1].option_id == "opt-3");
    CHECK(ranking[2].option_id == "opt-2");
    CHECK(ranking[0].normalized == Approx(0.8));
}

TEST_CASE("top choice is the sheet's own weighted argmax") {
    ScoreSheet sheet;
    sheet.delegate = "d0";
    sheet.confidence = 0.9;
    sheet.evidence_strength = 0.8;
    sheet.scores["opt-1"] = {{"c1", 8.0}, {"c2", 2.0}};
    sheet.scores["opt-2"] = {{"c1", 6.0}, {"c2", 6.0}};
    auto finalists = plain_options(2);
    std::vector<Criterion> criteria = {{"c1", 0.5}, {"c2", 0.5}};

    // equal weights: opt-2 wins 6 vs 5
    CHECK(compute_top_choice(sheet, finalists, criteria) == "opt-2");
    // c1-heavy weights flip it
    CHECK(compute_top_choice(sheet, finalists, {{"c1", 0.9}, {"c2", 0.1}}) ==
          "opt-1");
    // exact tie goes to the lower option id
    ScoreSheet tied;
    tied.delegate = "d1";
    tied.scores["opt-1"] = {{"c1", 5.0}};
    tied.scores["opt-2"] = {{"c1", 5.0}};
    CHECK(compute_top_choice(tied, finalists, {{"c1", 1.0}}) == "opt-1");
    // domain fit can break the balance
    CHECK(compute_top_choice(sheet, finalists, criteria, {{"c2", 0.1}}) ==
          "opt-1");
}

// ===========================================================================
// Stage 6: the three convergence tests in priority order
// ===========================================================================

namespace {

std::vector<RankedOption> ranking_pair(double top, double second) {
    return {RankedOption{"opt-1", 1, top * 10, top},
            RankedOption{"opt-2", 2, second * 10, second}};
}

std::vector<ScoreSheet> sheets_with_tops(const std::vector<std::string>& tops) {
    std::vector<ScoreSheet> sheets;
    for (std::size_t i = 0; i < tops.size(); ++i) {
        ScoreSheet s;
        s.delegate = "d" + std::to_string(i);
        s.top_choice = tops[i];
        sheets.push_back(s);
    }
    return sheets;
}

} // namespace

TEST_CASE("margin win is score dominance") {
    auto v = test_convergence(ranking_pair(0.80, 0.60), plain_options(2), 0.15,
                              0.5, sheets_with_tops({"opt-2", "opt-2"}), 4);
    CHECK(v.kind == VerdictKind::score_dominance);
    CHECK(v.winner == "opt-1");
}

TEST_CASE("margin test is strict") {
    // 0.75 - 0.625 is exactly 0.125 in binary, so the comparison is exact
    auto v = test_convergence(ranking_pair(0.75, 0.625), plain_options(2),
                              0.125, 0.9, {}, 4);
    CHECK(v.kind != VerdictKind::score_dominance); // gap == margin: not enough
}

TEST_CASE("majority backing fires when the margin fails") {
    auto v = test_convergence(
        ranking_pair(0.70, 0.65), plain_options(2), 0.15, 0.5,
        sheets_with_tops({"opt-1", "opt-1", "opt-1", "opt-2"}), 4);
    CHECK(v.kind == VerdictKind::majority_backing);
    CHECK(v.winner == "opt-1");
}

TEST_CASE("majority threshold is strict and counts the whole council") {
    // 2 of 4 is not a strict majority
    auto v = test_convergence(ranking_pair(0.70, 0.65), plain_options(2), 0.15,
                              0.5, sheets_with_tops({"opt-1", "opt-1", "opt-2",
                                                     "opt-2"}), 4);
    CHECK(v.kind != VerdictKind::majority_backing);

    // 3 sheets all backing the leader, but a council of 6: 0.5 share, not > 0.5
    auto v2 = test_convergence(ranking_pair(0.70, 0.65), plain_options(2), 0.15,
                               0.5, sheets_with_tops({"opt-1", "opt-1", "opt-1"}),
                               6);
    CHECK(v2.kind != VerdictKind::majority_backing);
}

TEST_CASE("clean records allow closure without a majority") {
    auto finalists = plain_options(2);
    auto v = test_convergence(ranking_pair(0.70, 0.65), finalists, 0.15, 0.5,
                              sheets_with_tops({"opt-1", "opt-1", "opt-2",
                                                "opt-2"}), 4);
    CHECK(v.kind == VerdictKind::no_blocking_objection);
    CHECK(v.winner == "opt-1");

    // a withdrawn fatal objection no longer blocks
    add_fatal(finalists[1], 1);
    auto blocked = test_convergence(ranking_pair(0.70, 0.65), finalists, 0.15,
                                    0.5, sheets_with_tops({"opt-1", "opt-1",
                                                           "opt-2", "opt-2"}),
                                    4);
    CHECK(blocked.kind == VerdictKind::none);
    CHECK_FALSE(blocked.winner.has_value());

    finalists[1].record.objections[0].withdrawn = true;
    auto unblocked = test_convergence(ranking_pair(0.70, 0.65), finalists, 0.15,
                                      0.5, sheets_with_tops({"opt-1", "opt-1",
                                                             "opt-2", "opt-2"}),
                                      4);
    CHECK(unblocked.kind == VerdictKind::no_blocking_objection);
}

TEST_CASE("split picks with a standing fatal objection yield none") {
    auto finalists = plain_options(2);
    add_fatal(finalists[0], 1);
    auto v = test_convergence(ranking_pair(0.70, 0.65), finalists, 0.15, 0.5,
                              sheets_with_tops({"opt-1", "opt-1", "opt-2",
                                                "opt-2"}), 4);
    CHECK(v.kind == VerdictKind::none);
}

TEST_CASE("a non-fatal objection never blocks") {
    auto finalists = plain_options(2);
    Objection soft;
    soft.author = "d1";
    soft.content = "mild concern";
    soft.fatal = false;
    soft.option_id = "opt-1";
    finalists[0].record.objections.push_back(soft);
    auto v = test_convergence(ranking_pair(0.70, 0.65), finalists, 0.15, 0.5,
                              {}, 4);
    CHECK(v.kind == VerdictKind::no_blocking_objection);
}

TEST_CASE("a single finalist converges trivially by dominance") {
    auto v = test_convergence({RankedOption{"opt-1", 1, 5.0, 0.5}},
                              plain_options(1), 0.15, 0.5, {}, 4);
    CHECK(v.kind == VerdictKind::score_dominance);
    CHECK(v.winner == "opt-1");
}

TEST_CASE("when several conditions hold the highest-priority verdict wins") {
    // dominance + majority + clean records all hold: dominance reported
    auto finalists = plain_options(2);
    auto all3 = test_convergence(ranking_pair(0.90, 0.50), finalists, 0.15, 0.5,
                                 sheets_with_tops({"opt-1", "opt-1", "opt-1",
                                                   "opt-1"}), 4);
    CHECK(all3.kind == VerdictKind::score_dominance);

    // majority + clean records: majority reported
    auto maj = test_convergence(ranking_pair(0.70, 0.65), finalists, 0.15, 0.5,
                                sheets_with_tops({"opt-1", "opt-1", "opt-1",
                                                  "opt-2"}), 4);
    CHECK(maj.kind == VerdictKind::majority_backing);

    // dominance + clean records, no majority: dominance reported
    auto dom = test_convergence(ranking_pair(0.90, 0.50), finalists, 0.15, 0.5,
                                sheets_with_tops({"opt-1", "opt-2", "opt-2",
                                                  "opt-2"}), 4);
    CHECK(dom.kind == VerdictKind::score_dominance);
}

// ===========================================================================
// Stage 7: the fallback cascade
// ===========================================================================

TEST_CASE("a pairwise-dominant option wins at the outranking level") {
    // A scores high on the heavy criterion against both rivals
    std::vector<std::vector<std::vector<double>>> s = {
        {{9, 5}, {4, 6}, {3, 7}},
        {{8, 6}, {5, 5}, {4, 4}},
    };
    std::vector<double> w = {0.7, 0.3};
    auto t = table_from_arrays(s, {1, 1}, {1, 1}, {{1, 1}, {1, 1}}, w);
    auto finalists = plain_options(3);

    REQUIRE(oracle::pair_win(s, {1, 1}, {1, 1}, {{1, 1}, {1, 1}}, w, 0, 1));
    REQUIRE(oracle::pair_win(s, {1, 1}, {1, 1}, {{1, 1}, {1, 1}}, w, 0, 2));

    auto r = fallback_select(finalists, t);
    CHECK(r.winner == "opt-1");
    CHECK(r.method == FallbackMethod::outranking);
    CHECK(r.levels_tried == std::vector<std::string>{"outranking"});
}

TEST_CASE("outranking Copeland count matches the pairwise oracle") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> uscore(0.0, 10.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 1 + rng() % 3, f = 2 + rng() % 2, p = 1 + rng() % 3;
        std::vector<std::vector<std::vector<double>>> s(
            n, std::vector<std::vector<double>>(f, std::vector<double>(p)));
        std::vector<double> c(n, 1.0), e(n, 1.0), w(p);
        std::vector<std::vector<double>> phi(n, std::vector<double>(p, 1.0));
        double wsum = 0;
        for (auto& x : w) { x = 0.1 + (rng() % 10) / 10.0; wsum += x; }
        for (auto& x : w) x /= wsum;
        for (auto& dd : s)
            for (auto& oo : dd)
                for (auto& x : oo) x = uscore(rng);

        auto t = table_from_arrays(s, c, e, phi, w);
        auto finalists = plain_options(f);
        std::vector<int> wins(f, 0);
        for (std::size_t i = 0; i < f; ++i)
            for (std::size_t j = 0; j < f; ++j)
                if (i != j && oracle::pair_win(s, c, e, phi, w, i, j)) ++wins[i];

        int best = *std::max_element(wins.begin(), wins.end());
        bool unique = std::count(wins.begin(), wins.end(), best) == 1;
        auto engine = outranking_winner(finalists, t);
        if (unique) {
            REQUIRE(engine.has_value());
            std::size_t idx = 0;
            while (wins[idx] != best) ++idx;
            CHECK(*engine == "opt-" + std::to_string(idx + 1));
        } else {
            CHECK_FALSE(engine.has_value());
        }
    }
}

TEST_CASE("a fully symmetric pair falls through to the Integrator") {
    // two options mirrored across two equally weighted criteria
    std::vector<std::vector<std::vector<double>>> s = {{{8, 2}, {2, 8}}};
    auto t = table_from_arrays(s, {1}, {1}, {{1, 1}}, {0.5, 0.5});
    auto finalists = plain_options(2);

    CHECK_FALSE(outranking_winner(finalists, t).has_value());
    CHECK_FALSE(minimax_regret_winner(finalists, t).has_value());
    CHECK_FALSE(robust_satisficing_winner(finalists, t).has_value());

    auto r = fallback_select(finalists, t, [](const std::vector<std::string>& top2) {
        REQUIRE(top2 == std::vector<std::string>{"opt-1", "opt-2"});
        return std::optional<std::string>("opt-2");
    });
    CHECK(r.winner == "opt-2");
    CHECK(r.method == FallbackMethod::integrator);
    CHECK(r.levels_tried.size() == 4);

    // a declined or off-list pick falls back to the ranking leader
    auto declined = fallback_select(finalists, t,
                                    [](const std::vector<std::string>&) {
                                        return std::optional<std::string>();
                                    });
    CHECK(declined.winner == "opt-1");
    CHECK(declined.method == FallbackMethod::integrator);

    auto offlist = fallback_select(finalists, t,
                                   [](const std::vector<std::string>&) {
                                       return std::optional<std::string>("opt-9");
                                   });
    CHECK(offlist.winner == "opt-1");
}

TEST_CASE("minimax regret resolves when outranking ties") {
    // Copeland tie (no pair win either way), distinct regrets.
    // A: (9,0), B: (5,5); w = .5/.5. sign sum = 0 for both pairs.
    std::vector<std::vector<std::vector<double>>> s = {{{9, 0}, {5, 5}}};
    auto t = table_from_arrays(s, {1}, {1}, {{1, 1}}, {0.5, 0.5});
    auto finalists = plain_options(2);

    CHECK_FALSE(outranking_winner(finalists, t).has_value());
    // regrets: A -> .5*(5-0)=2.5; B -> .5*(9-5)=2.0; B wins
    auto r = fallback_select(finalists, t);
    CHECK(r.method == FallbackMethod::minimax_regret);
    CHECK(r.winner == "opt-2");
    CHECK(r.levels_tried ==
          std::vector<std::string>{"outranking", "minimax_regret"});
}

TEST_CASE("robust satisficing resolves when regrets tie") {
    // A: (8,2), B: (5,5) with w=.5/.5.
    // pair signs cancel; regrets both 1.5; floors 0.2 vs 0.5: B wins.
    std::vector<std::vector<std::vector<double>>> s = {{{8, 2}, {5, 5}}};
    auto t = table_from_arrays(s, {1}, {1}, {{1, 1}}, {0.5, 0.5});
    auto finalists = plain_options(2);

    CHECK_FALSE(outranking_winner(finalists, t).has_value());
    CHECK_FALSE(minimax_regret_winner(finalists, t).has_value());
    auto r = fallback_select(finalists, t);
    CHECK(r.method == FallbackMethod::robust_satisficing);
    CHECK(r.winner == "opt-2");
}

TEST_CASE("a single finalist wins vacuously at the first level") {
    auto t = table_from_arrays({{{5.0}}}, {1}, {1}, {{1.0}}, {1.0});
    auto r = fallback_select(plain_options(1), t);
    CHECK(r.winner == "opt-1");
    CHECK(r.method == FallbackMethod::outranking);
}

TEST_CASE("the cascade is total and bit-repeatable over random tables") {
    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> uscore(0.0, 10.0);
    std::uniform_real_distribution<double> ufactor(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + rng() % 4, f = 1 + rng() % 4, p = 1 + rng() % 4;
        std::vector<std::vector<std::vector<double>>> s(
            n, std::vector<std::vector<double>>(f, std::vector<double>(p)));
        std::vector<double> c(n), e(n), w(p);
        std::vector<std::vector<double>> phi(n, std::vector<double>(p));
        double wsum = 0;
        for (auto& x : w) { x = ufactor(rng) + 1e-3; wsum += x; }
        for (auto& x : w) x /= wsum;
        for (std::size_t d = 0; d < n; ++d) {
            c[d] = ufactor(rng);
            e[d] = ufactor(rng);
            for (std::size_t o = 0; o < f; ++o)
                for (std::size_t k = 0; k < p; ++k)
                    s[d][o][k] = (rng() % 2) ? uscore(rng) : double(rng() % 11);
            for (std::size_t k = 0; k < p; ++k) phi[d][k] = ufactor(rng);
        }
        auto t = table_from_arrays(s, c, e, phi, w);
        auto finalists = plain_options(f);

        auto pick = [](const std::vector<std::string>& top2) {
            return std::optional<std::string>(top2.back());
        };
        auto r1 = fallback_select(finalists, t, pick);
        auto r2 = fallback_select(finalists, t, pick);
        REQUIRE_FALSE(r1.winner.empty());
        bool is_finalist = false;
        for (const auto& fo : finalists)
            if (fo.option_id == r1.winner) is_finalist = true;
        CHECK(is_finalist);
        CHECK(r1.winner == r2.winner);
        CHECK(r1.method == r2.method);
        CHECK(r1.levels_tried == r2.levels_tried);
    }
}
