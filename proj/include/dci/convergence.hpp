#pragma once
// Stages 1-7 of the convergent flow: pooling and clustering hypotheses,
// recording challenges, bounded mid-session admission, compression, the
// weighted scoring rule, the three convergence tests, and the four-level
// forced-decision cascade that guarantees exactly one winner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dci/delegate.hpp"
#include "dci/error.hpp"
#include "dci/option.hpp"

namespace dci {

// ---------------------------------------------------------------------------
// Stage 2: canonicalization and clustering
// ---------------------------------------------------------------------------

struct DroppedCluster {
    std::string canonical_label;
    int members = 0;
    std::string reason;
};

// Groups pool entries by canonical key in first-appearance order. When the
// clusters outnumber k_max, the k_max largest survive, ties going to the
// earliest-authored cluster. Surviving options are numbered opt-1.. in
// first-appearance order.
inline std::vector<CandidateOption>
canonicalize_and_cluster(const std::vector<PoolEntry>& pool, int k_max,
                         std::vector<DroppedCluster>* dropped = nullptr) {
    if (pool.empty())
        throw DciError("EmptyPool", "hypothesis pool is empty");

    struct Cluster {
        std::string key;
        std::string label; // first-seen spelling
        int first_index = 0;
        std::vector<PoolEntry> members;
    };
    std::vector<Cluster> clusters;
    std::map<std::string, std::size_t> by_key;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::string key = canonical_key(pool[i].label);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            by_key[key] = clusters.size();
            clusters.push_back(Cluster{key, pool[i].label,
                                       static_cast<int>(i), {pool[i]}});
        } else {
            clusters[it->second].members.push_back(pool[i]);
        }
    }

    std::vector<std::size_t> order(clusters.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (static_cast<int>(clusters.size()) > k_max) {
        // keep the k_max with the most members; ties to earliest authorship
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             if (clusters[a].members.size() !=
                                 clusters[b].members.size())
                                 return clusters[a].members.size() >
                                        clusters[b].members.size();
                             return clusters[a].first_index <
                                    clusters[b].first_index;
                         });
        if (dropped) {
            for (std::size_t i = k_max; i < order.size(); ++i)
                dropped->push_back(
                    DroppedCluster{clusters[order[i]].key,
                                   static_cast<int>(clusters[order[i]].members.size()),
                                   "over max_options"});
        }
        order.resize(k_max);
        std::sort(order.begin(), order.end()); // restore appearance order
    }

    std::vector<CandidateOption> options;
    int seq = 0;
    for (std::size_t idx : order) {
        CandidateOption o;
        o.seq = ++seq;
        o.option_id = "opt-" + std::to_string(o.seq);
        o.canonical_label = clusters[idx].key;
        o.member_hypotheses = clusters[idx].members;
        options.push_back(std::move(o));
    }
    return options;
}

// ---------------------------------------------------------------------------
// Stage 3: recording contributions and admitting new hypotheses
// ---------------------------------------------------------------------------

// Each contribution kind lands in one record list: support feeds pros,
// challenge feeds cons (and objections), evidence feeds evidence,
// counterexample feeds risks, uncertainty_note feeds assumptions. A
// revision_suggestion is only a vehicle for a proposed new hypothesis.
inline void record_contribution(CandidateOption& opt,
                                const ChallengeContribution& c, int round) {
    Attributed entry{c.author, round, c.content};
    switch (c.kind) {
        case ContributionKind::support:
            opt.record.pros.push_back(entry);
            break;
        case ContributionKind::challenge: {
            opt.record.cons.push_back(entry);
            Objection obj;
            obj.author = c.author;
            obj.round = round;
            obj.content = c.content;
            obj.fatal = c.fatal;
            obj.move_id = c.move_id;
            obj.option_id = opt.option_id;
            opt.record.objections.push_back(std::move(obj));
            break;
        }
        case ContributionKind::evidence:
            opt.record.evidence.push_back(entry);
            if (!c.linked_evidence.empty())
                opt.record.evidence.push_back(
                    Attributed{c.author, round, c.linked_evidence});
            break;
        case ContributionKind::counterexample:
            opt.record.risks.push_back(entry);
            break;
        case ContributionKind::uncertainty_note:
            opt.record.assumptions.push_back(entry);
            break;
        case ContributionKind::revision_suggestion:
            break;
    }
}

// Marks the objection carried by the given contribution id withdrawn.
inline bool withdraw_objection(std::vector<CandidateOption>& options,
                               const std::string& objection_move_id) {
    bool any = false;
    for (auto& opt : options) {
        for (auto& obj : opt.record.objections) {
            if (obj.move_id == objection_move_id && !obj.withdrawn) {
                obj.withdrawn = true;
                any = true;
            }
        }
    }
    return any;
}

struct AdmissionRefusal {
    std::string author;
    NewHypothesis hypothesis;
    std::string reason;
};

struct AdmissionOutcome {
    std::vector<CandidateOption> options;
    std::vector<std::string> admitted_ids;
    std::vector<AdmissionRefusal> refusals;
};

// A mid-session hypothesis joins the option set iff the cutoff has not
// passed (round < max_rounds), its key is materially distinct, it carries
// evidence, it names an existing option it claims to beat, and a slot is
// free under k_max. Refusals are outcomes, never errors.
inline AdmissionOutcome
admit_new_hypotheses(const std::vector<CandidateOption>& existing,
                     const std::vector<ChallengeContribution>& contributions,
                     int round, int max_rounds, int k_max) {
    AdmissionOutcome out;
    out.options = existing;
    int next_seq = 0;
    for (const auto& o : out.options) next_seq = std::max(next_seq, o.seq);

    for (const auto& c : contributions) {
        if (!c.proposed_new_hypothesis) continue;
        const NewHypothesis& h = *c.proposed_new_hypothesis;
        auto refuse = [&](const std::string& why) {
            out.refusals.push_back(AdmissionRefusal{c.author, h, why});
        };

        if (round >= max_rounds) {
            refuse("cutoff passed: round " + std::to_string(round) +
                   " is not before max_rounds " + std::to_string(max_rounds));
            continue;
        }
        std::string key = canonical_key(h.label);
        bool clash = false;
        for (const auto& o : out.options)
            if (o.canonical_label == key) { clash = true; break; }
        if (clash) {
            refuse("not materially distinct: key '" + key +
                   "' already names an option");
            continue;
        }
        if (h.evidence_link.empty()) {
            refuse("no evidence link");
            continue;
        }
        bool superior_known = false;
        for (const auto& o : out.options)
            if (o.option_id == h.superior_to) { superior_known = true; break; }
        if (!superior_known) {
            refuse("claimed superiority over unknown option '" +
                   h.superior_to + "'");
            continue;
        }
        if (static_cast<int>(out.options.size()) >= k_max) {
            refuse("option set full at max_options " + std::to_string(k_max));
            continue;
        }

        CandidateOption o;
        o.seq = ++next_seq;
        o.option_id = "opt-" + std::to_string(o.seq);
        o.canonical_label = key;
        o.member_hypotheses.push_back(
            PoolEntry{c.author, h.label, h.description, h.evidence_link});
        out.options.push_back(std::move(o));
        out.admitted_ids.push_back(out.options.back().option_id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stage 4: revision and compression
// ---------------------------------------------------------------------------

inline int support_count(const CandidateOption& o) {
    return static_cast<int>(o.record.pros.size());
}

inline int evidence_count(const CandidateOption& o) {
    return static_cast<int>(o.record.evidence.size());
}

// Strict dominance: a dominates b iff a has at least as many supports, at
// most as many standing fatal objections, and at least as much evidence,
// with one inequality strict, and nobody named b their top choice in an
// interim sheet. Conservative by design: only clear losers go.
inline bool strictly_dominates(const CandidateOption& a,
                               const CandidateOption& b,
                               const std::vector<ScoreSheet>& interim_sheets) {
    int sa = support_count(a), sb = support_count(b);
    int fa = count_fatal_open_objections(a.record);
    int fb = count_fatal_open_objections(b.record);
    int ea = evidence_count(a), eb = evidence_count(b);
    if (sa < sb || fa > fb || ea < eb) return false;
    if (sa == sb && fa == fb && ea == eb) return false;
    for (const auto& sheet : interim_sheets)
        if (sheet.top_choice == b.option_id) return false;
    return true;
}

struct MergeDirective {
    std::string key_a;
    std::string key_b;
    std::string move_id; // the bridge move that declared compatibility
};

struct CompressionLog {
    struct Removal { std::string option_id; std::string dominated_by; };
    struct Merge { std::string kept; std::string absorbed; std::string move_id; };
    struct Truncation { std::string option_id; int support = 0; };
    std::vector<Removal> removed;
    std::vector<Merge> merged;
    std::vector<Truncation> truncated;
};

namespace detail {

// Keeps the cap best-supported options, ties to the lower option id, and
// preserves the incoming order of the survivors.
inline void truncate_by_support(std::vector<CandidateOption>& kept, int cap,
                                CompressionLog* log) {
    if (static_cast<int>(kept.size()) <= cap) return;
    std::vector<std::size_t> order(kept.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) {
                         int sx = support_count(kept[x]);
                         int sy = support_count(kept[y]);
                         if (sx != sy) return sx > sy;
                         return kept[x].seq < kept[y].seq;
                     });
    std::set<std::size_t> keep_idx(order.begin(), order.begin() + cap);
    std::vector<CandidateOption> survivors;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (keep_idx.count(i)) {
            survivors.push_back(kept[i]);
        } else if (log) {
            log->truncated.push_back(CompressionLog::Truncation{
                kept[i].option_id, support_count(kept[i])});
        }
    }
    kept = std::move(survivors);
}

} // namespace detail

// Removes dominated options, folds bridge-merged variants together (the
// lower-numbered option absorbs the other), and truncates to the cap by
// support count with ties to the lower option id. At least one option
// always survives.
inline std::vector<CandidateOption>
revise_and_compress(const std::vector<CandidateOption>& options,
                    const std::vector<ScoreSheet>& interim_sheets,
                    const std::vector<MergeDirective>& merges, int cap,
                    CompressionLog* log = nullptr) {
    std::vector<CandidateOption> pool = options;
    std::sort(pool.begin(), pool.end(),
              [](const CandidateOption& a, const CandidateOption& b) {
                  return a.seq < b.seq;
              });

    // 1) drop strictly dominated options (never all of them; strict
    //    dominance is a partial order, so maximal elements survive)
    std::vector<CandidateOption> kept;
    for (const auto& candidate : pool) {
        const CandidateOption* dominator = nullptr;
        for (const auto& other : pool) {
            if (other.option_id == candidate.option_id) continue;
            if (strictly_dominates(other, candidate, interim_sheets)) {
                dominator = &other;
                break;
            }
        }
        if (dominator) {
            if (log)
                log->removed.push_back(
                    CompressionLog::Removal{candidate.option_id,
                                            dominator->option_id});
        } else {
            kept.push_back(candidate);
        }
    }

    // 2) fold together options an accepted bridge declared compatible
    for (const auto& m : merges) {
        CandidateOption* a = nullptr;
        CandidateOption* b = nullptr;
        for (auto& o : kept) {
            if (o.canonical_label == canonical_key(m.key_a)) a = &o;
            if (o.canonical_label == canonical_key(m.key_b)) b = &o;
        }
        if (!a || !b || a == b) continue;
        CandidateOption* keep = (a->seq < b->seq) ? a : b;
        CandidateOption* absorb = (a->seq < b->seq) ? b : a;
        keep->member_hypotheses.insert(keep->member_hypotheses.end(),
                                       absorb->member_hypotheses.begin(),
                                       absorb->member_hypotheses.end());
        auto& kr = keep->record;
        const auto& ar = absorb->record;
        kr.pros.insert(kr.pros.end(), ar.pros.begin(), ar.pros.end());
        kr.cons.insert(kr.cons.end(), ar.cons.begin(), ar.cons.end());
        kr.assumptions.insert(kr.assumptions.end(), ar.assumptions.begin(),
                              ar.assumptions.end());
        kr.evidence.insert(kr.evidence.end(), ar.evidence.begin(),
                           ar.evidence.end());
        kr.risks.insert(kr.risks.end(), ar.risks.begin(), ar.risks.end());
        kr.objections.insert(kr.objections.end(), ar.objections.begin(),
                             ar.objections.end());
        if (log)
            log->merged.push_back(CompressionLog::Merge{
                keep->option_id, absorb->option_id, m.move_id});
        std::string absorbed_id = absorb->option_id;
        kept.erase(std::remove_if(kept.begin(), kept.end(),
                                  [&](const CandidateOption& o) {
                                      return o.option_id == absorbed_id;
                                  }),
                   kept.end());
    }

    // 3) cap by support count, ties to the lower option id
    detail::truncate_by_support(kept, cap, log);
    return kept;
}

// Finalist selection is plain truncation: the m best-supported options, in
// their original order, ties to the lower option id. (Dominance removal and
// merging belong to the revision step, not here.)
inline std::vector<CandidateOption>
select_finalists(const std::vector<CandidateOption>& options, int m,
                 CompressionLog* log = nullptr) {
    std::vector<CandidateOption> pool = options;
    std::sort(pool.begin(), pool.end(),
              [](const CandidateOption& a, const CandidateOption& b) {
                  return a.seq < b.seq;
              });
    detail::truncate_by_support(pool, m, log);
    return pool;
}

// ---------------------------------------------------------------------------
// Stage 5: the weighted scoring rule
// ---------------------------------------------------------------------------

struct ScoreCell {
    double s = 0.0;   // raw score in [0,10]
    double c = 1.0;   // delegate confidence
    double e = 1.0;   // evidence strength
    double phi = 1.0; // domain fit
};

struct ScoreTable {
    // delegate -> option -> criterion -> cell
    std::map<std::string, std::map<std::string, std::map<std::string, ScoreCell>>>
        cells;
    std::vector<Criterion> criteria; // weights normalized upstream

    int delegate_count() const { return static_cast<int>(cells.size()); }
};

inline ScoreTable
build_score_table(const std::vector<ScoreSheet>& sheets,
                  const std::vector<CandidateOption>& finalists,
                  const std::vector<Criterion>& criteria,
                  const std::map<std::string, std::map<std::string, double>>&
                      domain_fit = {}) {
    ScoreTable t;
    t.criteria = criteria;
    for (const auto& sheet : sheets) {
        auto fit_row = domain_fit.find(sheet.delegate);
        for (const auto& f : finalists) {
            auto row = sheet.scores.find(f.option_id);
            if (row == sheet.scores.end()) continue;
            for (const auto& c : criteria) {
                auto cell = row->second.find(c.id);
                if (cell == row->second.end()) continue;
                double phi = 1.0;
                if (fit_row != domain_fit.end()) {
                    auto p = fit_row->second.find(c.id);
                    if (p != fit_row->second.end()) phi = p->second;
                }
                t.cells[sheet.delegate][f.option_id][c.id] =
                    ScoreCell{cell->second, sheet.confidence,
                              sheet.evidence_strength, phi};
            }
        }
    }
    return t;
}

struct TotalScore {
    double total = 0.0;
    double normalized = 0.0; // total / (10 * delegates), in [0,1]
};

// Total(o) = sum over criteria of w_c * sum over delegates of s*c*e*phi.
inline TotalScore total_score(const std::string& option_id,
                              const ScoreTable& t) {
    double total = 0.0;
    for (const auto& c : t.criteria) {
        double inner = 0.0;
        for (const auto& [delegate, options] : t.cells) {
            auto row = options.find(option_id);
            if (row == options.end())
                throw DciError("IncompleteTable",
                               "no scores from " + delegate + " for " +
                                   option_id);
            auto cell = row->second.find(c.id);
            if (cell == row->second.end())
                throw DciError("IncompleteTable",
                               "no score from " + delegate + " for (" +
                                   option_id + ", " + c.id + ")");
            const ScoreCell& x = cell->second;
            inner += x.s * x.c * x.e * x.phi;
        }
        total += c.weight * inner;
    }
    TotalScore out;
    out.total = total;
    int n = t.delegate_count();
    out.normalized = (n > 0) ? total / (10.0 * n) : 0.0;
    return out;
}

// Per-criterion aggregate used by the fallback sub-rules.
inline double agg_criterion(const std::string& option_id,
                            const std::string& criterion_id,
                            const ScoreTable& t) {
    double inner = 0.0;
    for (const auto& [delegate, options] : t.cells) {
        auto row = options.find(option_id);
        if (row == options.end()) continue;
        auto cell = row->second.find(criterion_id);
        if (cell == row->second.end()) continue;
        const ScoreCell& x = cell->second;
        inner += x.s * x.c * x.e * x.phi;
    }
    return inner;
}

struct RankedOption {
    std::string option_id;
    int seq = 0;
    double total = 0.0;
    double normalized = 0.0;
};

// Descending by normalized total, deterministic ties by ascending option
// sequence.
inline std::vector<RankedOption>
aggregate_scores(const std::vector<CandidateOption>& finalists,
                 const ScoreTable& t) {
    std::vector<RankedOption> ranking;
    for (const auto& f : finalists) {
        TotalScore s = total_score(f.option_id, t);
        ranking.push_back(RankedOption{f.option_id, f.seq, s.total, s.normalized});
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const RankedOption& a, const RankedOption& b) {
                         if (a.normalized != b.normalized)
                             return a.normalized > b.normalized;
                         return a.seq < b.seq;
                     });
    return ranking;
}

// The delegate's own argmax over its sheet, weighted by the criteria and
// its domain fit; ties go to the lower option id.
inline std::string
compute_top_choice(const ScoreSheet& sheet,
                   const std::vector<CandidateOption>& finalists,
                   const std::vector<Criterion>& criteria,
                   const std::map<std::string, double>& phi_row = {}) {
    std::string best;
    int best_seq = 0;
    double best_score = 0.0;
    bool first = true;
    for (const auto& f : finalists) {
        auto row = sheet.scores.find(f.option_id);
        if (row == sheet.scores.end()) continue;
        double score = 0.0;
        for (const auto& c : criteria) {
            auto cell = row->second.find(c.id);
            if (cell == row->second.end()) continue;
            double phi = 1.0;
            auto p = phi_row.find(c.id);
            if (p != phi_row.end()) phi = p->second;
            score += c.weight * cell->second * sheet.confidence *
                     sheet.evidence_strength * phi;
        }
        if (first || score > best_score ||
            (score == best_score && f.seq < best_seq)) {
            best = f.option_id;
            best_seq = f.seq;
            best_score = score;
            first = false;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Stage 6: convergence tests, in priority order
// ---------------------------------------------------------------------------

enum class VerdictKind {
    score_dominance,
    majority_backing,
    no_blocking_objection,
    none,
};

inline const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::score_dominance:       return "score_dominance";
        case VerdictKind::majority_backing:      return "majority_backing";
        case VerdictKind::no_blocking_objection: return "no_blocking_objection";
        case VerdictKind::none:                  return "none";
    }
    return "unknown";
}

struct ConvergenceVerdict {
    VerdictKind kind = VerdictKind::none;
    std::optional<std::string> winner; // present iff kind != none
};

// Checked strictly in this order: score dominance, then majority backing,
// then no blocking objection. A single finalist is dominant trivially.
inline ConvergenceVerdict
test_convergence(const std::vector<RankedOption>& ranking,
                 const std::vector<CandidateOption>& finalists, double margin,
                 double majority_threshold,
                 const std::vector<ScoreSheet>& sheets, int council_size) {
    ConvergenceVerdict v;
    if (ranking.empty()) return v;

    if (ranking.size() == 1) {
        v.kind = VerdictKind::score_dominance;
        v.winner = ranking[0].option_id;
        return v;
    }
    if (ranking[0].normalized - ranking[1].normalized > margin) {
        v.kind = VerdictKind::score_dominance;
        v.winner = ranking[0].option_id;
        return v;
    }

    int backers = 0;
    for (const auto& s : sheets)
        if (s.top_choice == ranking[0].option_id) ++backers;
    if (council_size > 0 &&
        double(backers) / double(council_size) > majority_threshold) {
        v.kind = VerdictKind::majority_backing;
        v.winner = ranking[0].option_id;
        return v;
    }

    bool blocking = false;
    for (const auto& f : finalists)
        for (const auto& obj : f.record.objections)
            if (obj.fatal && !obj.withdrawn) { blocking = true; break; }
    if (!blocking) {
        v.kind = VerdictKind::no_blocking_objection;
        v.winner = ranking[0].option_id;
        return v;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Stage 7: forced-decision fallback cascade
// ---------------------------------------------------------------------------

enum class FallbackMethod {
    outranking,
    minimax_regret,
    robust_satisficing,
    integrator,
};

inline const char* to_string(FallbackMethod m) {
    switch (m) {
        case FallbackMethod::outranking:         return "outranking";
        case FallbackMethod::minimax_regret:     return "minimax_regret";
        case FallbackMethod::robust_satisficing: return "robust_satisficing";
        case FallbackMethod::integrator:         return "integrator";
    }
    return "unknown";
}

namespace detail {

inline int sign(double x) { return (x > 0.0) - (x < 0.0); }

} // namespace detail

// A wins the pair iff the weighted sign-sum of per-criterion aggregate
// differences is positive.
inline bool outranks(const std::string& a, const std::string& b,
                     const ScoreTable& t) {
    double sum = 0.0;
    for (const auto& c : t.criteria)
        sum += c.weight * detail::sign(agg_criterion(a, c.id, t) -
                                       agg_criterion(b, c.id, t));
    return sum > 0.0;
}

// Copeland winner: most pairwise wins, if unique.
inline std::optional<std::string>
outranking_winner(const std::vector<CandidateOption>& finalists,
                  const ScoreTable& t) {
    std::vector<int> wins(finalists.size(), 0);
    for (std::size_t i = 0; i < finalists.size(); ++i)
        for (std::size_t j = 0; j < finalists.size(); ++j)
            if (i != j &&
                outranks(finalists[i].option_id, finalists[j].option_id, t))
                ++wins[i];
    int best = *std::max_element(wins.begin(), wins.end());
    int count = static_cast<int>(std::count(wins.begin(), wins.end(), best));
    if (count != 1) return std::nullopt;
    for (std::size_t i = 0; i < finalists.size(); ++i)
        if (wins[i] == best) return finalists[i].option_id;
    return std::nullopt;
}

// Unique minimizer of the worst weighted shortfall from the per-criterion
// leader, if any.
inline std::optional<std::string>
minimax_regret_winner(const std::vector<CandidateOption>& finalists,
                      const ScoreTable& t) {
    std::map<std::string, double> best_per_criterion;
    for (const auto& c : t.criteria) {
        double best = 0.0;
        bool first = true;
        for (const auto& f : finalists) {
            double v = agg_criterion(f.option_id, c.id, t);
            if (first || v > best) { best = v; first = false; }
        }
        best_per_criterion[c.id] = best;
    }
    std::vector<double> regrets;
    for (const auto& f : finalists) {
        double worst = 0.0;
        for (const auto& c : t.criteria) {
            double r = c.weight * (best_per_criterion[c.id] -
                                   agg_criterion(f.option_id, c.id, t));
            worst = std::max(worst, r);
        }
        regrets.push_back(worst);
    }
    double best = *std::min_element(regrets.begin(), regrets.end());
    int count = static_cast<int>(std::count(regrets.begin(), regrets.end(), best));
    if (count != 1) return std::nullopt;
    for (std::size_t i = 0; i < finalists.size(); ++i)
        if (regrets[i] == best) return finalists[i].option_id;
    return std::nullopt;
}

// Unique maximizer of the normalized worst-case criterion, if any.
inline std::optional<std::string>
robust_satisficing_winner(const std::vector<CandidateOption>& finalists,
                          const ScoreTable& t) {
    int n = t.delegate_count();
    double scale = 10.0 * std::max(n, 1);
    std::vector<double> floors;
    for (const auto& f : finalists) {
        double floor = 0.0;
        bool first = true;
        for (const auto& c : t.criteria) {
            double v = agg_criterion(f.option_id, c.id, t) / scale;
            if (first || v < floor) { floor = v; first = false; }
        }
        floors.push_back(floor);
    }
    double best = *std::max_element(floors.begin(), floors.end());
    int count = static_cast<int>(std::count(floors.begin(), floors.end(), best));
    if (count != 1) return std::nullopt;
    for (std::size_t i = 0; i < floors.size(); ++i)
        if (floors[i] == best) return finalists[i].option_id;
    return std::nullopt;
}

struct FallbackResult {
    std::string winner;
    FallbackMethod method = FallbackMethod::outranking;
    std::vector<std::string> levels_tried; // for the event log
};

// The cascade is total: each level either yields a unique winner or passes
// the tie down, and the Integrator level always picks exactly one of the
// top-2. The integrator_pick callback may decline (or pick something not in
// the top-2), in which case the ranking leader wins.
inline FallbackResult fallback_select(
    const std::vector<CandidateOption>& finalists, const ScoreTable& t,
    const std::function<std::optional<std::string>(
        const std::vector<std::string>&)>& integrator_pick = nullptr) {
    if (finalists.empty())
        throw DciError("EmptyPool", "fallback needs at least one finalist");
    FallbackResult r;

    r.levels_tried.push_back("outranking");
    if (auto w = outranking_winner(finalists, t)) {
        r.winner = *w;
        r.method = FallbackMethod::outranking;
        return r;
    }
    r.levels_tried.push_back("minimax_regret");
    if (auto w = minimax_regret_winner(finalists, t)) {
        r.winner = *w;
        r.method = FallbackMethod::minimax_regret;
        return r;
    }
    r.levels_tried.push_back("robust_satisficing");
    if (auto w = robust_satisficing_winner(finalists, t)) {
        r.winner = *w;
        r.method = FallbackMethod::robust_satisficing;
        return r;
    }

    r.levels_tried.push_back("integrator");
    std::vector<RankedOption> ranking = aggregate_scores(finalists, t);
    std::vector<std::string> top2;
    for (const auto& ro : ranking) {
        top2.push_back(ro.option_id);
        if (top2.size() == 2) break;
    }
    r.method = FallbackMethod::integrator;
    r.winner = top2.front();
    if (integrator_pick) {
        if (auto pick = integrator_pick(top2)) {
            for (const auto& id : top2)
                if (id == *pick) { r.winner = *pick; break; }
        }
    }
    return r;
}

} // namespace dci
