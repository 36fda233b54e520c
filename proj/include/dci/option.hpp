#pragma once
// Candidate options and their structured records: the shared vocabulary
// between delegates (who contribute to records) and the convergent flow
// (which clusters, compresses, and scores them).

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

namespace dci {

struct Criterion {
    std::string id;
    double weight = 0.0;
};

// One raw hypothesis as pooled in Stage 1 or proposed mid-session.
struct PoolEntry {
    std::string author;
    std::string label;
    std::string description;
    std::string evidence_link; // empty when none given
};

// Text attributed to a delegate and the round it was said in.
struct Attributed {
    std::string author;
    int round = 0;
    std::string text;
};

struct Objection {
    std::string author;
    int round = 0;
    std::string content;
    bool fatal = false;
    bool withdrawn = false;
    std::string move_id;   // addressable id, lets later moves withdraw it
    std::string option_id; // option the objection stands against
};

struct OptionRecord {
    std::vector<Attributed> pros;
    std::vector<Attributed> cons;
    std::vector<Attributed> assumptions;
    std::vector<Attributed> evidence;
    std::vector<Attributed> risks;
    std::vector<Objection> objections;
};

struct CandidateOption {
    std::string option_id; // "opt-<seq>"
    int seq = 0;           // creation order, used for deterministic ties
    std::string canonical_label;
    std::vector<PoolEntry> member_hypotheses;
    OptionRecord record;
};

// Clustering key: lowercased, trimmed, inner whitespace collapsed to one
// space. Two hypotheses are the same option family iff their keys match.
inline std::string canonical_key(const std::string& label) {
    std::string out;
    out.reserve(label.size());
    bool pending_space = false;
    for (unsigned char ch : label) {
        if (std::isspace(ch)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(ch)));
    }
    return out;
}

inline int count_fatal_open_objections(const OptionRecord& r) {
    int n = 0;
    for (const auto& o : r.objections)
        if (o.fatal && !o.withdrawn) ++n;
    return n;
}

} // namespace dci
