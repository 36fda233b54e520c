#pragma once
// Append-only event log shared by every session in a deliberation tree.
// One JSON object per line; seq is tree-wide, strictly increasing from 1,
// which is what replay leans on to detect truncated or reordered logs.

#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dci/error.hpp"
#include "dci/grammar.hpp"

namespace dci {

struct Event {
    long long seq = 0;
    std::string session_id;
    int round = 0; // 0 outside the round loop
    std::string type;
    Json payload;
};

inline Json to_json(const Event& e) {
    return Json{{"seq", e.seq},
                {"session", e.session_id},
                {"round", e.round},
                {"type", e.type},
                {"payload", e.payload}};
}

class EventLog {
public:
    const Event& append(const std::string& type, const std::string& session_id,
                        int round, Json payload = Json::object()) {
        Event e;
        e.seq = ++last_seq_;
        e.session_id = session_id;
        e.round = round;
        e.type = type;
        e.payload = std::move(payload);
        events_.push_back(std::move(e));
        return events_.back();
    }

    const std::vector<Event>& events() const { return events_; }
    bool empty() const { return events_.empty(); }
    std::size_t size() const { return events_.size(); }

    void write_jsonl(std::ostream& out) const {
        for (const auto& e : events_)
            out << to_json(e).dump() << "\n";
    }

    std::string to_jsonl() const {
        std::ostringstream out;
        write_jsonl(out);
        return out.str();
    }

private:
    std::vector<Event> events_;
    long long last_seq_ = 0;
};

// Reads a log back, insisting on the invariants the writer guarantees.
// Anything off (bad JSON, missing keys, a seq gap) is log corruption.
inline std::vector<Event> parse_event_log(std::istream& in) {
    std::vector<Event> events;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Json doc = Json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
            throw DciError("LogCorruption", "line " + std::to_string(line_no) +
                                                " is not a JSON object");
        for (const char* key : {"seq", "session", "round", "type", "payload"})
            if (!doc.contains(key))
                throw DciError("LogCorruption",
                               "line " + std::to_string(line_no) +
                                   " is missing field '" + key + "'");
        if (!doc.at("seq").is_number_integer() ||
            !doc.at("session").is_string() ||
            !doc.at("round").is_number_integer() ||
            !doc.at("type").is_string())
            throw DciError("LogCorruption", "line " + std::to_string(line_no) +
                                                " has a wrong-typed field");
        Event e;
        e.seq = doc.at("seq").get<long long>();
        e.session_id = doc.at("session").get<std::string>();
        e.round = doc.at("round").get<int>();
        e.type = doc.at("type").get<std::string>();
        e.payload = doc.at("payload");
        long long expected = (long long)events.size() + 1;
        if (e.seq != expected)
            throw DciError("LogCorruption",
                           "seq " + std::to_string(e.seq) + " at line " +
                               std::to_string(line_no) + ", expected " +
                               std::to_string(expected));
        events.push_back(std::move(e));
    }
    if (events.empty())
        throw DciError("LogCorruption", "log contains no events");
    return events;
}

inline std::vector<Event> parse_event_log(const std::string& text) {
    std::istringstream in(text);
    return parse_event_log(in);
}

} // namespace dci
