#include <catch2/catch_amalgamated.hpp>

#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dci/engine.hpp"
#include "dci/remote.hpp"

using namespace dci;

namespace {

// loopback completion endpoint serving canned replies in request order
struct StubEndpoint {
    StubEndpoint() {
        server.Post("/complete", [this](const httplib::Request& req,
                                        httplib::Response& res) {
            std::lock_guard<std::mutex> lock(mu);
            requests.push_back(Json::parse(req.body));
            if (force_status != 200) {
                res.status = force_status;
                return;
            }
            std::string text;
            if (!replies.empty()) {
                text = replies.front();
                replies.pop_front();
            }
            res.set_content(Json{{"text", text}}.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~StubEndpoint() {
        server.stop();
        thread.join();
    }

    RemoteConfig config() const {
        RemoteConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port);
        c.timeout_seconds = 5;
        return c;
    }

    void serve(std::initializer_list<std::string> texts) {
        std::lock_guard<std::mutex> lock(mu);
        replies.assign(texts.begin(), texts.end());
    }

    std::vector<Json> seen() {
        std::lock_guard<std::mutex> lock(mu);
        return requests;
    }

    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::mutex mu;
    std::deque<std::string> replies;
    std::vector<Json> requests;
    int force_status = 200;
};

std::string proposal_text(const std::string& label,
                          const std::string& description, double confidence) {
    Json doc{{"framing", "framing for " + label},
             {"hypotheses",
              Json::array({Json{{"label", label},
                                {"description", description}}})},
             {"confidence", confidence}};
    return "Here is my proposal.\n" + doc.dump();
}

std::string sheet_text(std::map<std::string, double> c1_scores,
                       double confidence) {
    Json scores = Json::object();
    for (const auto& [opt, v] : c1_scores) scores[opt] = Json{{"c1", v}};
    Json doc{{"scores", scores},
             {"confidence", confidence},
             {"evidence_strength", 1.0}};
    return doc.dump();
}

} // namespace

TEST_CASE("json documents are extracted from prose with nested braces and "
          "strings") {
    auto docs = detail::extract_json_objects(
        "Thinking out loud... {\"a\": {\"b\": \"} tricky {\"}} and then "
        "{\"c\": 1} trailing { unbalanced");
    REQUIRE(docs.size() == 2);
    REQUIRE(docs[0].at("a").at("b") == "} tricky {");
    REQUIRE(docs[1].at("c") == 1);
    REQUIRE(detail::extract_json_objects("no documents here").empty());
    REQUIRE(detail::extract_json_objects("almost {\"a\": } one").empty());
}

TEST_CASE("a remote delegate carries archetype and grammar in the system "
          "text and returns the parsed proposal") {
    StubEndpoint stub;
    stub.serve({proposal_text("plan alpha", "run alpha", 0.8)});
    RemoteDelegate d("d1", ArchetypeKind::framer, stub.config());

    auto p = d.generate_proposal("choose the rollout direction");
    REQUIRE(p.has_value());
    REQUIRE(p->hypotheses.size() == 1);
    REQUIRE(p->hypotheses[0].label == "plan alpha");
    REQUIRE(p->confidence == 0.8);

    auto seen = stub.seen();
    REQUIRE(seen.size() == 1);
    std::string system = seen[0].at("system").get<std::string>();
    std::string prompt = seen[0].at("prompt").get<std::string>();
    REQUIRE_THAT(system, Catch::Matchers::ContainsSubstring("Framer"));
    REQUIRE_THAT(system,
                 Catch::Matchers::ContainsSubstring("JSON documents"));
    REQUIRE_THAT(prompt, Catch::Matchers::ContainsSubstring(
                             "choose the rollout direction"));
}

TEST_CASE("malformed replies are re-prompted with the rejection reason and "
          "bounded") {
    StubEndpoint stub;
    RemoteDelegate d("d2", ArchetypeKind::challenger, stub.config());
    std::vector<CandidateOption> options(1);
    options[0].option_id = "opt-1";
    options[0].canonical_label = "plan alpha";

    SECTION("the third attempt can still succeed") {
        Json bad_move{{"act", "summon"},      {"move_id", "mv-1"},
                      {"session_id", "S-1"},  {"round", 1},
                      {"phase", "mutual_engagement"}, {"actor", "d2"},
                      {"mode", "critical"},   {"intent", "contest"},
                      {"target", "workspace"}, {"content", "no"},
                      {"confidence", 0.5},    {"move_force", "soft"},
                      {"meta_level", false}};
        Json good{{"option_id", "opt-1"},
                  {"kind", "challenge"},
                  {"content", "alpha breaks under load"},
                  {"fatal", true},
                  {"move_id", "obj-1"}};
        stub.serve({"still thinking", bad_move.dump(), good.dump()});

        auto turn = d.contribute(options, 1);
        REQUIRE(turn.has_value());
        REQUIRE(turn->contributions.size() == 1);
        REQUIRE(turn->contributions[0].fatal);

        auto seen = stub.seen();
        REQUIRE(seen.size() == 3);
        REQUIRE_THAT(seen[1].at("prompt").get<std::string>(),
                     Catch::Matchers::ContainsSubstring(
                         "previous reply was rejected"));
        REQUIRE_THAT(seen[2].at("prompt").get<std::string>(),
                     Catch::Matchers::ContainsSubstring("unknown act"));
    }
    SECTION("after the bound the turn is skipped") {
        stub.serve({"junk", "more junk", "even more junk", "never reached"});
        auto turn = d.contribute(options, 1);
        REQUIRE_FALSE(turn.has_value());
        REQUIRE(stub.seen().size() == 3); // first attempt plus two retries
    }
}

TEST_CASE("transport problems are the provider's failure, not a skipped "
          "reply") {
    SECTION("unreachable endpoint") {
        RemoteConfig cfg;
        cfg.base_url = "http://127.0.0.1:1"; // nothing listens there
        cfg.timeout_seconds = 1;
        RemoteDelegate d("d1", ArchetypeKind::framer, cfg);
        try {
            d.generate_proposal("anything");
            FAIL("expected ProviderFailure");
        } catch (const DciError& e) {
            REQUIRE(e.code() == "ProviderFailure");
        }
    }
    SECTION("non-200 status") {
        StubEndpoint stub;
        stub.force_status = 500;
        RemoteDelegate d("d1", ArchetypeKind::framer, stub.config());
        try {
            d.generate_proposal("anything");
            FAIL("expected ProviderFailure");
        } catch (const DciError& e) {
            REQUIRE(e.code() == "ProviderFailure");
            REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring("500"));
        }
    }
}

TEST_CASE("the integrator pick accepts an option or an explicit decline") {
    StubEndpoint stub;
    RemoteDelegate d("d4", ArchetypeKind::integrator, stub.config());

    SECTION("a pick") {
        stub.serve({"I'll take {\"picked\": \"opt-2\"}"});
        auto pick = d.integrator_pick({"opt-1", "opt-2"});
        REQUIRE(pick == "opt-2");
        REQUIRE(stub.seen().size() == 1);
    }
    SECTION("a decline is final, not re-prompted") {
        stub.serve({"{\"picked\": null}"});
        auto pick = d.integrator_pick({"opt-1", "opt-2"});
        REQUIRE_FALSE(pick.has_value());
        REQUIRE(stub.seen().size() == 1);
    }
}

TEST_CASE("a whole session can run over the wire") {
    StubEndpoint stub;
    // engine call order is deterministic: proposals d1 d2, turns d1 d2,
    // score sheets d1 d2
    stub.serve({proposal_text("plan alpha", "run alpha", 0.8),
                proposal_text("plan alpha", "run alpha leaner", 0.6),
                "{\"contributions\": [], \"moves\": []}",
                "{\"contributions\": [{\"option_id\": \"opt-1\", \"kind\": "
                "\"support\", \"content\": \"alpha carries the day\"}], "
                "\"moves\": []}",
                sheet_text({{"opt-1", 8}}, 0.9),
                sheet_text({{"opt-1", 7}}, 0.7)});

    SessionEnvelope env;
    env.problem = "choose the rollout direction";
    env.criteria = {{"c1", 1.0}};
    env.delegates = {{"d1", ArchetypeKind::framer},
                     {"d2", ArchetypeKind::explorer}};
    DelegateRoster roster{
        std::make_shared<RemoteDelegate>("d1", ArchetypeKind::framer,
                                         stub.config()),
        std::make_shared<RemoteDelegate>("d2", ArchetypeKind::explorer,
                                         stub.config())};

    EventLog log;
    DecisionPacket p = run_session(env, roster, log);
    REQUIRE(p.decision.label == "plan alpha");
    REQUIRE(p.decision.content == "run alpha; run alpha leaner");
    REQUIRE_FALSE(p.forced_fallback);
    REQUIRE(validate_completeness(p).empty());
    REQUIRE(stub.seen().size() == 6);

    // the log carries the parsed outputs, so the run replays without the
    // endpoint; the engine does not record transport details
    bool support_recorded = false;
    for (const auto& e : log.events())
        if (e.type == "contribution_recorded" &&
            e.payload.at("author") == "d2")
            support_recorded = true;
    REQUIRE(support_recorded);
}
