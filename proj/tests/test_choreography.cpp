#include <doctest.h>

#include "helpers.hpp"
#include "svan/choreography.hpp"
#include "svan/composition.hpp"

using namespace svan;

namespace {

CollaborationDiagram diagram(const std::string& name) {
    return parse_diagram(test::read_file(test::corpus_path(name + ".json")));
}

} // namespace

TEST_CASE("diagram parsing and validation") {
    CollaborationDiagram cd = diagram("fig7_right");
    CHECK(cd.peers == std::vector<std::string>{"A", "B", "C"});
    REQUIRE(cd.events.size() == 2);
    CHECK(cd.events[0].msg == "request");
    CHECK(cd.events[1].msg == "update");

    CHECK_THROWS_AS(parse_diagram(R"({"peers":["A","B"],"events":[
        {"seq":2,"from":"A","to":"B","msg":"m"}]})"),
                    SemanticError);
    CHECK_THROWS_AS(parse_diagram(R"({"peers":["A"],"events":[
        {"seq":1,"from":"A","to":"A","msg":"m"}]})"),
                    SemanticError);
    CHECK_THROWS_AS(parse_diagram(R"({"peers":["A"],"events":[
        {"seq":1,"from":"A","to":"B","msg":"m"}]})"),
                    SemanticError);
    CHECK_THROWS_AS(parse_diagram("nope"), ParseError);
}

TEST_CASE("projection: sender emits, receiver consumes, last state final") {
    Lts a = project(diagram("fig7_right"), "A");
    REQUIRE(a.transitions.size() == 2);
    CHECK(a.transitions[0].label.str() == "request!");
    CHECK(a.transitions[1].label.str() == "update?");
    CHECK(a.finals.size() == 1);

    Lts c = project(diagram("fig7_left"), "C");
    REQUIRE(c.transitions.size() == 1);
    CHECK(c.transitions[0].label.str() == "update!");
}

TEST_CASE("projection: uninvolved peer yields the one-state final system") {
    CollaborationDiagram cd = parse_diagram(R"({"peers":["A","B","E"],"events":[
        {"seq":1,"from":"A","to":"B","msg":"m"}]})");
    Lts e = project(cd, "E");
    CHECK(e.states.size() == 1);
    CHECK(e.transitions.empty());
    CHECK(e.is_final(e.initial));
    CHECK_THROWS_AS(project(cd, "Z"), SemanticError);
}

TEST_CASE("realizability: uncoordinated senders cannot respect the order") {
    RealizabilityVerdict v = realizable(diagram("fig7_left"), CommMode::sync);
    CHECK(!v.holds);
    REQUIRE(v.violation.size() == 2);
    CHECK(v.violation[0].msg == "update");
    CHECK(v.violation[1].msg == "request");
}

TEST_CASE("realizability: rendezvous does order the right-hand diagram") {
    CHECK(realizable(diagram("fig7_right"), CommMode::sync).holds);
}

TEST_CASE("realizability: mailboxes break the order of the right-hand diagram") {
    RealizabilityVerdict v = realizable(diagram("fig7_right"), CommMode::async, 1);
    CHECK(!v.holds);
    REQUIRE(v.violation.size() == 2);
    CHECK(v.violation[0].msg == "update");
    CHECK(v.violation[1].msg == "request");
}

TEST_CASE("realizability: a single exchange is realizable in both modes") {
    CollaborationDiagram cd = parse_diagram(R"({"peers":["A","B"],"events":[
        {"seq":1,"from":"A","to":"B","msg":"m"}]})");
    CHECK(realizable(cd, CommMode::sync).holds);
    CHECK(realizable(cd, CommMode::async, 1).holds);
}

TEST_CASE("the specified sequence itself always replays under sync composition") {
    for (const char* name : {"fig7_left", "fig7_right"}) {
        CAPTURE(name);
        CollaborationDiagram cd = diagram(name);
        std::vector<Lts> peers;
        std::map<std::string, int> index;
        for (const std::string& p : cd.peers) {
            index[p] = static_cast<int>(peers.size());
            peers.push_back(project(cd, p));
        }
        CompositeLts prod = sync_product(peers);
        Trace spec_trace;
        for (const DiagramEvent& e : cd.events)
            spec_trace.push_back(
                CompositeLabel::interaction(e.msg, index.at(e.from), index.at(e.to)));
        int end = replay(prod, spec_trace);
        REQUIRE(end >= 0);
        CHECK(prod.is_final(end));
    }
}

TEST_CASE("conformance of the projections is exactly realizability") {
    for (const char* name : {"fig7_left", "fig7_right"}) {
        CAPTURE(name);
        CollaborationDiagram cd = diagram(name);
        std::vector<std::pair<std::string, Lts>> impls;
        for (const std::string& p : cd.peers) impls.push_back({p, project(cd, p)});
        for (CommMode mode : {CommMode::sync, CommMode::async}) {
            RealizabilityVerdict r = realizable(cd, mode, 1);
            RealizabilityVerdict c = conformance(cd, impls, mode, 1);
            CHECK(r.holds == c.holds);
            CHECK(r.violation == c.violation);
        }
    }
}

TEST_CASE("conformance: swapping one peer's actions breaks the order") {
    CollaborationDiagram cd = diagram("fig7_right");
    // A expects update before sending request
    Lts swapped_a = test::build("A_0", {"A_2"},
                                {{"A_0", "update?", "A_1"}, {"A_1", "request!", "A_2"}});
    std::vector<std::pair<std::string, Lts>> impls{
        {"A", swapped_a}, {"B", project(cd, "B")}, {"C", project(cd, "C")}};
    RealizabilityVerdict v = conformance(cd, impls, CommMode::sync);
    CHECK(!v.holds);
    REQUIRE(v.violation.size() == 2);
    CHECK(v.violation[0].msg == "update");
}

TEST_CASE("conformance: an extra unspecified message shows up in the violation") {
    CollaborationDiagram cd = diagram("fig7_right");
    Lts b2 = test::build("B_0", {"B_2"}, {{"B_0", "request?", "B_1"}, {"B_1", "m2?", "B_2"}});
    Lts c2 = test::build("C_0", {"C_2"}, {{"C_0", "update!", "C_1"}, {"C_1", "m2!", "C_2"}});
    std::vector<std::pair<std::string, Lts>> impls{
        {"A", project(cd, "A")}, {"B", b2}, {"C", c2}};
    RealizabilityVerdict v = conformance(cd, impls, CommMode::sync);
    CHECK(!v.holds);
    bool has_m2 = false;
    for (const SendEvent& e : v.violation) has_m2 |= e.msg == "m2";
    CHECK(has_m2);
}

TEST_CASE("conformance: a missing peer implementation is rejected") {
    CollaborationDiagram cd = diagram("fig7_right");
    std::vector<std::pair<std::string, Lts>> impls{{"A", project(cd, "A")},
                                                   {"B", project(cd, "B")}};
    CHECK_THROWS_WITH_AS(conformance(cd, impls, CommMode::sync), doctest::Contains("peer"),
                         SemanticError);
}

TEST_CASE("async: once unrealizable, larger bounds stay unrealizable") {
    for (const char* name : {"fig7_left", "fig7_right"}) {
        CAPTURE(name);
        CollaborationDiagram cd = diagram(name);
        bool previous_false = false;
        for (int bound : {1, 2, 3}) {
            bool holds = realizable(cd, CommMode::async, bound).holds;
            if (previous_false) CHECK(!holds);
            previous_false = previous_false || !holds;
        }
    }
}

TEST_CASE("verdict json carries mode, bound and the violation trace") {
    auto j = to_json(realizable(diagram("fig7_right"), CommMode::async, 1));
    CHECK(j["holds"] == false);
    CHECK(j["mode"] == "async");
    CHECK(j["bound"] == 1);
    CHECK(j["violation"].size() == 2);
    CHECK(j["violation"][0]["msg"] == "update");
}
