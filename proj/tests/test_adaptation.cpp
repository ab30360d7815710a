#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "svan/adaptation.hpp"
#include "svan/composition.hpp"
#include "svan/equivalences.hpp"

using namespace svan;

namespace {

Contract sql_contract() {
    return parse_contract(test::read_file(test::corpus_path("sql_contract.txt")));
}

std::vector<std::pair<std::string, Lts>> sql_services() {
    return {{"s", test::corpus("sql_service.json")}, {"c", test::corpus("sql_client.json")}};
}

} // namespace

TEST_CASE("contract parsing: binary vector with a shared variable") {
    Contract c = parse_contract("services: s, c\nV1 = <s:req?X; c:request!X>\n");
    REQUIRE(c.vectors.size() == 1);
    REQUIRE(c.vectors[0].entries.size() == 2);
    CHECK(c.vectors[0].entries[0].service == "s");
    CHECK(c.vectors[0].entries[0].label.message == "req");
    CHECK(c.vectors[0].entries[0].label.dir == Direction::reception);
    CHECK(c.vectors[0].entries[0].label.params == std::vector<std::string>{"X"});
    CHECK(c.vectors[0].entries[1].label.params == std::vector<std::string>{"X"});
}

TEST_CASE("contract parsing: unary vector") {
    Contract c = parse_contract("services: s\nV3 = <s:halt?>\n");
    REQUIRE(c.vectors.size() == 1);
    CHECK(c.vectors[0].entries.size() == 1);
    CHECK(c.vectors[0].entries[0].label.params.empty());
}

TEST_CASE("contract parsing: rejects a service named twice in one vector") {
    CHECK_THROWS_WITH_AS(parse_contract("services: s\nV1 = <s:a!X; s:b?X>\n"),
                         doctest::Contains("twice"), SemanticError);
}

TEST_CASE("contract parsing: rejects undeclared services and bad syntax") {
    CHECK_THROWS_AS(parse_contract("services: s\nV1 = <c:a!X>\n"), SemanticError);
    CHECK_THROWS_AS(parse_contract("services: s\nV1 = s:a!X\n"), ParseError);
    CHECK_THROWS_AS(parse_contract("V1 = <s:a!X>\n"), Error);
}

TEST_CASE("contract round-trip through the text form") {
    Contract c = sql_contract();
    Contract again = parse_contract(serialize_contract(c));
    CHECK(again.services == c.services);
    REQUIRE(again.vectors.size() == c.vectors.size());
    for (size_t i = 0; i < c.vectors.size(); ++i) {
        CHECK(again.vectors[i].name == c.vectors[i].name);
        CHECK(again.vectors[i].entries == c.vectors[i].entries);
    }
}

TEST_CASE("sql adaptor: relays the request, the reply, and can halt the service") {
    AdaptorLts a = synthesize_adaptor(sql_services(), sql_contract());

    for (const Label& l : a.lts.alphabet) CHECK(!l.is_tau());
    CHECK(validate(a.lts).empty());

    // the adaptor's first step is receiving the client's request
    detail::Indexed ix = detail::index_lts(a.lts);
    std::set<std::string> initial_actions;
    for (auto [li, tgt] : ix.out[static_cast<size_t>(ix.initial)]) {
        (void)tgt;
        initial_actions.insert(ix.labels[static_cast<size_t>(li)].str());
    }
    CHECK(initial_actions == std::set<std::string>{"request?(X)"});

    std::set<std::string> actions;
    for (const Label& l : a.lts.alphabet) actions.insert(l.str());
    CHECK(actions == std::set<std::string>{"request?(X)", "req!(X)", "result?(Y,Z)",
                                           "request!(Z)", "halt!"});

    // no non-final sinks: deadlock suppression leaves every state co-reachable
    std::set<std::string> sinks;
    for (const std::string& s : a.lts.states) {
        bool has_out = false;
        for (const Transition& t : a.lts.transitions) has_out |= t.from == s;
        if (!has_out) sinks.insert(s);
    }
    for (const std::string& s : sinks) CHECK(a.lts.is_final(s));

    CHECK(verify_adaptation(sql_services(), a.lts).holds);
}

TEST_CASE("sql adaptor: annotations name the vector and service per transition") {
    AdaptorLts a = synthesize_adaptor(sql_services(), sql_contract());
    for (const Transition& t : a.lts.transitions) {
        auto it = a.annotations.find(t);
        REQUIRE(it != a.annotations.end());
        CHECK((it->second.first == "V1" || it->second.first == "V2" ||
               it->second.first == "V3"));
    }
    std::string j = to_json(a);
    CHECK(j.find("\"vector\": \"V1\"") != std::string::npos);
    CHECK(j.find("\"service\": \"s\"") != std::string::npos);
}

TEST_CASE("variable causality: every emission's variables are bound upstream") {
    AdaptorLts a = synthesize_adaptor(sql_services(), sql_contract());
    detail::Indexed ix = detail::index_lts(a.lts);
    // walk every path up to a depth bound, tracking bound variables
    struct Frame { int state; std::set<std::string> bound; int depth; };
    std::vector<Frame> stack{{ix.initial, {}, 0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.depth > 12) continue;
        for (auto [li, tgt] : ix.out[static_cast<size_t>(f.state)]) {
            const Label& l = ix.labels[static_cast<size_t>(li)];
            std::set<std::string> bound = f.bound;
            if (l.is_reception()) {
                bound.insert(l.params.begin(), l.params.end());
            } else {
                for (const std::string& v : l.params) CHECK(bound.count(v));
            }
            stack.push_back({tgt, std::move(bound), f.depth + 1});
        }
    }
}

TEST_CASE("dropping the reply vector makes the contract unadaptable") {
    Contract c = sql_contract();
    c.vectors.erase(c.vectors.begin() + 1);  // V2
    CHECK_THROWS_WITH_AS(synthesize_adaptor(sql_services(), c), doctest::Contains("final"),
                         AnalysisError);
}

TEST_CASE("deleting the synthesized reply relay leaves the client pending") {
    AdaptorLts a = synthesize_adaptor(sql_services(), sql_contract());
    Lts cut = a.lts;
    std::erase_if(cut.transitions, [&](const Transition& t) {
        auto it = a.annotations.find(t);
        return it != a.annotations.end() && it->second.first == "V2" &&
               t.label.is_emission();
    });
    cut = normalize(cut);
    Verdict v = verify_adaptation(sql_services(), cut);
    CHECK(!v.holds);
    // the stuck client is waiting on its reply
    REQUIRE(v.evidence.contains("pending"));
    bool client_waits = false;
    for (const auto& l : v.evidence["pending"]["c"])
        if (l == "request?(Str)") client_waits = true;
    CHECK(client_waits);
}

TEST_CASE("an empty contract over services that must interact is unadaptable") {
    Contract c = parse_contract("services: s, c\n");
    CHECK_THROWS_AS(synthesize_adaptor(sql_services(), c), AnalysisError);
}

TEST_CASE("identity vectors produce the mirror-relay pipeline") {
    Lts a = test::build("a0", {"a1"}, {{"a0", "m!(Str)", "a1"}});
    Lts b = test::build("b0", {"b1"}, {{"b0", "m?(Str)", "b1"}});
    Contract c = parse_contract("services: a, b\nV1 = <a:m!x; b:m?x>\n");
    AdaptorLts adaptor = synthesize_adaptor({{"a", a}, {"b", b}}, c);

    Lts by_hand = test::build("r0", {"r2"}, {{"r0", "m?(x)", "r1"}, {"r1", "m!(x)", "r2"}});
    CHECK(bisimilar(adaptor.lts, by_hand, BisimKind::branching).holds);
    CHECK(verify_adaptation({{"a", a}, {"b", b}}, adaptor.lts).holds);
}

TEST_CASE("an adaptor with nothing to do passes when everyone starts final") {
    Lts idle_a = test::build("a0", {"a0"}, {});
    Lts idle_b = test::build("b0", {"b0"}, {});
    Lts empty_adaptor = test::build("r0", {"r0"}, {});
    CHECK(verify_adaptation({{"a", idle_a}, {"b", idle_b}}, empty_adaptor).holds);
}

TEST_CASE("synthesis soundness across the adaptation corpus") {
    // every synthesized adaptor passes the closed-system verification
    {
        AdaptorLts a = synthesize_adaptor(sql_services(), sql_contract());
        CHECK(verify_adaptation(sql_services(), a.lts).holds);
    }
    {
        Lts p = test::corpus("fig4_s1p.json");
        Lts q = test::corpus("fig4_s2.json");
        Contract c = parse_contract("services: p, q\nV1 = <p:a!; q:a?>\nV2 = <q:c!; p:c?>\n");
        AdaptorLts adaptor = synthesize_adaptor({{"p", p}, {"q", q}}, c);
        CHECK(verify_adaptation({{"p", p}, {"q", q}}, adaptor.lts).holds);
        for (const Label& l : adaptor.lts.alphabet) CHECK(!l.is_tau());
    }
    {
        // a service with an internal step: the fold removes the adaptor's tau
        Lts svc = test::build("s0", {"s2"}, {{"s0", "tau", "s1"}, {"s1", "m!", "s2"}});
        Lts cli = test::build("c0", {"c1"}, {{"c0", "m?", "c1"}});
        Contract c = parse_contract("services: s, c\nV1 = <s:m!; c:m?>\n");
        AdaptorLts adaptor = synthesize_adaptor({{"s", svc}, {"c", cli}}, c);
        for (const Label& l : adaptor.lts.alphabet) CHECK(!l.is_tau());
        CHECK(verify_adaptation({{"s", svc}, {"c", cli}}, adaptor.lts).holds);
    }
}

TEST_CASE("contract referencing a message outside the service alphabet is rejected") {
    Contract c = parse_contract("services: s, c\nV1 = <s:nosuch?X; c:request!X>\n");
    CHECK_THROWS_AS(synthesize_adaptor(sql_services(), c), SemanticError);
}
