#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "svan/equivalences.hpp"
#include "svan/model.hpp"

using namespace svan;

namespace {

std::vector<std::pair<std::string, std::string>> corpus_pairs() {
    return {
        {"fig1_s1", "fig1_s1p"}, {"fig1_s1", "fig1_s2"},  {"fig1_s1p", "fig1_s2"},
        {"fig2_s1", "fig2_s1p"}, {"fig2_s1", "fig2_s2"},  {"fig2_s1p", "fig2_s2"},
        {"fig3_s1", "fig3_s1p"}, {"fig3_s1", "fig3_s2"},  {"fig3_s1p", "fig3_s2"},
        {"fig4_s1", "fig4_s1p"}, {"fig4_s1", "fig4_s2"},  {"fig4_s1p", "fig4_s2"},
        {"fig5a_t1", "fig5a_t2"}, {"fig5b_u1", "fig5b_u2"}, {"fig1_s1", "fig4_s1"},
        {"fig5a_t1", "fig5a_t1"}, {"fig3_s1p", "fig5b_u2"},
    };
}

Lts fixture(const std::string& name) { return test::corpus(name + ".json"); }

} // namespace

TEST_CASE("trace: both services produce a.b and a.c") {
    Verdict v = trace_equivalent(fixture("fig5a_t1"), fixture("fig5a_t2"));
    CHECK(v.holds);
}

TEST_CASE("strong: external vs internal resolution of the choice") {
    Verdict v = bisimilar(fixture("fig5a_t1"), fixture("fig5a_t2"), BisimKind::strong);
    CHECK(!v.holds);
}

TEST_CASE("weak traces: the tau branch does not change the trace set") {
    Verdict v = trace_equivalent(fixture("fig5b_u1"), fixture("fig5b_u2"), true);
    CHECK(v.holds);
}

TEST_CASE("weak: the tau branch discards the b option") {
    Verdict v = bisimilar(fixture("fig5b_u1"), fixture("fig5b_u2"), BisimKind::weak);
    CHECK(!v.holds);
}

TEST_CASE("trace: shortest distinguishing trace a! then b?") {
    Verdict v = trace_equivalent(fixture("fig4_s1"), fixture("fig4_s1p"));
    CHECK(!v.holds);
    CHECK(v.evidence["trace"] == nlohmann::json::array({"a!", "b?"}));
    CHECK(v.evidence["in"] == "l1");
}

TEST_CASE("reflexivity: every fixture is equivalent to itself under every relation") {
    for (const auto& [name, l] : test::figure_corpus()) {
        CAPTURE(name);
        CHECK(trace_equivalent(l, l).holds);
        CHECK(trace_equivalent(l, l, true).holds);
        for (BisimKind k : {BisimKind::strong, BisimKind::weak, BisimKind::branching})
            CHECK(bisimilar(l, l, k).holds);
    }
}

TEST_CASE("symmetry: verdicts are invariant under argument swap") {
    for (const auto& [a, b] : corpus_pairs()) {
        CAPTURE(a + " vs " + b);
        Lts l1 = fixture(a), l2 = fixture(b);
        CHECK(trace_equivalent(l1, l2).holds == trace_equivalent(l2, l1).holds);
        for (BisimKind k : {BisimKind::strong, BisimKind::weak, BisimKind::branching})
            CHECK(bisimilar(l1, l2, k).holds == bisimilar(l2, l1, k).holds);
    }
}

TEST_CASE("hierarchy: strong => branching => weak => weak-trace on all corpus pairs") {
    for (const auto& [a, b] : corpus_pairs()) {
        CAPTURE(a + " vs " + b);
        Lts l1 = fixture(a), l2 = fixture(b);
        bool strong = bisimilar(l1, l2, BisimKind::strong).holds;
        bool branching = bisimilar(l1, l2, BisimKind::branching).holds;
        bool weak = bisimilar(l1, l2, BisimKind::weak).holds;
        bool wtrace = trace_equivalent(l1, l2, true).holds;
        if (strong) CHECK(branching);
        if (branching) CHECK(weak);
        if (weak) CHECK(wtrace);
    }
}

TEST_CASE("tau-free inputs: the three bisimulations coincide") {
    for (const auto& [a, b] : corpus_pairs()) {
        Lts l1 = fixture(a), l2 = fixture(b);
        bool has_tau = false;
        for (const Label& l : l1.alphabet) has_tau |= l.is_tau();
        for (const Label& l : l2.alphabet) has_tau |= l.is_tau();
        if (has_tau) continue;
        CAPTURE(a + " vs " + b);
        bool strong = bisimilar(l1, l2, BisimKind::strong).holds;
        CHECK(strong == bisimilar(l1, l2, BisimKind::weak).holds);
        CHECK(strong == bisimilar(l1, l2, BisimKind::branching).holds);
    }
}

TEST_CASE("final-state splitter: systems differing only in finals are separated") {
    // same transition structure, one extra final state
    Lts a = fixture("fig1_s1p");  // finals {s1, s2}
    Lts b = fixture("fig4_s1p");  // finals {s2}
    CHECK(trace_equivalent(a, b).holds);  // traces ignore termination
    for (BisimKind k : {BisimKind::strong, BisimKind::weak, BisimKind::branching})
        CHECK(!bisimilar(a, b, k).holds);
}

TEST_CASE("tau_reduce: fold preserves weak traces; branching survives only inert tau") {
    // inert tau: a linear internal step with no alternative
    Lts linear = test::build("s0", {"s3"},
                             {{"s0", "a!", "s1"}, {"s1", "tau", "s2"}, {"s2", "b!", "s3"}});
    CHECK(bisimilar(linear, tau_reduce(linear), BisimKind::branching).holds);
    CHECK(oracle::naive_bisimilar(linear, tau_reduce(linear), oracle::Kind::branching));

    // non-inert tau (an internal choice): the fold is weak-trace equivalent but
    // not branching equivalent -- the folded system cannot commit silently
    Lts choice = fixture("fig3_s1p");
    Lts folded = tau_reduce(choice);
    CHECK(trace_equivalent(choice, folded, true).holds);
    bool oracle_branching = oracle::naive_bisimilar(choice, folded, oracle::Kind::branching);
    CHECK(bisimilar(choice, folded, BisimKind::branching).holds == oracle_branching);
    CHECK(!oracle_branching);

    for (const auto& [name, l] : test::figure_corpus()) {
        CAPTURE(name);
        CHECK(trace_equivalent(l, tau_reduce(l), true).holds);
    }
}

TEST_CASE("oracle agreement: naive fixpoint vs partition refinement on all pairs") {
    auto pairs = corpus_pairs();
    // also pit every fixture against its tau-reduced form
    for (const auto& [name, l] : test::figure_corpus()) {
        (void)l;
        pairs.push_back({name, name});
    }
    for (const auto& [a, b] : pairs) {
        CAPTURE(a + " vs " + b);
        Lts l1 = fixture(a), l2 = fixture(b);
        CHECK(bisimilar(l1, l2, BisimKind::strong).holds ==
              oracle::naive_bisimilar(l1, l2, oracle::Kind::strong));
        CHECK(bisimilar(l1, l2, BisimKind::weak).holds ==
              oracle::naive_bisimilar(l1, l2, oracle::Kind::weak));
        CHECK(bisimilar(l1, l2, BisimKind::branching).holds ==
              oracle::naive_bisimilar(l1, l2, oracle::Kind::branching));
    }
}

TEST_CASE("oracle agreement on random systems") {
    test::Rng rng(99);
    for (int i = 0; i < 60; ++i) {
        Lts l1 = test::random_lts(rng, 4);
        Lts l2 = test::random_lts(rng, 4);
        CAPTURE(serialize_lts(l1));
        CAPTURE(serialize_lts(l2));
        CHECK(bisimilar(l1, l2, BisimKind::strong).holds ==
              oracle::naive_bisimilar(l1, l2, oracle::Kind::strong));
        CHECK(bisimilar(l1, l2, BisimKind::weak).holds ==
              oracle::naive_bisimilar(l1, l2, oracle::Kind::weak));
        CHECK(bisimilar(l1, l2, BisimKind::branching).holds ==
              oracle::naive_bisimilar(l1, l2, oracle::Kind::branching));
    }
}

TEST_CASE("transitivity spot-check on a trace-equivalent triple") {
    Lts t1 = fixture("fig5a_t1");
    Lts t2 = fixture("fig5a_t2");
    // a renamed copy of t1: same behaviour, different state identifiers
    Lts t3 = test::build("x0", {"x2"},
                         {{"x0", "a?", "x1"}, {"x1", "b?", "x2"}, {"x1", "c?", "x2"}});
    std::vector<Lts> triple{t1, t2, t3};
    for (const Lts& a : triple)
        for (const Lts& b : triple)
            for (const Lts& c : triple) {
                if (trace_equivalent(a, b).holds && trace_equivalent(b, c).holds)
                    CHECK(trace_equivalent(a, c).holds);
                for (BisimKind k : {BisimKind::strong, BisimKind::weak, BisimKind::branching})
                    if (bisimilar(a, b, k).holds && bisimilar(b, c, k).holds)
                        CHECK(bisimilar(a, c, k).holds);
            }
    CHECK(bisimilar(t1, t3, BisimKind::strong).holds);
}

TEST_CASE("failing bisimulation verdicts carry a separating experiment") {
    Verdict v = bisimilar(fixture("fig5a_t1"), fixture("fig5a_t2"), BisimKind::strong);
    REQUIRE(!v.holds);
    CHECK(!v.evidence["experiment"].empty());
    // the experiment starts with the only shared action
    CHECK(v.evidence["experiment"][0] == "a?");
}

TEST_CASE("holding verdicts carry the stable partition") {
    Verdict v = bisimilar(fixture("fig5a_t1"), fixture("fig5a_t1"), BisimKind::strong);
    REQUIRE(v.holds);
    CHECK(v.evidence["partition"].size() == 6);  // both copies, three states each
}
