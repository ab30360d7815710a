"""End-to-end smoke tests for the python bindings."""

import json
import os

import pytest

import svan

CORPUS = os.environ.get("SVAN_CORPUS", os.path.join(os.path.dirname(__file__), "..", "..", "corpus"))


def fixture(name):
    with open(os.path.join(CORPUS, name), encoding="utf-8") as fh:
        return svan.parse_lts(fh.read())


def fixture_text(name):
    with open(os.path.join(CORPUS, name), encoding="utf-8") as fh:
        return fh.read()


def test_parse_and_roundtrip():
    lts = fixture("fig4_s2.json")
    assert lts.states == ["u0", "u1", "u2"]
    assert lts.initial == "u0"
    again = svan.parse_lts(lts.to_json())
    assert again == lts
    assert "doublecircle" in lts.to_dot()


def test_validate_and_mirror():
    lts = fixture("fig1_s1.json")
    assert svan.validate(lts) == []
    assert svan.mirror(svan.mirror(lts)) == lts


def test_tau_reduce_folds_internal_choice():
    reduced = svan.tau_reduce(fixture("fig3_s1p.json"))
    assert reduced == fixture("fig3_s1.json")


def test_products_and_deadlocks():
    stuck = svan.sync_product([fixture("fig4_s1.json"), fixture("fig4_s2.json")])
    reports = svan.deadlocks(stuck)
    assert len(reports) == 1
    assert reports[0]["state"] == "<s1,u1>"
    assert not svan.final_reachable(stuck)["holds"]

    fine = svan.sync_product([fixture("fig4_s1p.json"), fixture("fig4_s2.json")])
    assert svan.deadlocks(fine) == []
    assert svan.final_reachable(fine)["holds"]

    boxed = svan.async_product([fixture("fig4_s1p.json"), fixture("fig4_s2.json")], bound=1)
    assert boxed.size == 5
    assert json.loads(boxed.to_json())["initial"].startswith("<")


def test_equivalences():
    t1, t2 = fixture("fig5a_t1.json"), fixture("fig5a_t2.json")
    assert svan.trace_equivalent(t1, t2)["holds"]
    assert not svan.bisimilar(t1, t2, "strong")["holds"]

    u1, u2 = fixture("fig5b_u1.json"), fixture("fig5b_u2.json")
    assert svan.trace_equivalent(u1, u2, observable_only=True)["holds"]
    assert not svan.bisimilar(u1, u2, "weak")["holds"]


def test_compatibility():
    s1, s2 = fixture("fig1_s1.json"), fixture("fig1_s2.json")
    verdict = svan.check_compat(s1, s2, "ur")
    assert not verdict["holds"]
    assert verdict["evidence"]["unmatched"] == "c!"

    degrees = svan.compat_degree(fixture("fig4_s1.json"), fixture("fig4_s2.json"))
    assert degrees["converged"]
    assert all(0.0 <= cell <= 1.0 for row in degrees["degrees"] for cell in row)
    assert degrees["degrees"][0][0] < 1.0


def test_adaptation():
    contract = svan.parse_contract(fixture_text("sql_contract.txt"))
    services = {"s": fixture("sql_service.json"), "c": fixture("sql_client.json")}
    adaptor = svan.synthesize_adaptor(services, contract)
    assert svan.verify_adaptation(services, adaptor.lts)["holds"]
    assert "V1" in adaptor.to_json()

    broken = svan.parse_contract("services: s, c\nV1 = <s:req?X; c:request!X>\nV3 = <s:halt?>\n")
    with pytest.raises(svan.SvanError):
        svan.synthesize_adaptor(services, broken)


def test_choreography():
    right = svan.parse_diagram(fixture_text("fig7_right.json"))
    left = svan.parse_diagram(fixture_text("fig7_left.json"))
    assert svan.realizable(right, "sync")["holds"]
    async_verdict = svan.realizable(right, "async", bound=1)
    assert not async_verdict["holds"]
    assert [e["msg"] for e in async_verdict["violation"]] == ["update", "request"]
    assert not svan.realizable(left, "sync")["holds"]

    impls = {p: svan.project(right, p) for p in right.peers}
    assert svan.conformance(right, impls, "sync")["holds"]


def test_errors_surface_as_exceptions():
    with pytest.raises(svan.SvanError):
        svan.parse_lts("{bad json")
    with pytest.raises(svan.SvanError):
        svan.parse_lts('{"states":["s0"],"initial":"s0","finals":[],"transitions":[]}')
