import pytest

from hogpred.law import XTCL_RANK, get_law, parse_law
from hogpred.syntax import Universe, close_universe
from hogpred.wtcheck import FAIL, INCONCLUSIVE, PASS, respects_weak_check, sn_theorem_report

LOOP = "law loop\nflag deterministic\nop f 0 : unit => unit\nrule f: => step f(arg0)\n"


def test_cbn_respects_weak_transitions(small_universe):
    rep = respects_weak_check("xtcl-cbn", small_universe, n_max=3)
    assert rep.verdict == PASS
    assert rep.checked == 4 * len(small_universe)


def test_cbv_does_not(small_universe):
    rep = respects_weak_check("xtcl-cbv", small_universe, n_max=3)
    assert rep.verdict == FAIL
    bad = rep.counterexamples[0]
    assert bad["op"] == "app" and bad["n"] >= 1


def test_cbv_passes_at_n_zero(small_universe):
    assert respects_weak_check("xtcl-cbv", small_universe, n_max=0).verdict == PASS


def test_small_k_is_inconclusive(small_universe):
    rep = respects_weak_check("xtcl-cbn", small_universe, n_max=3, k_max=1)
    assert rep.verdict == INCONCLUSIVE
    assert rep.inconclusive


def test_nondeterministic_law_rejected(small_universe):
    with pytest.raises(ValueError):
        respects_weak_check("xtcl-nd", small_universe)


def test_sn_report_cbn(small_universe):
    rep = sn_theorem_report("xtcl-cbn", XTCL_RANK, small_universe)
    assert rep["certified"]
    assert rep["verdict"].startswith("strongly normalizing")
    assert rep["failed_conditions"] == []
    assert rep["confirmation"]["all_terminate"]


def test_sn_report_cbv_fails_weak_respect():
    law = get_law("xtcl-cbv")
    u = Universe.build(4, 3)
    close_universe(u, law.gamma)
    assert u.freeze().is_closed
    rep = sn_theorem_report(law, XTCL_RANK, u)
    assert not rep["certified"]
    assert rep["failed_conditions"] == ["respects_weak_transitions"]
    # the conclusion still holds empirically
    assert rep["confirmation"]["all_terminate"]


def test_sn_report_nd_not_applicable(small_universe):
    rep = sn_theorem_report("xtcl-nd", XTCL_RANK, small_universe)
    assert rep["verdict"] == "not applicable"


def test_sn_report_loop_fixture():
    law = get_law(parse_law(LOOP, "loop"))
    u = Universe.build(3, 2, law.spec.signature)
    close_universe(u, law.gamma)
    u.freeze()
    rank = dict(XTCL_RANK, f=1)
    rep = sn_theorem_report(law, rank, u, fuel=100)
    assert not rep["certified"]
    assert "simple" in rep["failed_conditions"]
    assert rep["confirmation"]["diverging_witnesses"]
    assert not rep["confirmation"]["all_terminate"]
