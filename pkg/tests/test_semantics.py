import pytest
from hypothesis import given, settings, strategies as st

from hogpred.behaviour import Fun, Step, UnitDone
from hogpred.law import get_law, parse_law
from hogpred.semantics import (
    FUEL_EXHAUSTED, Reducing, Value, compose_gamma_n, down, down_n, gamma_n, reduce_trace, steps_to_value,
    terminates_all, weak_apply,
)
from hogpred.syntax import E, I, K, S, Universe, app, parse_term
from hogpred.types import UNIT, arrow

U, UU = UNIT, arrow(UNIT, UNIT)


# -- untyped oracle over plain tuples --------------------------------------------

def erase(t):
    return (t.op.name,) + tuple(erase(a) for a in t.args)


def _is_value(x):
    return x[0] != "app"


def _apply(f, a):
    h = f[0]
    if h == "S":
        return ("S'", a)
    if h == "S'":
        return ("S''", f[1], a)
    if h == "S''":
        return ("app", ("app", f[1], a), ("app", f[2], a))
    if h == "K":
        return ("K'", a)
    if h == "K'":
        return f[1]
    if h == "I":
        return a
    raise AssertionError(f"cannot apply {h}")


def oracle_step(x, cbv):
    if _is_value(x):
        return None
    f, a = x[1], x[2]
    if not _is_value(f):
        return ("app", oracle_step(f, cbv), a)
    if cbv and not _is_value(a):
        return ("app", f, oracle_step(a, cbv))
    return _apply(f, a)


def oracle_trace(x, cbv, fuel=10000):
    out = [x]
    while not _is_value(x) and len(out) <= fuel:
        x = oracle_step(x, cbv)
        out.append(x)
    return out


@pytest.fixture(scope="module")
def universe_5_3():
    return Universe.build(5, 3)


@pytest.mark.parametrize("name,cbv", [("xtcl-cbn", False), ("xtcl-cbv", True)])
def test_traces_match_oracle(universe_5_3, name, cbv):
    law = get_law(name)
    for t in universe_5_3.terms:
        tr = reduce_trace(law, t)
        assert tr.terminated
        assert [erase(x) for x in tr.terms] == oracle_trace(erase(t), cbv)


def test_golden_trace():
    t = parse_term("(app S[unit,(-> unit unit),unit] K[unit,(-> unit unit)] K[unit,unit] e)")
    tr = reduce_trace("xtcl-cbn", t)
    assert tr.steps == 5
    assert tr.last is E()
    assert tr.final is UnitDone
    assert [erase(x) for x in tr.terms] == oracle_trace(erase(t), False)


def test_fuel_exhaustion():
    t = app(S(U, UU, U), K(U, UU), K(U, U), E())
    tr = reduce_trace("xtcl-cbn", t, fuel=2)
    assert tr.outcome == "fuel"
    assert tr.steps == 2
    assert not tr.terminated


def test_gamma_n_injections(cbn):
    t = app(I(U), E())
    assert gamma_n(cbn, t, 0) == Reducing(t)
    assert gamma_n(cbn, t, 1) == Reducing(E())
    assert gamma_n(cbn, t, 2) == Value(UnitDone)
    assert gamma_n(cbn, t, 7) == Value(UnitDone)


def test_steps_to_value(cbn):
    assert steps_to_value(cbn, app(I(U), E())) == 1
    assert steps_to_value(cbn, K(U, U)) == 0
    assert steps_to_value(cbn, app(S(U, UU, U), K(U, UU), K(U, U), E()), fuel=3) is None


def test_down_n_is_monotone(small_universe, cbn):
    prev = None
    for n in range(0, 8):
        cur = down_n(cbn, small_universe, n)
        if prev is not None:
            assert prev.leq(cur)
        prev = cur
    assert down_n(cbn, small_universe, 0).count() == 0
    assert down(cbn, small_universe).is_full()


@settings(max_examples=150, deadline=None)
@given(st.data(), st.integers(0, 6), st.integers(0, 6))
def test_composition_law(small_universe, cbn, data, m, n):
    t = data.draw(st.sampled_from(small_universe.terms))
    assert compose_gamma_n(cbn, t, m, n) == gamma_n(cbn, t, m + n)


def test_weak_apply():
    law = get_law("xtcl-cbn")
    f = app(K(UU, U), I(U))
    assert weak_apply(law, f, E()) is I(U)
    assert weak_apply(law, app(S(U, UU, U), K(U, UU), K(U, U)), E(), fuel=1) is FUEL_EXHAUSTED
    with pytest.raises(ValueError):
        weak_apply(law, E(), E())


def test_labelled_behaviour_is_a_function(cbn):
    b = cbn.gamma(K(U, U))
    assert isinstance(b, Fun)
    assert b(E()).args == (E(),)


def nd_successors(x):
    # every reduct of a single redex, anywhere outside operator arguments
    if _is_value(x):
        return []
    f, a = x[1], x[2]
    out = [("app", g, a) for g in nd_successors(f)] + [("app", f, b) for b in nd_successors(a)]
    if _is_value(f):
        out.append(_apply(f, a))
    return out


def _longest(x, memo):
    if x not in memo:
        memo[x] = max((1 + _longest(y, memo) for y in nd_successors(x)), default=0)
    return memo[x]


def test_nd_successors_match_oracle(universe_5_3):
    law = get_law("xtcl-nd")
    for t in universe_5_3.terms[:2000]:
        b = law.gamma(t)
        got = sorted(erase(s.target) for s in b if isinstance(s, Step))
        assert got == sorted(set(nd_successors(erase(t))))


def test_nd_all_traces_terminate(universe_5_3):
    law = get_law("xtcl-nd")
    memo = {}
    for t in universe_5_3.terms:
        res = terminates_all(law, t, fuel=1000)
        assert res.terminates
        assert res.max_depth == _longest(erase(t), memo)


def test_cycle_detection():
    law = get_law(parse_law("law loop\nflag deterministic\nop f 0 : unit => unit\nrule f: => step f(arg0)\n", "loop"))
    t = parse_term("f(e)", law.spec.signature)
    res = terminates_all(law, t)
    assert not res.terminates and res.outcome == "cycle"
    assert reduce_trace(law, t, fuel=50).outcome == "fuel"
