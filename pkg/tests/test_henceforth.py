import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hogpred import _kernels_py, kernels
from hogpred.henceforth import (
    ConvergenceError, banach_iterates, direct_table, henceforth, henceforth_rel, henceforth_rel_info,
    henceforth_rel_symbolic, type_range_bound, up_to_box_check,
)
from hogpred.law import XTCL_RANK
from hogpred.predicates import Predicate, invariant_check
from hogpred.semantics import down
from hogpred.tables import build_tables

seeds = st.integers(0, 2**32 - 1)


def rand(u, seed):
    rng = np.random.default_rng(seed)
    return Predicate.random(u, rng, rng.uniform(0.3, 1.0))


@settings(max_examples=40, deadline=None)
@given(seeds, seeds)
def test_kernel_matches_symbolic_route(small_universe, cbn, a, b):
    S, P = rand(small_universe, a), rand(small_universe, b)
    G, _ = henceforth_rel_info(cbn, small_universe, S, P)
    H, _ = henceforth_rel_symbolic(cbn, small_universe, S, P)
    assert G == H


@settings(max_examples=40, deadline=None)
@given(seeds, seeds)
def test_relative_henceforth_is_greatest_invariant(small_universe, cbn, a, b):
    u = small_universe
    S, P = rand(u, a), rand(u, b)
    G = henceforth_rel(cbn, u, S, P)
    assert G.leq(P)
    assert invariant_check(cbn, u, S, G).holds
    # any invariant below P sits below G; take one as the union with G
    Q = henceforth_rel(cbn, u, S, P & rand(u, a ^ b))
    assert Q.leq(G)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_banach_iteration_contracts(small_universe, cbn, a):
    u = small_universe
    P = rand(u, a)
    res = henceforth(cbn, u, P)
    ds = [d.value for d in res.distances]
    for x, y in zip(ds, ds[1:]):
        assert y <= x / 2
    assert res.iterations_outer - 1 <= type_range_bound(u) + 1
    assert henceforth_rel(cbn, u, res.result, P) == res.result


@settings(max_examples=25, deadline=None)
@given(seeds, seeds)
def test_iterates_from_any_start_converge(small_universe, cbn, a, b):
    u = small_universe
    P = rand(u, a)
    fixed = henceforth(cbn, u, P).result
    its = banach_iterates(cbn, u, P, start=rand(u, b), steps=type_range_bound(u) + 2)
    assert its[-1] == fixed


def test_convergence_limit(small_universe, cbn):
    P = rand(small_universe, 3)
    if henceforth(cbn, small_universe, P).iterations_outer > 1:
        with pytest.raises(ConvergenceError):
            henceforth(cbn, small_universe, P, max_outer=1)


@pytest.mark.parametrize("kind", ["box", "plotkin", "tait"])
def test_direct_predicates_are_full(small_universe, cbn, kind):
    tab = direct_table(kind, cbn, small_universe)
    assert tab.predicate.is_full()
    assert tab.fuel_hits == 0


def test_direct_box_agrees_with_henceforth_of_down(small_universe, cbn):
    D = down(cbn, small_universe)
    assert henceforth(cbn, small_universe, D).result == direct_table("box", cbn, small_universe).predicate


def test_up_to_box_certifies(small_universe, cbn):
    rep = up_to_box_check(cbn, XTCL_RANK, small_universe, down(cbn, small_universe))
    assert rep["certified"] and rep["conclusion_confirmed_on_universe"]
    assert rep["premise_instances"] > 0


def test_up_to_box_refuses_without_flatness(small_universe, cbn):
    inverted = {k: 1 - v for k, v in XTCL_RANK.items()}
    rep = up_to_box_check(cbn, inverted, small_universe, down(cbn, small_universe))
    assert rep["certified"] is False


def test_up_to_box_finds_counterexample(small_universe, cbn):
    u = small_universe
    P = Predicate.from_fn(u, lambda t: t.op.name != "K'")
    rep = up_to_box_check(cbn, XTCL_RANK, u, P, box=Predicate.full(u))
    assert not rep["certified"]
    assert {c["op"] for c in rep["counterexamples"]} == {"K'"}


@settings(max_examples=30, deadline=None)
@given(seeds, seeds)
def test_python_and_compiled_kernels_agree(small_universe, cbn, a, b):
    tb = build_tables(cbn, small_universe)
    S, P = rand(small_universe, a), rand(small_universe, b)
    args = (tb.step_ptr, tb.step_res, tb.app_ptr, tb.app_label, tb.app_res,
            S.mask.astype(np.uint8), P.mask.astype(np.uint8))
    g1, _ = kernels.gfp_relative(*args)
    g2, _ = _kernels_py.gfp_relative(*args)
    assert np.array_equal(np.asarray(g1), np.asarray(g2))
    for fuel in (1, 3, 50):
        s1 = kernels.steps_to_value(tb.kind, tb.step1, fuel)
        s2 = _kernels_py.steps_to_value(tb.kind, tb.step1, fuel)
        assert np.array_equal(np.asarray(s1), np.asarray(s2))


def test_steps_kernel_codes():
    kind = np.array([0, 0, 1, 3, 0, 0], dtype=np.int8)
    step = np.array([1, 2, -1, -1, 5, 4], dtype=np.int64)
    for impl in (kernels, _kernels_py):
        out = list(np.asarray(impl.steps_to_value(kind, step, 10)))
        assert out == [2, 1, 0, -1, -3, -3]
        assert list(np.asarray(impl.steps_to_value(kind, step, 1)))[:3] == [-3, 1, 0]


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, HOGPRED_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from hogpred import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
