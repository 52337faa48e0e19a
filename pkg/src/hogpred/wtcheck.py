"""Weak-transition respect and the assembled strong-normalization report."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .behaviour import Fun, Step, Stuck, UnitDone
from .henceforth import ConvergenceError, henceforth
from .law import flatness_check, get_law, simplicity_check
from .semantics import DEFAULT_FUEL, Reducing, down, gamma_n, reduce_trace
from .syntax import Term, Universe, show_term
from .tables import steps_table

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class WeakRespectReport:
    law: str
    n_max: int
    k_max: int
    verdict: str
    checked: int = 0
    counterexamples: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "law": self.law,
            "n_max": self.n_max,
            "k_max": self.k_max,
            "verdict": self.verdict,
            "checked": self.checked,
            "counterexamples": self.counterexamples,
            "inconclusive": self.inconclusive,
        }


def _fed(obs):
    # a still-reducing argument is presented to the rules as a step to the term reached
    if isinstance(obs, Reducing):
        return Step(obs.term)
    return obs.behaviour


def _same_value(u: Universe, ty, a, b) -> bool:
    if a is b or a == b:
        return True
    if isinstance(a, Fun) and isinstance(b, Fun):
        return all(a(u.terms[i]) is b(u.terms[i]) for i in u.label_slice(ty.dom))
    return False


def _matches(law, u: Universe, t: Term, claim, k_max: int) -> str:
    """Is ``claim`` equal to ``γ^(k)(t)`` for some ``k <= k_max``?"""
    tr = reduce_trace(law, t, k_max)
    if isinstance(claim, Step):
        if any(x is claim.target for x in tr.terms[: k_max + 1]):
            return PASS
        return INCONCLUSIVE if tr.outcome == "fuel" else FAIL
    if claim is Stuck:
        return PASS if tr.outcome == "stuck" else (INCONCLUSIVE if tr.outcome == "fuel" else FAIL)
    if tr.outcome == "fuel" or tr.steps + 1 > k_max:
        return INCONCLUSIVE
    if not tr.terminated:
        return FAIL
    return PASS if _same_value(u, t.ty, claim, tr.final) else FAIL


def _describe(obs) -> str:
    if isinstance(obs, Step):
        return f"step {show_term(obs.target)}"
    if obs is UnitDone:
        return "done"
    if isinstance(obs, Fun):
        return "function"
    return "stuck"


def respects_weak_check(law, universe: Universe, n_max: int = 3, k_max: int = DEFAULT_FUEL,
                        limit: int = 20) -> WeakRespectReport:
    """Feed n-step observations of the arguments to the rules and compare with some k-step observation.

    Every member ``f(args)`` of the universe is an instance; arguments need not be
    members. A comparison cut by ``k_max`` is inconclusive rather than a failure.
    """
    law = get_law(law)
    if law.powerset:
        raise ValueError("weak-transition respect is defined for deterministic laws")
    scrut = law._scrutinised
    bad, unknown = [], []
    checked = 0
    for n in range(n_max + 1):
        for t in universe.terms:
            sc = scrut.get(t.op.name, ())
            args = [(a, _fed(gamma_n(law, a, n)) if i in sc else None) for i, a in enumerate(t.args)]
            claim = law.instantiate(t, args)
            checked += 1
            v = _matches(law, universe, t, claim, k_max)
            if v == PASS:
                continue
            entry = {
                "op": t.op.name,
                "term": show_term(t),
                "arguments": [show_term(a) for a in t.args],
                "n": n,
                "computed": _describe(claim),
                "reason": "no k-step observation of the term agrees" if v == FAIL else f"undecided within k_max={k_max}",
            }
            target = bad if v == FAIL else unknown
            if len(target) < limit:
                target.append(entry)
            elif v == FAIL:
                bad.append(None)
            else:
                unknown.append(None)
    bad_n = len(bad)
    verdict = FAIL if bad_n else (INCONCLUSIVE if unknown else PASS)
    return WeakRespectReport(
        law.name, n_max, k_max, verdict, checked,
        [b for b in bad if b is not None], [x for x in unknown if x is not None],
    )


def sn_theorem_report(law, rank: dict, universe: Universe, fuel: int = DEFAULT_FUEL, n_max: int = 3,
                      k_max: int | None = None) -> dict:
    """Check the rule-format conditions of the strong-normalization theorem and confirm the conclusion directly."""
    law = get_law(law)
    k_max = fuel if k_max is None else k_max
    rep: dict = {
        "law": law.name,
        "fuel": fuel,
        "universe": universe.stats(),
        "structural_conditions": "category and functor hypotheses hold for type-indexed sets; recorded, not computed",
    }
    if law.powerset:
        rep.update(verdict="not applicable", reason="the theorem concerns deterministic laws", certified=False)
        return rep
    flat = flatness_check(law.spec, rank)
    simple = simplicity_check(law.spec)
    weak = respects_weak_check(law, universe, n_max, k_max)
    D = down(law, universe, fuel)
    try:
        h = henceforth(law, universe, D)
        refinement = {"exists": True, **h.to_json(include_table=False)}
    except ConvergenceError as exc:
        refinement = {"exists": False, "error": str(exc)}
    rep["conditions"] = {
        "relatively_flat": flat.to_json(),
        "simple": simple.to_json(),
        "respects_weak_transitions": weak.to_json(),
        "locally_maximal_refinement_of_termination": refinement,
    }
    steps = steps_table(law, universe, fuel)
    diverging = [universe.terms[i] for i in np.flatnonzero(steps < 0)[:5]]
    rep["confirmation"] = {
        "terminating_members": int(D.count()),
        "members": len(universe),
        "all_terminate": bool(D.is_full()),
        "max_steps": int(steps.max()) if len(steps) else 0,
    }
    if diverging:
        rep["confirmation"]["diverging_witnesses"] = [show_term(t) for t in diverging]
    conds = flat.accepted and simple.accepted and weak.verdict == PASS and refinement["exists"]
    if conds and D.is_full():
        verdict, certified = "strongly normalizing (relative to universe and fuel)", True
    elif conds:
        verdict, certified = "conditions hold but a member does not terminate within fuel", False
    elif weak.verdict == INCONCLUSIVE and flat.accepted and simple.accepted:
        verdict, certified = "inconclusive", False
    else:
        verdict, certified = "NOT certified", False
    rep["verdict"] = verdict
    rep["certified"] = certified
    rep["failed_conditions"] = [
        name for name, ok in [
            ("relatively_flat", flat.accepted),
            ("simple", simple.accepted),
            ("respects_weak_transitions", weak.verdict == PASS),
            ("locally_maximal_refinement_of_termination", refinement["exists"]),
        ] if not ok
    ]
    return rep
