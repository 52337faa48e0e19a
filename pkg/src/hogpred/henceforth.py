"""Relative henceforth, its logical refinement by Banach iteration, and three direct SN predicates."""

from __future__ import annotations

from dataclasses import dataclass, field


from .law import flatness_check, get_law
from .predicates import Predicate, distance, lift_preimage
from .semantics import DEFAULT_FUEL, FUEL_EXHAUSTED, reduce_trace, weak_apply
from .syntax import APP_OP, Term, Universe, show_term
from .tables import build_tables, gfp
from .types import Arrow, show_type


class ConvergenceError(RuntimeError):
    pass


def henceforth_rel_info(law, universe: Universe, S: Predicate, P: Predicate) -> tuple[Predicate, int]:
    """Greatest S-relative invariant below P, with the number of descent sweeps."""
    G, sweeps = gfp(law, universe, S.mask, P.mask)
    return Predicate(universe, G.astype(bool)), int(sweeps)


def henceforth_rel(law, universe: Universe, S: Predicate, P: Predicate) -> Predicate:
    return henceforth_rel_info(law, universe, S, P)[0]


def henceforth_rel_symbolic(law, universe: Universe, S: Predicate, P: Predicate) -> tuple[Predicate, int]:
    """Same fixed point computed from behaviours directly, without transition tables."""
    G = P
    sweeps = 0
    while True:
        sweeps += 1
        H = P & lift_preimage(law, universe, S, G)
        if H == G:
            return G, sweeps
        G = H


@dataclass
class HenceforthResult:
    result: Predicate
    iterations_outer: int
    iterations_inner: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    escapes: int = 0

    def to_json(self, include_table: bool = True) -> dict:
        out = {
            "iterations_outer": self.iterations_outer,
            "iterations_inner": self.iterations_inner,
            "distances": [d.to_json() for d in self.distances],
            "members": self.result.count(),
            "universe": len(self.result.universe),
            "full": self.result.is_full(),
            "escapes": self.escapes,
        }
        if include_table:
            out["result"] = self.result.to_json()
        return out


def type_range_bound(universe: Universe) -> int:
    return max((ty.size for ty, ids in universe.slices.items() if ids), default=1)


def henceforth(law, universe: Universe, P: Predicate, max_outer: int | None = None) -> HenceforthResult:
    """Logical refinement of P: iterate ``S -> □(S, P)`` from the full predicate to its fixed point.

    Each step is a contraction with factor 1/2 because the lifting reads S only at
    strictly smaller types, so the iteration stabilises after at most
    (largest type size + 1) steps.
    """
    law = get_law(law)
    bound = type_range_bound(universe)
    limit = bound + 2 if max_outer is None else max_outer
    S = Predicate.full(universe)
    inner, dists = [], []
    for k in range(1, limit + 1):
        nxt, sweeps = henceforth_rel_info(law, universe, S, P)
        inner.append(sweeps)
        d = distance(nxt, S)
        dists.append(d)
        if nxt == S:
            esc = build_tables(law, universe).escapes
            return HenceforthResult(nxt, k, inner, dists, esc)
        S = nxt
    raise ConvergenceError(f"no fixed point after {limit} outer iterations; the lifting is not contractive here")


def banach_iterates(law, universe: Universe, P: Predicate, start: Predicate | None = None, steps: int = 8) -> list:
    """The sequence ``S_0, S_1, ...`` of outer iterates from ``start`` (default full)."""
    S = Predicate.full(universe) if start is None else start
    out = [S]
    for _ in range(steps):
        S = henceforth_rel(law, universe, S, P)
        out.append(S)
    return out


# -- direct type-directed predicates ---------------------------------------------------


class _Direct:
    """Shared memo and fuel bookkeeping for the recursive predicates."""

    def __init__(self, law, universe: Universe, fuel: int):
        self.law = get_law(law)
        if self.law.powerset:
            raise ValueError("direct predicates need a deterministic law")
        self.u = universe
        self.fuel = fuel
        self.memo: dict[Term, bool] = {}
        self.fuel_hits = 0
        self.scratch: set = set()

    def labels(self, ty):
        return [self.u.terms[i] for i in self.u.label_slice(ty.dom)]

    def trace(self, t):
        tr = reduce_trace(self.law, t, self.fuel)
        if tr.outcome == "fuel":
            self.fuel_hits += 1
        return tr


class BoxDown(_Direct):
    """□⇓ by recursion on the type: terminate, then map good labels to good results."""

    def __call__(self, t: Term) -> bool:
        hit = self.memo.get(t)
        if hit is not None:
            return hit
        tr = self.trace(t)
        ok = tr.terminated
        if ok and isinstance(t.ty, Arrow):
            # only the value at the end of a deterministic trace carries labelled transitions
            f = tr.final
            ok = all(self(f(s)) for s in self.labels(t.ty) if self(s))
        self.memo[t] = ok
        return ok


class Plotkin(_Direct):
    """⤋ over weak transitions: ⇓(t) and ``t ⇒^s t'`` with ⤋(s) implies ⤋(t')."""

    def __call__(self, t: Term) -> bool:
        hit = self.memo.get(t)
        if hit is not None:
            return hit
        tr = self.trace(t)
        ok = tr.terminated
        if ok and isinstance(t.ty, Arrow):
            for s in self.labels(t.ty):
                if not self(s):
                    continue
                r = weak_apply(self.law, t, s, self.fuel)
                if r is FUEL_EXHAUSTED or not self(r):
                    ok = False
                    break
        self.memo[t] = ok
        return ok


class Tait(_Direct):
    """SN: ⇓(t) and SN(s) implies SN of the syntactic application ``t s``."""

    def __call__(self, t: Term) -> bool:
        hit = self.memo.get(t)
        if hit is not None:
            return hit
        ok = self.trace(t).terminated
        if ok and isinstance(t.ty, Arrow):
            for s in self.labels(t.ty):
                if not self(s):
                    continue
                ts = Term(APP_OP, (t.ty.dom, t.ty.cod), (t, s))
                if ts not in self.u.index:
                    self.scratch.add(ts)
                if not self(ts):
                    ok = False
                    break
        self.memo[t] = ok
        return ok


def box_down_direct(law, universe: Universe, t: Term, fuel: int = DEFAULT_FUEL) -> bool:
    return BoxDown(law, universe, fuel)(t)


def plotkin_pred(law, universe: Universe, t: Term, fuel: int = DEFAULT_FUEL) -> bool:
    return Plotkin(law, universe, fuel)(t)


def tait_pred(law, universe: Universe, t: Term, fuel: int = DEFAULT_FUEL) -> bool:
    return Tait(law, universe, fuel)(t)


@dataclass
class DirectTable:
    predicate: Predicate
    fuel_hits: int
    scratch_terms: int


def direct_table(kind: str, law, universe: Universe, fuel: int = DEFAULT_FUEL) -> DirectTable:
    """Tabulate one of ``"box"``, ``"plotkin"``, ``"tait"`` over the universe, sharing one memo."""
    cls = {"box": BoxDown, "plotkin": Plotkin, "tait": Tait}[kind]
    ev = cls(law, universe, fuel)
    pred = Predicate.from_fn(universe, ev)
    return DirectTable(pred, ev.fuel_hits, len(ev.scratch))


# -- induction up to henceforth ---------------------------------------------------------


def up_to_box_check(law, rank: dict, universe: Universe, P: Predicate, box: Predicate | None = None,
                    limit: int = 20) -> dict:
    """Check that every operator applied to □P-arguments lands in P.

    If the law is relatively flat for ``rank`` this premise makes □P closed under
    all operators, hence every term satisfies P. Tuples are drawn from the
    universe: a member whose arguments are not all members is not an instance and
    is counted separately.
    """
    law = get_law(law)
    flat = flatness_check(law.spec, rank)
    report: dict = {
        "law": law.name,
        "flatness": flat.to_json(),
        "universe": {"members": len(universe), "closed": universe.is_closed},
    }
    if not flat.accepted:
        report.update(certified=False, reason="law is not relatively flat for the given rank")
        return report
    if box is None:
        hres = henceforth(law, universe, P)
        box = hres.result
        report["henceforth"] = hres.to_json(include_table=False)
    checked = outside = 0
    counter = []
    for t in universe.terms:
        ids = [universe.index.get(a) for a in t.args]
        if any(i is None for i in ids):
            outside += 1
            continue
        if not all(box.mask[i] for i in ids):
            continue
        checked += 1
        if not P.mask[universe.index[t]]:
            if len(counter) < limit:
                counter.append({"term": show_term(t), "type": show_type(t.ty), "op": t.op.name})
            else:
                counter.append(None)
    ok = not counter
    report.update(
        premise_instances=checked,
        instances_with_nonmember_arguments=outside,
        counterexamples=[c for c in counter if c is not None],
        certified=ok,
    )
    if ok:
        report["conclusion"] = "every term satisfies P (relative to the universe)"
        report["conclusion_confirmed_on_universe"] = P.is_full()
    return report
