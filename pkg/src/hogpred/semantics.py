"""Operational models derived from a law: traces, weak application, n-step extension, termination."""

from __future__ import annotations

from dataclasses import dataclass, field

from .behaviour import Fun, Step, Stuck, UnitDone
from .law import Law, get_law
from .syntax import Term, Universe

DEFAULT_FUEL = 10_000


class _Marker:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


FUEL_EXHAUSTED = _Marker("FUEL_EXHAUSTED")


def gamma(law, t: Term):
    return get_law(law).gamma(t)


def _deterministic(law) -> Law:
    law = get_law(law)
    if law.powerset:
        raise ValueError(f"law {law.name} is nondeterministic; use terminates_all")
    return law


@dataclass
class Trace:
    terms: list
    outcome: str  # "done" | "fun" | "fuel" | "stuck"
    final: object = None

    @property
    def steps(self) -> int:
        return len(self.terms) - 1

    @property
    def last(self) -> Term:
        return self.terms[-1]

    @property
    def terminated(self) -> bool:
        return self.outcome in ("done", "fun")


def reduce_trace(law, t: Term, fuel: int = DEFAULT_FUEL) -> Trace:
    """Follow unlabelled steps from ``t`` until a value, a stuck term, or ``fuel`` steps."""
    law = _deterministic(law)
    terms = [t]
    for _ in range(fuel + 1):
        b = law.gamma(t)
        if isinstance(b, Step):
            if len(terms) > fuel:
                return Trace(terms, "fuel", FUEL_EXHAUSTED)
            t = b.target
            terms.append(t)
            continue
        if b is UnitDone:
            return Trace(terms, "done", b)
        if isinstance(b, Fun):
            return Trace(terms, "fun", b)
        return Trace(terms, "stuck", Stuck)
    return Trace(terms, "fuel", FUEL_EXHAUSTED)


def weak_apply(law, s: Term, t: Term, fuel: int = DEFAULT_FUEL):
    """``s ⇒^t r``: reduce ``s`` to a function value and apply it to ``t``.

    Returns the result term or ``FUEL_EXHAUSTED``; raises on a stuck term.
    """
    tr = reduce_trace(law, s, fuel)
    if tr.outcome == "fun":
        return tr.final(t)
    if tr.outcome == "fuel":
        return FUEL_EXHAUSTED
    raise ValueError(f"term does not reduce to a function (outcome {tr.outcome})")


@dataclass(frozen=True)
class Reducing:
    """Left summand of the n-step extension: the term reached so far."""

    term: Term


@dataclass(frozen=True)
class Value:
    """Right summand: a value observation (UnitDone or a function)."""

    behaviour: object


def gamma_n(law, t: Term, n: int):
    """n-step extension: ``γ^(0)`` injects left; ``γ^(n+1)(t)`` steps once then continues."""
    law = _deterministic(law)
    for _ in range(n):
        b = law.gamma(t)
        if isinstance(b, Step):
            t = b.target
        elif b is Stuck:
            # a stuck term never reaches a value; it stays as reducing
            return Reducing(t)
        else:
            return Value(b)
    return Reducing(t)


def compose_gamma_n(law, t: Term, m: int, n: int):
    """Run ``m`` steps, then ``n`` more from a still-reducing result; values pass through unchanged."""
    first = gamma_n(law, t, m)
    if isinstance(first, Reducing):
        return gamma_n(law, first.term, n)
    return first


def steps_to_value(law, t: Term, fuel: int = DEFAULT_FUEL) -> int | None:
    """Number of unlabelled steps before ``t`` shows a value, or None if none within fuel."""
    tr = reduce_trace(law, t, fuel)
    return tr.steps if tr.terminated else None


def down_n(law, universe: Universe, n: int):
    """``⇓_n`` on the universe: members whose ``γ^(n)`` is a value observation."""
    from .predicates import Predicate
    from .tables import steps_table

    steps = steps_table(get_law(law), universe, max(n, 1))
    return Predicate.from_mask(universe, (steps >= 0) & (steps < n))


def down(law, universe: Universe, fuel: int = DEFAULT_FUEL):
    """``⇓`` approximated by the union of ``⇓_n`` for ``n <= fuel``."""
    return down_n(law, universe, fuel + 1)


@dataclass
class AllTraces:
    """Result of exhaustively exploring a nondeterministic reduction graph."""

    terminates: bool
    outcome: str  # "terminates" | "cycle" | "fuel"
    states: int = 0
    max_depth: int = 0  # longest trace, when all traces terminate
    witness: list = field(default_factory=list)


def terminates_all(law, t: Term, fuel: int = 1000) -> AllTraces:
    """Check that every maximal trace from ``t`` is finite.

    Depth-first search over successor sets with cycle detection; ``fuel`` bounds the
    length of any single branch. Subgraphs already proven finite are not revisited.
    """
    law = get_law(law)
    # height: length of the longest trace from a fully explored term
    height: dict = {}
    on_path: set = set()
    path: list = []

    def succ(x):
        b = law.gamma(x)
        bs = b if isinstance(b, frozenset) else (b,)
        return [y.target for y in bs if isinstance(y, Step)]

    # explicit stack: (term, successors, iterator over them)
    s0 = succ(t)
    stack = [(t, s0, iter(s0))]
    on_path.add(t)
    path.append(t)
    while stack:
        x, xs, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            path.pop()
            on_path.discard(x)
            height[x] = max((1 + height[y] for y in xs), default=0)
            continue
        if nxt in height:
            continue
        if nxt in on_path:
            return AllTraces(False, "cycle", len(height), 0, path + [nxt])
        if len(path) > fuel:
            return AllTraces(False, "fuel", len(height), 0, list(path))
        on_path.add(nxt)
        path.append(nxt)
        ns = succ(nxt)
        stack.append((nxt, ns, iter(ns)))
    return AllTraces(True, "terminates", len(height), height[t])
