"""Type-indexed predicates over a universe, the behaviour lifting, invariant checks and the ultrametric."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .behaviour import Fun, Step, Stuck, UnitDone
from .law import get_law
from .syntax import XTCL, Signature, Term, Universe, parse_term, show_term
from .types import Arrow, Ty, parse_type, show_type


class EscapedUniverse(LookupError):
    """A reduct or labelled result is not a universe member."""

    def __init__(self, term: Term):
        super().__init__(f"escaped universe: {show_term(term)}")
        self.term = term


class Predicate:
    """A boolean table over the members of a universe, read per type through its slices."""

    __slots__ = ("universe", "mask")

    def __init__(self, universe: Universe, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (len(universe),):
            raise ValueError(f"mask has shape {mask.shape}, universe has {len(universe)} members")
        self.universe = universe
        self.mask = mask

    @classmethod
    def from_mask(cls, universe: Universe, mask) -> "Predicate":
        return cls(universe, np.array(mask, dtype=bool))

    @classmethod
    def full(cls, universe: Universe) -> "Predicate":
        return cls(universe, np.ones(len(universe), dtype=bool))

    @classmethod
    def empty(cls, universe: Universe) -> "Predicate":
        return cls(universe, np.zeros(len(universe), dtype=bool))

    @classmethod
    def from_fn(cls, universe: Universe, fn) -> "Predicate":
        return cls(universe, np.fromiter((bool(fn(t)) for t in universe.terms), dtype=bool, count=len(universe)))

    @classmethod
    def random(cls, universe: Universe, rng: np.random.Generator, density: float = 0.5) -> "Predicate":
        return cls(universe, rng.random(len(universe)) < density)

    def __contains__(self, t: Term) -> bool:
        return bool(self.mask[self.universe.id_of(t)])

    def __call__(self, t: Term) -> bool:
        return t in self

    def slice(self, ty: Ty) -> np.ndarray:
        return self.mask[np.asarray(self.universe.slices.get(ty, []), dtype=np.int64)]

    def members(self) -> list[Term]:
        return [self.universe.terms[i] for i in np.flatnonzero(self.mask)]

    def count(self) -> int:
        return int(self.mask.sum())

    def _check(self, other: "Predicate"):
        if other.universe is not self.universe:
            raise ValueError("predicates live over different universes")

    def __and__(self, other):
        self._check(other)
        return Predicate(self.universe, self.mask & other.mask)

    def __or__(self, other):
        self._check(other)
        return Predicate(self.universe, self.mask | other.mask)

    def __invert__(self):
        return Predicate(self.universe, ~self.mask)

    def __eq__(self, other):
        if not isinstance(other, Predicate):
            return NotImplemented
        return other.universe is self.universe and bool(np.array_equal(self.mask, other.mask))

    __hash__ = None

    def leq(self, other: "Predicate") -> bool:
        self._check(other)
        return not bool(np.any(self.mask & ~other.mask))

    def is_full(self) -> bool:
        return bool(self.mask.all())

    def to_json(self) -> dict:
        out = {}
        u = self.universe
        for ty in u.types:
            ids = u.slices[ty]
            out[show_type(ty)] = [show_term(u.terms[i]) for i in ids if self.mask[i]]
        return out

    @classmethod
    def from_json(cls, universe: Universe, data: dict, sig: Signature = XTCL) -> "Predicate":
        mask = np.zeros(len(universe), dtype=bool)
        for ty_src, terms in data.items():
            ty = parse_type(ty_src)
            for src in terms:
                t = parse_term(src, sig)
                if t.ty is not ty:
                    raise ValueError(f"{src} has type {show_type(t.ty)}, listed under {ty_src}")
                mask[universe.id_of(t)] = True
        return cls(universe, mask)

    @classmethod
    def load(cls, universe: Universe, path: str, sig: Signature = XTCL) -> "Predicate":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(universe, json.load(fh), sig)

    def __repr__(self):
        return f"Predicate({self.count()}/{len(self.universe)})"


# -- distance --------------------------------------------------------------------


@dataclass(frozen=True)
class Distance:
    """``2^-exponent``; an infinite exponent is distance zero."""

    exponent: float = math.inf

    @property
    def value(self) -> Fraction:
        return Fraction(0) if self.exponent == math.inf else Fraction(1, 2 ** int(self.exponent))

    def __float__(self):
        return float(self.value)

    def __le__(self, other):
        return self.value <= other.value

    def __lt__(self, other):
        return self.value < other.value

    def __ge__(self, other):
        return self.value >= other.value

    def __gt__(self, other):
        return self.value > other.value

    def to_json(self):
        return {"exponent": None if self.exponent == math.inf else int(self.exponent), "value": str(self.value)}

    def __repr__(self):
        return "0" if self.exponent == math.inf else f"2^-{int(self.exponent)}"


def distance(P: Predicate, Q: Predicate, universe: Universe | None = None) -> Distance:
    """``2^-n`` where n is the least type size at which P and Q differ."""
    P._check(Q)
    u = P.universe if universe is None else universe
    diff = P.mask != Q.mask
    n = math.inf
    for ty, ids in u.slices.items():
        if ty.size < n and ids and bool(diff[np.asarray(ids)].any()):
            n = ty.size
    return Distance(n)


# -- the lifting -------------------------------------------------------------------


def _member(u: Universe, P: Predicate, t: Term) -> bool:
    i = u.index.get(t)
    if i is None:
        raise EscapedUniverse(t)
    return bool(P.mask[i])


def behaviour_in_lifting(S: Predicate, P: Predicate, ty: Ty, b, universe: Universe) -> bool:
    """Does behaviour ``b`` of a term of type ``ty`` lie in the lifting of (S, P)?

    Steps need their target in P; a function needs every label in S at the
    domain type to produce a result in P. Termination and stuckness always pass.
    Behaviour sets pass when every member passes. Raises ``EscapedUniverse`` if a
    needed term is not a member.
    """
    if isinstance(b, (set, frozenset)):
        return all(behaviour_in_lifting(S, P, ty, x, universe) for x in b)
    if isinstance(b, Step):
        return _member(universe, P, b.target)
    if b is UnitDone or b is Stuck:
        return True
    if isinstance(b, Fun):
        if not isinstance(ty, Arrow):
            raise TypeError(f"function behaviour at non-function type {show_type(ty)}")
        for i in universe.label_slice(ty.dom):
            if S.mask[i] and not _member(universe, P, b(universe.terms[i])):
                return False
        return True
    raise TypeError(f"unknown behaviour {b!r}")


@dataclass
class CheckReport:
    holds: bool
    violations: list = field(default_factory=list)
    checked: int = 0

    def to_json(self) -> dict:
        return {"holds": self.holds, "checked": self.checked, "violations": self.violations}


def invariant_check(law, universe: Universe, S: Predicate, P: Predicate, limit: int = 50) -> CheckReport:
    """Is P an S-relative invariant: every member of P behaves within the lifting of (S, P)?"""
    law = get_law(law)
    violations = []
    checked = 0
    for i in np.flatnonzero(P.mask):
        t = universe.terms[i]
        checked += 1
        try:
            ok = behaviour_in_lifting(S, P, t.ty, law.gamma(t), universe)
            reason = "behaviour leaves the lifting"
        except EscapedUniverse as exc:
            ok, reason = False, str(exc)
        if not ok:
            if len(violations) < limit:
                violations.append({"type": show_type(t.ty), "term": show_term(t), "reason": reason})
            else:
                violations.append(None)
    n_bad = len(violations)
    violations = [v for v in violations if v is not None]
    rep = CheckReport(n_bad == 0, violations, checked)
    return rep


def logical_check(law, universe: Universe, P: Predicate, limit: int = 50) -> CheckReport:
    """P is logical when it is a P-relative invariant."""
    return invariant_check(law, universe, P, P, limit)


def lift_preimage(law, universe: Universe, S: Predicate, P: Predicate) -> Predicate:
    """Members whose behaviour lies in the lifting of (S, P); escapes count as outside."""
    law = get_law(law)

    def ok(t):
        try:
            return behaviour_in_lifting(S, P, t.ty, law.gamma(t), universe)
        except EscapedUniverse:
            return False

    return Predicate.from_fn(universe, ok)
