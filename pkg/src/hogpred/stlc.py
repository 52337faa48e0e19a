"""Simply typed lambda calculus with de Bruijn indices: typing, substitution, call-by-name steps,
the Safe predicate, henceforth on closed terms, its open extension and the induction-up-to obligations.

Contexts are tuples of types with index 0 the most recently bound variable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .predicates import Distance
from .types import UNIT, Arrow, Ty, TypeReader, TypeSyntaxError, enumerate_types, show_type

# -- terms -------------------------------------------------------------------------


class LTerm:
    """Hash-consed lambda term; structural equality is identity."""

    __slots__ = ("__weakref__",)

    def __repr__(self):
        return show_lterm(self)


class Var(LTerm):
    __slots__ = ("index",)
    _table: dict = {}

    def __new__(cls, index: int):
        hit = cls._table.get(index)
        if hit is None:
            hit = object.__new__(cls)
            hit.index = index
            cls._table[index] = hit
        return hit

    def __reduce__(self):
        return (Var, (self.index,))


class UnitVal(LTerm):
    __slots__ = ()
    _one = None

    def __new__(cls):
        if cls._one is None:
            cls._one = object.__new__(cls)
        return cls._one

    def __reduce__(self):
        return (UnitVal, ())


class Lam(LTerm):
    __slots__ = ("dom", "body")
    _table: dict = {}

    def __new__(cls, dom: Ty, body: LTerm):
        key = (dom, body)
        hit = cls._table.get(key)
        if hit is None:
            hit = object.__new__(cls)
            hit.dom = dom
            hit.body = body
            cls._table[key] = hit
        return hit

    def __reduce__(self):
        return (Lam, (self.dom, self.body))


class LApp(LTerm):
    __slots__ = ("fun", "arg")
    _table: dict = {}

    def __new__(cls, fun: LTerm, arg: LTerm):
        key = (fun, arg)
        hit = cls._table.get(key)
        if hit is None:
            hit = object.__new__(cls)
            hit.fun = fun
            hit.arg = arg
            cls._table[key] = hit
        return hit

    def __reduce__(self):
        return (LApp, (self.fun, self.arg))


UNIT_VAL = UnitVal()


class IllTyped(TypeError):
    pass


def typecheck(ctx: tuple, t: LTerm) -> Ty:
    if isinstance(t, Var):
        if not 0 <= t.index < len(ctx):
            raise IllTyped(f"variable {t.index} unbound in a context of length {len(ctx)}")
        return ctx[t.index]
    if isinstance(t, UnitVal):
        return UNIT
    if isinstance(t, Lam):
        return Arrow(t.dom, typecheck((t.dom,) + tuple(ctx), t.body))
    if isinstance(t, LApp):
        f = typecheck(ctx, t.fun)
        a = typecheck(ctx, t.arg)
        if not isinstance(f, Arrow):
            raise IllTyped(f"applying a term of type {show_type(f)}")
        if f.dom is not a:
            raise IllTyped(f"argument of type {show_type(a)} where {show_type(f.dom)} is expected")
        return f.cod
    raise IllTyped(f"not a term: {t!r}")


def lsize(t: LTerm) -> int:
    if isinstance(t, Lam):
        return 1 + lsize(t.body)
    if isinstance(t, LApp):
        return 1 + lsize(t.fun) + lsize(t.arg)
    return 1


def is_closed(t: LTerm, depth: int = 0) -> bool:
    if isinstance(t, Var):
        return t.index < depth
    if isinstance(t, Lam):
        return is_closed(t.body, depth + 1)
    if isinstance(t, LApp):
        return is_closed(t.fun, depth) and is_closed(t.arg, depth)
    return True


def shift(t: LTerm, d: int, cutoff: int = 0) -> LTerm:
    if isinstance(t, Var):
        return Var(t.index + d) if t.index >= cutoff else t
    if isinstance(t, Lam):
        return Lam(t.dom, shift(t.body, d, cutoff + 1))
    if isinstance(t, LApp):
        return LApp(shift(t.fun, d, cutoff), shift(t.arg, d, cutoff))
    return t


def _subst(t: LTerm, j: int, s: LTerm) -> LTerm:
    if isinstance(t, Var):
        return s if t.index == j else t
    if isinstance(t, Lam):
        return Lam(t.dom, _subst(t.body, j + 1, shift(s, 1)))
    if isinstance(t, LApp):
        return LApp(_subst(t.fun, j, s), _subst(t.arg, j, s))
    return t


def substitute(t: LTerm, s: LTerm) -> LTerm:
    """``t[s/0]`` for ``t`` under ``Γ,τ`` and ``s`` under ``Γ``; the result lives under ``Γ``."""
    return shift(_subst(t, 0, shift(s, 1)), -1)


def substitute_checked(ctx: tuple, tau: Ty, t: LTerm, s: LTerm) -> LTerm:
    typecheck((tau,) + tuple(ctx), t)
    if typecheck(ctx, s) is not tau:
        raise IllTyped("substituted term has the wrong type")
    return substitute(t, s)


def instantiate(t: LTerm, sigma: tuple) -> LTerm:
    """Simultaneous substitution of closed terms: ``sigma[i]`` replaces variable ``i``."""

    def go(u, depth):
        if isinstance(u, Var):
            if u.index >= depth:
                return sigma[u.index - depth]
            return u
        if isinstance(u, Lam):
            return Lam(u.dom, go(u.body, depth + 1))
        if isinstance(u, LApp):
            return LApp(go(u.fun, depth), go(u.arg, depth))
        return u

    return go(t, 0)


# -- behaviours --------------------------------------------------------------------


class LBehaviour:
    __slots__ = ()
    is_value = False


@dataclass(frozen=True)
class LStep(LBehaviour):
    target: LTerm


class _LUnitDone(LBehaviour):
    is_value = True

    def __repr__(self):
        return "LUnitDone"


class _LStuck(LBehaviour):
    def __repr__(self):
        return "Stuck"


LUnitDone = _LUnitDone()
LStuck = _LStuck()


@dataclass(frozen=True)
class LFun(LBehaviour):
    lam: Lam
    is_value = True

    def __call__(self, s: LTerm) -> LTerm:
        return substitute(self.lam.body, s)


def lstep(ctx: tuple, t: LTerm) -> LBehaviour:
    """Call-by-name: reduce the head of an application, then contract the redex."""
    if isinstance(t, Var):
        return LStuck
    if isinstance(t, UnitVal):
        return LUnitDone
    if isinstance(t, Lam):
        return LFun(t)
    b = lstep(ctx, t.fun)
    if isinstance(b, LStep):
        return LStep(LApp(b.target, t.arg))
    if isinstance(b, LFun):
        return LStep(b(t.arg))
    return LStuck


DEFAULT_FUEL = 10_000


def ltrace(t: LTerm, fuel: int = DEFAULT_FUEL, ctx: tuple = ()) -> tuple[list, str]:
    """Reduction sequence and its outcome: ``done``, ``fun``, ``stuck`` or ``fuel``."""
    out = [t]
    while True:
        b = lstep(ctx, t)
        if isinstance(b, LStep):
            if len(out) > fuel:
                return out, "fuel"
            t = b.target
            out.append(t)
        elif b is LUnitDone:
            return out, "done"
        elif isinstance(b, LFun):
            return out, "fun"
        else:
            return out, "stuck"


def safe(t: LTerm, fuel: int = DEFAULT_FUEL, ctx: tuple = ()) -> bool:
    """Every reduct is not an application or steps further; constantly true on open terms."""
    if ctx or not is_closed(t):
        return True
    terms, outcome = ltrace(t, fuel)
    if outcome == "fuel":
        return False
    last = terms[-1]
    # every earlier term on the trace steps; only the last one can be an irreducible application
    return not (isinstance(last, LApp) and outcome == "stuck")


def lterminates(t: LTerm, fuel: int = DEFAULT_FUEL, ctx: tuple = ()) -> bool:
    """Reaches a value within fuel; constantly true on open terms."""
    if ctx or not is_closed(t):
        return True
    return ltrace(t, fuel)[1] in ("done", "fun")


# -- textual syntax ----------------------------------------------------------------


class LSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class _LParser:
    def __init__(self, src: str):
        self.src = src
        self.i = 0

    def ws(self):
        while self.i < len(self.src) and self.src[self.i].isspace():
            self.i += 1

    def peek(self):
        self.ws()
        return self.src[self.i] if self.i < len(self.src) else ""

    def name(self):
        self.ws()
        j = self.i
        while j < len(self.src) and (self.src[j].isalnum() or self.src[j] in "_'"):
            j += 1
        if j == self.i:
            raise LSyntaxError("expected a variable name", self.i)
        out = self.src[self.i:j]
        self.i = j
        return out

    def type_until_dot(self):
        self.ws()
        depth, j = 0, self.i
        while j < len(self.src):
            c = self.src[j]
            if c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
            elif c == "." and depth == 0:
                break
            j += 1
        if j >= len(self.src):
            raise LSyntaxError("expected '.' after the binder type", self.i)
        try:
            r = TypeReader(self.src[self.i:j])
            ty = r.read()
            if r.peek()[0]:
                raise TypeSyntaxError("trailing input in type", r.peek()[1])
        except TypeSyntaxError as exc:
            raise LSyntaxError(f"bad type: {exc}", self.i) from None
        self.i = j + 1
        return ty

    def seq(self, scope: list):
        """Application sequence: atoms until ')' or end, nested to the left."""
        start = self.i
        parts = []
        while self.peek() not in (")", ""):
            if self.peek() == "\\":
                parts.append(self.lam(scope))
                break
            parts.append(self.atom(scope))
        if not parts:
            raise LSyntaxError("expected a term", start)
        out = parts[0]
        for p in parts[1:]:
            out = LApp(out, p)
        return out

    def lam(self, scope: list):
        self.i += 1
        x = self.name()
        if self.peek() != ":":
            raise LSyntaxError("expected ':' after the bound variable", self.i)
        self.i += 1
        ty = self.type_until_dot()
        return Lam(ty, self.seq([x] + scope))

    def atom(self, scope: list):
        c = self.peek()
        start = self.i
        if c == "(":
            self.i += 1
            if self.peek() == ")":
                self.i += 1
                return UNIT_VAL
            out = self.seq(scope)
            if self.peek() != ")":
                raise LSyntaxError("unclosed '('", start)
            self.i += 1
            return out
        x = self.name()
        if x not in scope:
            raise LSyntaxError(f"unbound variable {x!r}", start)
        return Var(scope.index(x))


def parse_lterm(src: str, names: list | None = None) -> LTerm:
    """Read ``()``, ``\\x:T. t`` and ``(t u ...)``; named variables become de Bruijn indices."""
    p = _LParser(src)
    t = p.seq(list(names or []))
    if p.peek():
        raise LSyntaxError(f"trailing input {p.peek()!r}", p.i)
    return t


def show_lterm(t: LTerm, names: list | None = None) -> str:
    names = list(names or [])

    def fresh(k):
        return f"x{k}"

    def go(u, scope):
        if isinstance(u, Var):
            return scope[u.index] if u.index < len(scope) else f"#{u.index - len(scope)}"
        if isinstance(u, UnitVal):
            return "()"
        if isinstance(u, Lam):
            x = fresh(len(scope))
            return f"\\{x}:{show_type(u.dom)}. {go(u.body, [x] + scope)}"
        parts = []
        while isinstance(u, LApp):
            parts.append(u.arg)
            u = u.fun
        parts.append(u)
        shown = [f"({go(p, scope)})" if isinstance(p, Lam) else go(p, scope) for p in reversed(parts)]
        return "(" + " ".join(shown) + ")"

    return go(t, names)


# -- environment-machine oracle ------------------------------------------------------


class _VLam:
    __slots__ = ("dom", "fn")

    def __init__(self, dom, fn):
        self.dom = dom
        self.fn = fn


class _NVar:
    __slots__ = ("level",)

    def __init__(self, level):
        self.level = level


class _NApp:
    __slots__ = ("head", "arg")

    def __init__(self, head, arg):
        self.head = head
        self.arg = arg


_VUNIT = object()


def _eval(t: LTerm, env: list):
    if isinstance(t, Var):
        return env[t.index]
    if isinstance(t, UnitVal):
        return _VUNIT
    if isinstance(t, Lam):
        return _VLam(t.dom, lambda v, b=t.body, env=env: _eval(b, [v] + env))
    f = _eval(t.fun, env)
    a = _eval(t.arg, env)
    if isinstance(f, _VLam):
        return f.fn(a)
    return _NApp(f, a)


def _readback(v, depth: int) -> LTerm:
    if v is _VUNIT:
        return UNIT_VAL
    if isinstance(v, _VLam):
        return Lam(v.dom, _readback(v.fn(_NVar(depth)), depth + 1))
    if isinstance(v, _NVar):
        return Var(depth - v.level - 1)
    return LApp(_readback(v.head, depth), _readback(v.arg, depth))


def nbe_normal_form(t: LTerm, ctx_len: int = 0) -> LTerm:
    """Beta normal form by evaluation into closures and read-back; never substitutes syntactically."""
    env = [_NVar(ctx_len - 1 - i) for i in range(ctx_len)]
    return _readback(_eval(t, env), ctx_len)


def subst_normal_form(t: LTerm) -> LTerm:
    """Beta normal form by repeated leftmost contraction using ``substitute``."""
    while True:
        r = _contract_leftmost(t)
        if r is None:
            return t
        t = r


def _contract_leftmost(t: LTerm):
    if isinstance(t, LApp):
        if isinstance(t.fun, Lam):
            return substitute(t.fun.body, t.arg)
        r = _contract_leftmost(t.fun)
        if r is not None:
            return LApp(r, t.arg)
        r = _contract_leftmost(t.arg)
        if r is not None:
            return LApp(t.fun, r)
        return None
    if isinstance(t, Lam):
        r = _contract_leftmost(t.body)
        return None if r is None else Lam(t.dom, r)
    return None


# -- enumeration and universe ----------------------------------------------------------


class _LEnum:
    def __init__(self, type_bound: int):
        self.tb = type_bound
        self.types = enumerate_types(type_bound)
        self.memo: dict = {}

    def exact(self, ctx: tuple, ty: Ty, n: int) -> list:
        key = (ctx, ty, n)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out: list = []
        if n == 1:
            out.extend(Var(i) for i, c in enumerate(ctx) if c is ty)
            if ty is UNIT:
                out.append(UNIT_VAL)
        else:
            if isinstance(ty, Arrow) and ty.dom.size <= self.tb:
                out.extend(Lam(ty.dom, b) for b in self.exact((ty.dom,) + ctx, ty.cod, n - 1))
            for sigma in self.types:
                fty = Arrow(sigma, ty)
                for k in range(1, n - 1):
                    fs = self.exact(ctx, fty, k)
                    if not fs:
                        continue
                    args = self.exact(ctx, sigma, n - 1 - k)
                    out.extend(LApp(f, a) for f in fs for a in args)
        self.memo[key] = out
        return out

    def upto(self, ctx: tuple, ty: Ty, size_bound: int) -> list:
        return [t for n in range(1, size_bound + 1) for t in self.exact(ctx, ty, n)]


def enumerate_contexts(max_len: int, type_bound: int) -> list[tuple]:
    tys = enumerate_types(type_bound)
    out = []
    for k in range(max_len + 1):
        out.extend(itertools.product(tys, repeat=k))
    return out


class LUniverse:
    """Enumerated open and closed terms, per (context, type) slice.

    The closed slices are additionally closed under reducts, labelled results and
    closed instances of the open members, so that henceforth and its open
    extension never look outside the universe.
    """

    def __init__(self, size_bound: int, type_bound: int, max_ctx: int = 2):
        self.size_bound = size_bound
        self.type_bound = type_bound
        self.max_ctx = max_ctx
        self.entries: list[tuple] = []  # (ctx, term)
        self.ty_of: list[Ty] = []
        self.index: dict = {}
        self.slices: dict = {}
        self.labels: dict = {}
        self.added: set = set()
        self.closed = True

    @classmethod
    def build(cls, size_bound: int, type_bound: int, max_ctx: int = 2, fuel: int = 50) -> "LUniverse":
        u = cls(size_bound, type_bound, max_ctx)
        en = _LEnum(type_bound)
        tys = enumerate_types(type_bound)
        for ctx in enumerate_contexts(max_ctx, type_bound):
            for ty in tys:
                u.slices.setdefault((ctx, ty), [])
                for t in en.upto(ctx, ty, size_bound):
                    u.add(ctx, t, ty)
        u.labels = {ty: list(u.slices.get(((), ty), [])) for ty in tys}
        u._close(fuel)
        return u

    def add(self, ctx: tuple, t: LTerm, ty: Ty | None = None, by_closure: bool = False) -> int:
        key = (ctx, t)
        i = self.index.get(key)
        if i is not None:
            return i
        if ty is None:
            ty = typecheck(ctx, t)
        i = len(self.entries)
        self.entries.append(key)
        self.ty_of.append(ty)
        self.index[key] = i
        self.slices.setdefault((ctx, ty), []).append(i)
        if by_closure:
            self.added.add(i)
        return i

    def _close(self, fuel: int):
        # closed instances of open members; substitutions range over closed labels
        for i in range(len(self.entries)):
            ctx, t = self.entries[i]
            if not ctx:
                continue
            pools = [[self.entries[j][1] for j in self.labels.get(c, [])] for c in ctx]
            for sigma in itertools.product(*pools):
                self.add((), instantiate(t, sigma), self.ty_of[i], by_closure=True)
        scanned = 0
        for _ in range(fuel):
            before = len(self.entries)
            for i in range(scanned, before):
                ctx, t = self.entries[i]
                if ctx:
                    continue
                b = lstep((), t)
                if isinstance(b, LStep):
                    self.add((), b.target, self.ty_of[i], by_closure=True)
                elif isinstance(b, LFun):
                    ty = self.ty_of[i]
                    for j in self.labels.get(ty.dom, []):
                        self.add((), b(self.entries[j][1]), ty.cod, by_closure=True)
            scanned = before
            if len(self.entries) == before:
                break
        self.closed = self._check_closed()

    def _check_closed(self) -> bool:
        for i, (ctx, t) in enumerate(self.entries):
            if ctx:
                continue
            b = lstep((), t)
            if isinstance(b, LStep) and ((), b.target) not in self.index:
                return False
            if isinstance(b, LFun):
                for j in self.labels.get(self.ty_of[i].dom, []):
                    if ((), b(self.entries[j][1])) not in self.index:
                        return False
        return True

    def __len__(self):
        return len(self.entries)

    def closed_ids(self) -> list[int]:
        return [i for i, (ctx, _) in enumerate(self.entries) if not ctx]

    def id_of(self, ctx: tuple, t: LTerm) -> int:
        try:
            return self.index[(ctx, t)]
        except KeyError:
            raise KeyError(f"{show_lterm(t)} is not a member") from None

    def stats(self) -> dict:
        return {
            "size_bound": self.size_bound,
            "type_bound": self.type_bound,
            "max_context_length": self.max_ctx,
            "members": len(self.entries),
            "closed_members": len(self.closed_ids()),
            "added_by_closure": len(self.added),
            "closed": self.closed,
        }


# -- predicates over the universe -----------------------------------------------------


class OpenPredicate:
    """Boolean table over every (context, term) member."""

    def __init__(self, universe: LUniverse, mask):
        self.universe = universe
        self.mask = np.asarray(mask, dtype=bool)

    @classmethod
    def from_fn(cls, u: LUniverse, fn) -> "OpenPredicate":
        return cls(u, [bool(fn(ctx, t)) for ctx, t in u.entries])

    @classmethod
    def full(cls, u: LUniverse) -> "OpenPredicate":
        return cls(u, np.ones(len(u), dtype=bool))

    @classmethod
    def empty(cls, u: LUniverse) -> "OpenPredicate":
        return cls(u, np.zeros(len(u), dtype=bool))

    def __call__(self, ctx: tuple, t: LTerm) -> bool:
        return bool(self.mask[self.universe.id_of(ctx, t)])

    def __eq__(self, other):
        return isinstance(other, OpenPredicate) and bool(np.array_equal(self.mask, other.mask))

    __hash__ = None

    def leq(self, other) -> bool:
        return not bool(np.any(self.mask & ~other.mask))

    def is_full(self) -> bool:
        return bool(self.mask.all())

    def count(self) -> int:
        return int(self.mask.sum())


def safe_pred(u: LUniverse, fuel: int = DEFAULT_FUEL) -> OpenPredicate:
    return OpenPredicate.from_fn(u, lambda ctx, t: safe(t, fuel, ctx))


def terminates_pred(u: LUniverse, fuel: int = DEFAULT_FUEL) -> OpenPredicate:
    return OpenPredicate.from_fn(u, lambda ctx, t: lterminates(t, fuel, ctx))


def _closed_tables(u: LUniverse):
    hit = getattr(u, "_tables_cache", None)
    if hit is not None:
        return hit
    step_ptr, step_res, app_ptr, app_label, app_res = [0], [], [0], [], []
    for i, (ctx, t) in enumerate(u.entries):
        if not ctx:
            b = lstep((), t)
            if isinstance(b, LStep):
                step_res.append(u.index.get(((), b.target), -1))
            elif isinstance(b, LFun):
                for j in u.labels.get(u.ty_of[i].dom, []):
                    app_label.append(j)
                    app_res.append(u.index.get(((), b(u.entries[j][1])), -1))
        step_ptr.append(len(step_res))
        app_ptr.append(len(app_res))
    arr = lambda xs: np.asarray(xs, dtype=np.int64)  # noqa: E731
    out = (arr(step_ptr), arr(step_res), arr(app_ptr), arr(app_label), arr(app_res))
    u._tables_cache = out
    return out


def _ldistance(u: LUniverse, a: np.ndarray, b: np.ndarray) -> Distance:
    diff = np.flatnonzero(a != b)
    if len(diff) == 0:
        return Distance()
    return Distance(min(u.ty_of[i].size for i in diff))


@dataclass
class LBoxResult:
    result: OpenPredicate
    iterations_outer: int
    iterations_inner: list = field(default_factory=list)
    distances: list = field(default_factory=list)


def lbox(u: LUniverse, P: OpenPredicate) -> LBoxResult:
    """□P on closed slices by the Banach iteration over the relative gfp; open slices keep P."""
    tables = _closed_tables(u)
    P8 = np.ascontiguousarray(P.mask, dtype=np.uint8)
    S = np.ones(len(u), dtype=np.uint8)
    limit = u.type_bound + 2
    inner, dists = [], []
    for k in range(1, limit + 1):
        G, sweeps = kernels.gfp_relative(*tables, S, P8)
        inner.append(int(sweeps))
        dists.append(_ldistance(u, G, S))
        if np.array_equal(G, S):
            return LBoxResult(OpenPredicate(u, G), k, inner, dists)
        S = G
    raise RuntimeError("henceforth on closed lambda terms did not converge")


def open_extension(u: LUniverse, box: OpenPredicate) -> OpenPredicate:
    """■P: t under Γ is in iff every closed □P-instance of it is in □P."""
    good = {ty: [u.entries[j][1] for j in ids if box.mask[j]] for ty, ids in u.labels.items()}
    mask = np.array(box.mask, copy=True)
    for i, (ctx, t) in enumerate(u.entries):
        if not ctx:
            continue
        ok = True
        for sigma in itertools.product(*[good.get(c, []) for c in ctx]):
            j = u.index.get(((), instantiate(t, sigma)))
            if j is None or not box.mask[j]:
                ok = False
                break
        mask[i] = ok
    return OpenPredicate(u, mask)


def up_to_black_check(u: LUniverse, P: OpenPredicate, limit: int = 20) -> dict:
    """The four obligations: variables, unit, applications of □P terms, abstractions of □P bodies."""
    box = lbox(u, P)
    B = box.result
    clauses = {1: [], 2: [], 3: [], 4: []}
    counts = {1: 0, 2: 0, 3: 0, 4: 0}

    def fail(k, ctx, t):
        if len(clauses[k]) < limit:
            clauses[k].append({"context": [show_type(c) for c in ctx], "term": show_lterm(t, [f"v{i}" for i in range(len(ctx))])})

    for i, (ctx, t) in enumerate(u.entries):
        if isinstance(t, Var):
            counts[1] += 1
            if not P.mask[i]:
                fail(1, ctx, t)
        elif isinstance(t, UnitVal):
            counts[2] += 1
            if not P.mask[i]:
                fail(2, ctx, t)
        elif isinstance(t, LApp):
            jp = u.index.get((ctx, t.fun))
            jq = u.index.get((ctx, t.arg))
            if jp is None or jq is None or not (B.mask[jp] and B.mask[jq]):
                continue
            counts[3] += 1
            if not P.mask[i]:
                fail(3, ctx, t)
        elif isinstance(t, Lam):
            jb = u.index.get(((t.dom,) + ctx, t.body))
            if jb is None or not B.mask[jb]:
                continue
            counts[4] += 1
            if not P.mask[i]:
                fail(4, ctx, t)
    ok = all(not v for v in clauses.values())
    rep = {
        "universe": u.stats(),
        "henceforth": {
            "iterations_outer": box.iterations_outer,
            "iterations_inner": box.iterations_inner,
            "distances": [d.to_json() for d in box.distances],
            "closed_members_in_box": int(B.mask[u.closed_ids()].sum()),
        },
        "clauses": {
            str(k): {"instances": counts[k], "holds": not clauses[k], "counterexamples": clauses[k]} for k in clauses
        },
        "open_slices": "henceforth taken equal to P on open terms",
        "certified": ok,
    }
    if ok:
        rep["conclusion"] = "P holds on every term (relative to the universe)"
        rep["conclusion_confirmed_on_universe"] = P.is_full()
    return rep


@lru_cache(maxsize=None)
def _cached_universe(size_bound: int, type_bound: int, max_ctx: int) -> LUniverse:
    return LUniverse.build(size_bound, type_bound, max_ctx)


def universe(size_bound: int = 6, type_bound: int = 3, max_ctx: int = 2) -> LUniverse:
    return _cached_universe(size_bound, type_bound, max_ctx)
