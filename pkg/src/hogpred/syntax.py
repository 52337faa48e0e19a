"""Intrinsically typed closed terms, the xTCL signature, enumeration and universes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .behaviour import Fun, Step
from .types import UNIT, Arrow, Ty, TypeReader, TypeSyntaxError, arrow, enumerate_types, show_type


class IllTypedTerm(TypeError):
    pass


class Atom(Ty):
    """Rigid type variable. Only used when type-checking rule templates symbolically."""

    __slots__ = ("name",)
    _table: dict = {}

    def __new__(cls, name: str) -> "Atom":
        hit = cls._table.get(name)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.name = name
        self.size = 1
        self._hash = hash(("atom", name))
        cls._table[name] = self
        return self

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return self.name


def subst_atoms(t: Ty, env: dict) -> Ty:
    if isinstance(t, Atom):
        return env.get(t, t)
    if isinstance(t, Arrow):
        return Arrow(subst_atoms(t.dom, env), subst_atoms(t.cod, env))
    return t


@dataclass(frozen=True, eq=False)
class Operator:
    """An operation symbol: ``n_params`` type parameters, typed argument slots, a result type.

    ``arg_types`` and ``result`` are types over the atoms ``T1 .. Tn``.
    """

    name: str
    n_params: int
    arg_types: tuple
    result: Ty
    atoms: tuple = field(default=())

    def __post_init__(self):
        if not self.atoms:
            object.__setattr__(self, "atoms", tuple(Atom(f"T{i + 1}") for i in range(self.n_params)))

    @property
    def arity(self) -> int:
        return len(self.arg_types)

    def instance(self, params: Sequence[Ty]) -> tuple[tuple, Ty]:
        env = dict(zip(self.atoms, params))
        return tuple(subst_atoms(a, env) for a in self.arg_types), subst_atoms(self.result, env)

    def __repr__(self):
        return f"Operator({self.name})"


class Signature:
    def __init__(self, ops: Iterable[Operator] = ()):
        self.ops: dict[str, Operator] = {}
        for op in ops:
            self.add(op)

    def add(self, op: Operator) -> None:
        if op.name in self.ops and self.ops[op.name] is not op:
            raise ValueError(f"operator {op.name!r} declared twice")
        self.ops[op.name] = op

    def __getitem__(self, name: str) -> Operator:
        return self.ops[name]

    def __contains__(self, name: str) -> bool:
        return name in self.ops

    def __iter__(self):
        return iter(self.ops.values())

    def extended(self, ops: Iterable[Operator]) -> "Signature":
        out = Signature(self.ops.values())
        for op in ops:
            out.add(op)
        return out


_T1, _T2, _T3 = Atom("T1"), Atom("T2"), Atom("T3")

E_OP = Operator("e", 0, (), UNIT)
S_OP = Operator("S", 3, (), arrow(arrow(_T1, _T2, _T3), arrow(_T1, _T2), _T1, _T3))
SP_OP = Operator("S'", 3, (arrow(_T1, _T2, _T3),), arrow(arrow(_T1, _T2), _T1, _T3))
SPP_OP = Operator("S''", 3, (arrow(_T1, _T2, _T3), arrow(_T1, _T2)), arrow(_T1, _T3))
K_OP = Operator("K", 2, (), arrow(_T1, _T2, _T1))
KP_OP = Operator("K'", 2, (_T1,), arrow(_T2, _T1))
I_OP = Operator("I", 1, (), arrow(_T1, _T1))
APP_OP = Operator("app", 2, (arrow(_T1, _T2), _T1), _T2)

XTCL = Signature([E_OP, S_OP, SP_OP, SPP_OP, K_OP, KP_OP, I_OP, APP_OP])


class Term:
    """Hash-consed term node. Structural equality coincides with identity."""

    __slots__ = ("op", "params", "args", "ty", "size", "_hash", "__weakref__")
    _table: dict = {}

    def __new__(cls, op: Operator, params: tuple = (), args: tuple = ()):
        key = (op, params, args)
        hit = cls._table.get(key)
        if hit is not None:
            return hit
        if len(params) != op.n_params:
            raise IllTypedTerm(f"{op.name} expects {op.n_params} type parameters, got {len(params)}")
        if len(args) != op.arity:
            raise IllTypedTerm(f"{op.name} expects {op.arity} arguments, got {len(args)}")
        want, result = op.instance(params)
        for i, (w, a) in enumerate(zip(want, args)):
            if a.ty is not w:
                raise IllTypedTerm(
                    f"argument {i} of {op.name} has type {show_type(a.ty)}, expected {show_type(w)}"
                )
        self = object.__new__(cls)
        self.op = op
        self.params = params
        self.args = args
        self.ty = result
        self.size = 1 + sum(a.size for a in args)
        self._hash = hash(key)
        cls._table[key] = self
        return self

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (Term, (self.op, self.params, self.args))

    def __repr__(self):
        return show_term(self)

    @property
    def head(self) -> str:
        return self.op.name


def E() -> Term:
    return Term(E_OP)


def S(t1: Ty, t2: Ty, t3: Ty) -> Term:
    return Term(S_OP, (t1, t2, t3))


def Sp(t1: Ty, t2: Ty, t3: Ty, arg: Term) -> Term:
    return Term(SP_OP, (t1, t2, t3), (arg,))


def Spp(t1: Ty, t2: Ty, t3: Ty, arg1: Term, arg2: Term) -> Term:
    return Term(SPP_OP, (t1, t2, t3), (arg1, arg2))


def K(t1: Ty, t2: Ty) -> Term:
    return Term(K_OP, (t1, t2))


def Kp(t1: Ty, t2: Ty, arg: Term) -> Term:
    return Term(KP_OP, (t1, t2), (arg,))


def I(t: Ty) -> Term:
    return Term(I_OP, (t,))


def App(t1: Ty, t2: Ty, fun: Term, arg: Term) -> Term:
    return Term(APP_OP, (t1, t2), (fun, arg))


def app(fun: Term, *args: Term) -> Term:
    """Left-nested application with inferred type parameters."""
    for a in args:
        if not isinstance(fun.ty, Arrow):
            raise IllTypedTerm(f"cannot apply a term of type {show_type(fun.ty)}")
        fun = App(fun.ty.dom, fun.ty.cod, fun, a)
    return fun


def type_of(t: Term) -> Ty:
    return t.ty


def term_size(t: Term) -> int:
    return t.size


def subterms(t: Term) -> Iterable[Term]:
    yield t
    for a in t.args:
        yield from subterms(a)


def show_term(t: Term) -> str:
    if t.op is APP_OP:
        return f"(app {show_term(t.args[0])} {show_term(t.args[1])})"
    out = t.op.name
    if t.params:
        out += "[" + ",".join(show_type(p) for p in t.params) + "]"
    if t.args:
        out += "(" + ",".join(show_term(a) for a in t.args) + ")"
    return out


# -- parsing -----------------------------------------------------------------


class TermSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class _Scanner:
    def __init__(self, src: str):
        self.src = src
        self.i = 0

    def skip(self):
        while self.i < len(self.src) and self.src[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self.skip()
        return self.src[self.i] if self.i < len(self.src) else ""

    def expect(self, c: str):
        if self.peek() != c:
            got = self.peek() or "end of input"
            raise TermSyntaxError(f"expected {c!r}, found {got!r}", self.i)
        self.i += 1

    def ident(self) -> str:
        self.skip()
        j = self.i
        while j < len(self.src) and (self.src[j].isalnum() or self.src[j] in "_'-"):
            j += 1
        if j == self.i:
            got = self.src[self.i] if self.i < len(self.src) else "end of input"
            raise TermSyntaxError(f"expected identifier, found {got!r}", self.i)
        name = self.src[self.i:j]
        self.i = j
        return name

    def type_expr(self, variables=None) -> Ty:
        """Read one type in s-expression syntax starting at the current position."""
        self.skip()
        depth, j = 0, self.i
        while j < len(self.src):
            c = self.src[j]
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    break
                depth -= 1
                if depth == 0:
                    j += 1
                    break
            elif depth == 0 and (c in ",]" or c.isspace()):
                break
            j += 1
        chunk = self.src[self.i:j]
        reader = TypeReader(chunk, variables)
        try:
            t = reader.read()
            tok, p = reader.peek()
            if tok:
                raise TypeSyntaxError(f"trailing input {tok!r}", p)
        except TypeSyntaxError as exc:
            raise TermSyntaxError(f"bad type: {exc}", self.i + exc.pos) from None
        self.i = j
        return t

    def type_params(self, variables=None) -> tuple:
        if self.peek() != "[":
            return ()
        self.i += 1
        out = [self.type_expr(variables)]
        while self.peek() == ",":
            self.i += 1
            out.append(self.type_expr(variables))
        self.expect("]")
        return tuple(out)


def _parse_term(sc: _Scanner, sig: Signature) -> Term:
    start = (sc.skip(), sc.i)[1]
    if sc.peek() == "(":
        sc.i += 1
        head = sc.ident()
        if head != "app":
            raise TermSyntaxError(f"expected 'app' after '(', found {head!r}", start + 1)
        parts = [_parse_term(sc, sig)]
        while sc.peek() not in (")", ""):
            parts.append(_parse_term(sc, sig))
        sc.expect(")")
        if len(parts) < 2:
            raise TermSyntaxError("app needs a function and at least one argument", start)
        try:
            return app(parts[0], *parts[1:])
        except IllTypedTerm as exc:
            raise TermSyntaxError(f"ill-typed application: {exc}", start) from None
    name = sc.ident()
    if name not in sig:
        raise TermSyntaxError(f"unknown operator {name!r}", start)
    op = sig[name]
    params = sc.type_params()
    args = []
    # an argument list follows the operator directly; "(" after whitespace starts a new term
    if sc.i < len(sc.src) and sc.src[sc.i] == "(":
        sc.i += 1
        args.append(_parse_term(sc, sig))
        while sc.peek() == ",":
            sc.i += 1
            args.append(_parse_term(sc, sig))
        sc.expect(")")
    try:
        return Term(op, params, tuple(args))
    except IllTypedTerm as exc:
        raise TermSyntaxError(f"ill-typed term: {exc}", start) from None


def parse_term(src: str, sig: Signature = XTCL) -> Term:
    sc = _Scanner(src)
    t = _parse_term(sc, sig)
    if sc.peek():
        raise TermSyntaxError(f"trailing input {sc.peek()!r}", sc.i)
    return t


# -- enumeration -------------------------------------------------------------


class _Enumerator:
    """Terms of a given type and exact size, memoised; type parameters bounded by ``type_bound``."""

    def __init__(self, type_bound: int, sig: Signature = XTCL):
        self.tb = type_bound
        self.sig = sig
        self.small = enumerate_types(type_bound)
        self.memo: dict = {}

    def _param_choices(self, op: Operator, ty: Ty) -> list[tuple]:
        # Parameter vectors whose result type is ``ty``; found by matching against the
        # result template, with unmatched parameters ranging over the small types.
        env: dict = {}
        if not _match(op.result, ty, env):
            return []
        free = [a for a in op.atoms if a not in env]
        out = []
        for combo in itertools.product(self.small, repeat=len(free)):
            full = dict(env)
            full.update(zip(free, combo))
            params = tuple(full[a] for a in op.atoms)
            if all(p.size <= self.tb for p in params):
                out.append(params)
        return out

    def exact(self, ty: Ty, n: int) -> list[Term]:
        key = (ty, n)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out: list[Term] = []
        for op in self.sig:
            if op.arity == 0:
                if n == 1:
                    out.extend(Term(op, p) for p in self._param_choices(op, ty))
                continue
            if n < 1 + op.arity:
                continue
            for params in self._param_choices(op, ty):
                want, _ = op.instance(params)
                for sizes in _compositions(n - 1, len(want)):
                    pools = [self.exact(w, k) for w, k in zip(want, sizes)]
                    for args in itertools.product(*pools):
                        out.append(Term(op, params, args))
        self.memo[key] = out
        return out

    def upto(self, ty: Ty, size_bound: int) -> list[Term]:
        out = []
        for n in range(1, size_bound + 1):
            out.extend(self.exact(ty, n))
        return out


def _match(pattern: Ty, ty: Ty, env: dict) -> bool:
    if isinstance(pattern, Atom):
        bound = env.get(pattern)
        if bound is None:
            env[pattern] = ty
            return True
        return bound is ty
    if isinstance(pattern, Arrow):
        return isinstance(ty, Arrow) and _match(pattern.dom, ty.dom, env) and _match(pattern.cod, ty.cod, env)
    return pattern is ty


def _compositions(total: int, parts: int):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for k in range(1, total - parts + 2):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def enumerate_terms(ty: Ty, size_bound: int, type_bound: int, sig: Signature = XTCL) -> list[Term]:
    """All closed terms of type ``ty`` with at most ``size_bound`` nodes and type parameters of size <= ``type_bound``."""
    if ty.size > type_bound:
        raise ValueError(f"type {show_type(ty)} exceeds type bound {type_bound}")
    return _Enumerator(type_bound, sig).upto(ty, size_bound)


# -- universes ---------------------------------------------------------------

CLOSED = "closed"
TRUNCATED = "truncated"


class Universe:
    """A finite, per-type ordered set of terms standing in for the set of all closed terms.

    Members get dense integer ids in insertion order; predicates are indexed by them.
    """

    def __init__(self, size_bound: int = 0, type_bound: int = 0):
        self.size_bound = size_bound
        self.type_bound = type_bound
        self.terms: list[Term] = []
        self.index: dict[Term, int] = {}
        self.slices: dict[Ty, list[int]] = {}
        self.added: set[int] = set()
        self.closure_status: dict[Ty, str] = {}
        self.frozen = False
        # label domain for function members: the generating members, fixed at first closure
        self.labels: dict[Ty, list[int]] | None = None
        self._tables = {}

    @classmethod
    def build(cls, size_bound: int, type_bound: int, sig: Signature = XTCL) -> "Universe":
        u = cls(size_bound, type_bound)
        en = _Enumerator(type_bound, sig)
        for ty in enumerate_types(type_bound):
            u.ensure_slice(ty)
            for t in en.upto(ty, size_bound):
                u.add(t)
        return u

    @classmethod
    def from_terms(cls, terms: Iterable[Term], types: Iterable[Ty] = ()) -> "Universe":
        u = cls()
        for ty in types:
            u.ensure_slice(ty)
        for t in terms:
            u.add(t)
        u.size_bound = max((t.size for t in u.terms), default=0)
        u.type_bound = max((ty.size for ty in u.slices), default=0)
        return u

    def ensure_slice(self, ty: Ty) -> list[int]:
        sl = self.slices.get(ty)
        if sl is None:
            sl = self.slices[ty] = []
            self.closure_status[ty] = CLOSED
        return sl

    def add(self, t: Term, by_closure: bool = False) -> int:
        i = self.index.get(t)
        if i is not None:
            return i
        if self.frozen:
            raise RuntimeError("universe is frozen")
        i = len(self.terms)
        self.terms.append(t)
        self.index[t] = i
        self.ensure_slice(t.ty).append(i)
        if by_closure:
            self.added.add(i)
        return i

    def __contains__(self, t: Term) -> bool:
        return t in self.index

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def types(self) -> list[Ty]:
        return sorted(self.slices, key=_type_order_key)

    def slice(self, ty: Ty) -> list[Term]:
        return [self.terms[i] for i in self.slices.get(ty, ())]

    def label_slice(self, ty: Ty) -> list[int]:
        """Ids of the members that serve as labels at ``ty``."""
        if self.labels is None:
            return self.slices.get(ty, [])
        return self.labels.get(ty, [])

    def id_of(self, t: Term) -> int:
        try:
            return self.index[t]
        except KeyError:
            raise KeyError(f"term {show_term(t)} is not a universe member") from None

    def freeze(self) -> "Universe":
        self.frozen = True
        return self

    @property
    def is_closed(self) -> bool:
        return all(s == CLOSED for s in self.closure_status.values())

    def stats(self) -> dict:
        return {
            "size_bound": self.size_bound,
            "type_bound": self.type_bound,
            "members": len(self.terms),
            "added_by_closure": len(self.added),
            "closed": self.is_closed,
            "slices": {
                show_type(ty): {"count": len(self.slices[ty]), "closure": self.closure_status[ty]}
                for ty in self.types
            },
        }


def _type_order_key(ty: Ty):
    return (ty.size, show_type(ty))


def _behaviours(b) -> Iterable:
    if isinstance(b, (set, frozenset)):
        return b
    return (b,)


def close_universe(u: Universe, gamma: Callable, fuel: int = 50) -> Universe:
    """Add unlabelled reducts and labelled results until closed or out of fuel.

    Labels are the members present when closure starts (``u.labels``); results
    added here are members but not labels. Since a labelled result lives at a
    strictly smaller type than its function, this keeps closure finite for
    terminating laws. ``fuel`` bounds the number of breadth-first rounds.
    Per-type ``closure_status`` is recomputed exactly at the end: a slice is
    closed iff none of its members has a reduct or labelled result outside the
    universe.
    """
    if u.frozen:
        raise RuntimeError("universe is frozen")
    if u.labels is None:
        u.labels = {ty: list(ids) for ty, ids in u.slices.items()}
    funs: list[tuple[int, list]] = []
    applied: dict[int, int] = {}
    scanned = 0
    for _ in range(fuel):
        before = len(u.terms)
        for i in range(scanned, before):
            t = u.terms[i]
            fs = []
            for b in _behaviours(gamma(t)):
                if isinstance(b, Step):
                    u.add(b.target, by_closure=True)
                elif isinstance(b, Fun):
                    fs.append(b)
            if fs:
                funs.append((i, fs))
        scanned = before
        # labels that arrived in any earlier round must reach every function member
        for i, fs in funs:
            labels = u.label_slice(u.terms[i].ty.dom)
            done = applied.get(i, 0)
            if done < len(labels):
                for j in labels[done:]:
                    s = u.terms[j]
                    for f in fs:
                        u.add(f(s), by_closure=True)
                applied[i] = len(labels)
        if len(u.terms) == before:
            break
    _recompute_status(u, gamma)
    return u


def _recompute_status(u: Universe, gamma: Callable) -> None:
    for ty in u.slices:
        u.closure_status[ty] = CLOSED
    for i, t in enumerate(u.terms):
        for b in _behaviours(gamma(t)):
            if isinstance(b, Step):
                if b.target not in u.index:
                    u.closure_status[t.ty] = TRUNCATED
            elif isinstance(b, Fun):
                for j in u.label_slice(t.ty.dom):
                    if b(u.terms[j]) not in u.index:
                        u.closure_status[t.ty] = TRUNCATED
                        break
