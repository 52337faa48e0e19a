"""Simple types ``unit | A -> B``, their size measure and bounded enumeration."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator


class Ty:
    """Base class of simple types. Instances are interned, so ``is`` equals ``==``."""

    __slots__ = ("size", "_hash", "__weakref__")

    def __repr__(self) -> str:
        return show_type(self)


class _Unit(Ty):
    __slots__ = ()

    def __init__(self) -> None:
        self.size = 1
        self._hash = hash("unit")

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (_unit, ())


class Arrow(Ty):
    __slots__ = ("dom", "cod")
    _table: dict = {}

    def __new__(cls, dom: Ty, cod: Ty) -> "Arrow":
        key = (dom, cod)
        hit = cls._table.get(key)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.dom = dom
        self.cod = cod
        self.size = dom.size + cod.size
        self._hash = hash(("->", dom, cod))
        cls._table[key] = self
        return self

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Arrow, (self.dom, self.cod))


UNIT: Ty = _Unit()


def _unit() -> Ty:
    return UNIT


def arrow(*tys: Ty) -> Ty:
    """Right-nested arrow: ``arrow(a, b, c) == a -> (b -> c)``."""
    if len(tys) < 2:
        raise ValueError("arrow needs at least two types")
    out = tys[-1]
    for t in reversed(tys[:-1]):
        out = Arrow(t, out)
    return out


def size(t: Ty) -> int:
    return t.size


def is_arrow(t: Ty) -> bool:
    return isinstance(t, Arrow)


@lru_cache(maxsize=None)
def types_of_size(n: int) -> tuple[Ty, ...]:
    if n < 1:
        return ()
    if n == 1:
        return (UNIT,)
    out = []
    for k in range(1, n):
        for a in types_of_size(k):
            for b in types_of_size(n - k):
                out.append(Arrow(a, b))
    return tuple(out)


def enumerate_types(max_size: int) -> list[Ty]:
    """All types of size at most ``max_size``, ascending by size."""
    if max_size < 1:
        raise ValueError("max_size must be positive")
    out: list[Ty] = []
    for n in range(1, max_size + 1):
        out.extend(types_of_size(n))
    return out


def show_type(t: Ty) -> str:
    if t is UNIT:
        return "unit"
    if not isinstance(t, Arrow):
        return getattr(t, "name", "?")
    parts = []
    while isinstance(t, Arrow):
        parts.append(show_type(t.dom))
        t = t.cod
    parts.append(show_type(t))
    return "(-> " + " ".join(parts) + ")"


class TypeSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def _tokens(src: str) -> Iterator[tuple[str, int]]:
    i = 0
    while i < len(src):
        c = src[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c, i
            i += 1
        else:
            j = i
            while j < len(src) and not src[j].isspace() and src[j] not in "()":
                j += 1
            yield src[i:j], i
            i = j


class TypeReader:
    """Recursive-descent reader over a token stream shared with the term parser.

    ``variables`` maps names such as ``T1`` to the value a type variable stands for;
    the law module uses this to read type expressions inside rule templates.
    """

    def __init__(self, src: str, variables: dict | None = None):
        self.src = src
        self.toks = list(_tokens(src))
        self.i = 0
        self.variables = variables or {}

    def peek(self) -> tuple[str, int]:
        if self.i < len(self.toks):
            return self.toks[self.i]
        return "", len(self.src)

    def next(self) -> tuple[str, int]:
        tok = self.peek()
        self.i += 1
        return tok

    def read(self):
        tok, pos = self.next()
        if tok == "unit":
            return UNIT
        if tok in self.variables:
            return self.variables[tok]
        if tok == "(":
            head, hpos = self.next()
            if head != "->":
                raise TypeSyntaxError(f"expected '->' but found {head!r}", hpos)
            parts = []
            while self.peek()[0] != ")":
                if self.peek()[0] == "":
                    raise TypeSyntaxError("unterminated arrow type", len(self.src))
                parts.append(self.read())
            self.next()
            if len(parts) < 2:
                raise TypeSyntaxError("arrow type needs at least two components", pos)
            return self.make_arrow(parts)
        if tok == "":
            raise TypeSyntaxError("unexpected end of type", pos)
        raise TypeSyntaxError(f"unknown type {tok!r}", pos)

    def make_arrow(self, parts):
        return arrow(*parts)


def parse_type(src: str) -> Ty:
    r = TypeReader(src)
    t = r.read()
    tok, pos = r.peek()
    if tok:
        raise TypeSyntaxError(f"trailing input {tok!r}", pos)
    return t
