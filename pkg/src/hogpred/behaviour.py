"""One-step observations of a term (the ``Y + D(X, Y)`` shape plus a stuck marker)."""

from __future__ import annotations

from typing import Callable


class Behaviour:
    __slots__ = ()
    is_value = False


class Step(Behaviour):
    __slots__ = ("target",)

    def __init__(self, target):
        self.target = target

    def __eq__(self, other):
        return isinstance(other, Step) and other.target is self.target

    def __hash__(self):
        return hash(("step", self.target))

    def __repr__(self):
        return f"Step({self.target!r})"


class _UnitDone(Behaviour):
    __slots__ = ()
    is_value = True

    def __repr__(self):
        return "UnitDone"

    def __reduce__(self):
        return (_unit_done, ())


UnitDone = _UnitDone()


def _unit_done():
    return UnitDone


class Fun(Behaviour):
    """A function value ``label -> result``.

    ``key`` identifies the closure (rule and bindings) so that behaviour sets of
    nondeterministic laws can hold several functions without comparing them
    extensionally.
    """

    __slots__ = ("apply", "key")
    is_value = True

    def __init__(self, apply: Callable, key=None):
        self.apply = apply
        self.key = key if key is not None else id(apply)

    def __call__(self, label):
        return self.apply(label)

    def __eq__(self, other):
        return isinstance(other, Fun) and other.key == self.key

    def __hash__(self):
        return hash(("fun", self.key))

    def __repr__(self):
        return f"Fun<{self.key!r}>"


class _Stuck(Behaviour):
    __slots__ = ()

    def __repr__(self):
        return "Stuck"

    def __reduce__(self):
        return (_stuck, ())


Stuck = _Stuck()


def _stuck():
    return Stuck
