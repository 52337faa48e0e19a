"""Integer transition tables of a law over a universe, the input format of the kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .behaviour import Fun, Step, Stuck, UnitDone
from .law import Law, get_law
from .syntax import Universe

STEP, DONE, FUN, STUCK = 0, 1, 2, 3


@dataclass
class Tables:
    kind: np.ndarray  # int8 per member; for powerset laws the kind of the first behaviour
    step1: np.ndarray  # deterministic step target, -1 outside universe, -2 no step
    step_ptr: np.ndarray
    step_res: np.ndarray
    app_ptr: np.ndarray
    app_label: np.ndarray
    app_res: np.ndarray
    escapes: int
    n: int


def _behaviours(b):
    return tuple(b) if isinstance(b, frozenset) else (b,)


def build_tables(law: Law, u: Universe) -> Tables:
    """Tabulate every member's behaviours; function members are applied to their label slice."""
    key = ("tables", law.name, id(law), len(u))
    hit = u._tables.get(key)
    if hit is not None:
        return hit
    n = len(u)
    index = u.index
    kind = np.empty(n, dtype=np.int8)
    step1 = np.full(n, -2, dtype=np.int64)
    step_ptr = [0]
    step_res: list[int] = []
    app_ptr = [0]
    app_label: list[int] = []
    app_res: list[int] = []
    escapes = 0
    for i, t in enumerate(u.terms):
        bs = _behaviours(law.gamma(t))
        first = bs[0] if bs else Stuck
        kind[i] = STEP if isinstance(first, Step) else DONE if first is UnitDone else FUN if isinstance(first, Fun) else STUCK
        for b in bs:
            if isinstance(b, Step):
                j = index.get(b.target, -1)
                escapes += j < 0
                step_res.append(j)
                if step1[i] == -2:
                    step1[i] = j
            elif isinstance(b, Fun):
                for s_id in u.label_slice(t.ty.dom):
                    j = index.get(b(u.terms[s_id]), -1)
                    escapes += j < 0
                    app_label.append(s_id)
                    app_res.append(j)
        step_ptr.append(len(step_res))
        app_ptr.append(len(app_res))
    out = Tables(
        kind,
        step1,
        np.asarray(step_ptr, dtype=np.int64),
        np.asarray(step_res, dtype=np.int64),
        np.asarray(app_ptr, dtype=np.int64),
        np.asarray(app_label, dtype=np.int64),
        np.asarray(app_res, dtype=np.int64),
        int(escapes),
        n,
    )
    u._tables[key] = out
    return out


def gfp(law, u: Universe, S: np.ndarray, P: np.ndarray) -> tuple[np.ndarray, int]:
    t = build_tables(get_law(law), u)
    return kernels.gfp_relative(
        t.step_ptr, t.step_res, t.app_ptr, t.app_label, t.app_res,
        np.ascontiguousarray(S, dtype=np.uint8), np.ascontiguousarray(P, dtype=np.uint8),
    )


def steps_table(law, u: Universe, fuel: int) -> np.ndarray:
    """Per-member step count to a value (negative codes as in the kernel)."""
    law = get_law(law)
    if law.powerset:
        raise ValueError("steps_table needs a deterministic law")
    t = build_tables(law, u)
    step = np.where(t.step1 == -2, -1, t.step1)
    return kernels.steps_to_value(t.kind, np.ascontiguousarray(step), int(fuel))
