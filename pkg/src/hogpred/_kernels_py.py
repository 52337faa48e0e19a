"""Reference kernels in Python/numpy; same contracts as the compiled ``_kernels``."""

from __future__ import annotations

import numpy as np


def _owners(ptr: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(len(ptr) - 1, dtype=np.int64), np.diff(ptr))


def gfp_relative(step_ptr, step_res, app_ptr, app_label, app_res, S, P):
    """Greatest G <= P with G closed under the lifting relative to S; returns (G, sweeps)."""
    n = len(P)
    G = np.array(P, dtype=np.uint8, copy=True)
    step_own = _owners(np.asarray(step_ptr))
    app_own = _owners(np.asarray(app_ptr))
    step_res = np.asarray(step_res)
    app_res = np.asarray(app_res)
    step_esc = step_res < 0
    # only pairs whose label is in S constrain the result
    live = np.asarray(S, dtype=bool)[np.asarray(app_label)]
    app_own, app_res = app_own[live], app_res[live]
    app_esc = app_res < 0
    safe_step = np.where(step_esc, 0, step_res)
    safe_app = np.where(app_esc, 0, app_res)
    sweeps = 0
    while True:
        sweeps += 1
        bad_step = step_esc | (G[safe_step] == 0)
        bad_app = app_esc | (G[safe_app] == 0)
        fails = np.bincount(step_own[bad_step], minlength=n) + np.bincount(app_own[bad_app], minlength=n)
        H = (G.astype(bool) & (fails == 0)).astype(np.uint8)
        if np.array_equal(H, G):
            return G, sweeps
        G = H


def steps_to_value(kind, step, fuel):
    """Steps until a value; -1 stuck, -2 escaped, -3 no value within ``fuel``."""
    kind = np.asarray(kind)
    step = np.asarray(step)
    n = len(kind)
    out = [-4] * n
    for i in range(n):
        if out[i] != -4:
            continue
        path = []
        on_path = set()
        j = i
        while True:
            if out[j] != -4:
                base = out[j]
                break
            k = kind[j]
            if k == 1 or k == 2:
                base = out[j] = 0
                break
            if k == 3:
                base = out[j] = -1
                break
            if step[j] < 0:
                base = out[j] = -2
                break
            if len(path) > fuel:
                base = None
                break
            path.append(j)
            on_path.add(j)
            j = int(step[j])
            if j in on_path:
                base = -3
                break
        if base is None:
            out[i] = -3
            continue
        for m in reversed(path):
            if base >= 0:
                base += 1
                if base > fuel:
                    base = -3
            out[m] = base
    return np.array(out, dtype=np.int64)
