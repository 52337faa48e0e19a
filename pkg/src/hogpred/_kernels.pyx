# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels over integer transition tables.

Tables (all int64 unless noted):
  step_ptr/step_res   CSR: unlabelled step targets of each member, -1 = outside universe
  app_ptr/app_label/app_res   CSR: (label, result) pairs of each function member
Predicates are uint8 masks indexed by member id.
"""

import numpy as np

cimport cython
from libc.stdint cimport int64_t, uint8_t


def gfp_relative(const int64_t[::1] step_ptr, const int64_t[::1] step_res,
                 const int64_t[::1] app_ptr, const int64_t[::1] app_label,
                 const int64_t[::1] app_res, const uint8_t[::1] S, const uint8_t[::1] P):
    """Greatest G <= P with G closed under the lifting relative to S; returns (G, sweeps)."""
    cdef Py_ssize_t n = P.shape[0]
    cdef Py_ssize_t i, k
    cdef int64_t r
    cdef bint ok, changed = True
    cdef int sweeps = 0
    G_arr = np.array(P, dtype=np.uint8, copy=True)
    H_arr = np.empty(n, dtype=np.uint8)
    cdef uint8_t[::1] G = G_arr
    cdef uint8_t[::1] H = H_arr
    while changed:
        changed = False
        sweeps += 1
        for i in range(n):
            if not G[i]:
                H[i] = 0
                continue
            ok = True
            for k in range(step_ptr[i], step_ptr[i + 1]):
                r = step_res[k]
                if r < 0 or not G[r]:
                    ok = False
                    break
            if ok:
                for k in range(app_ptr[i], app_ptr[i + 1]):
                    if S[app_label[k]]:
                        r = app_res[k]
                        if r < 0 or not G[r]:
                            ok = False
                            break
            H[i] = 1 if ok else 0
            if not ok:
                changed = True
        G[:] = H
    return G_arr, sweeps


def steps_to_value(const signed char[::1] kind, const int64_t[::1] step, int64_t fuel):
    """Steps until a value for each member of a deterministic table.

    ``kind``: 0 step, 1 done, 2 function, 3 stuck. ``step``: target id, or -1
    outside the universe. Result: step count, -1 stuck, -2 escaped, -3 no value
    within ``fuel`` (including cycles).
    """
    cdef Py_ssize_t n = kind.shape[0]
    out_arr = np.full(n, -4, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    path_arr = np.empty(n + 1, dtype=np.int64)
    cdef int64_t[::1] path = path_arr
    cdef Py_ssize_t i, j, m, plen
    cdef int64_t base
    for i in range(n):
        if out[i] != -4:
            continue
        plen = 0
        j = i
        base = -5
        while True:
            if out[j] != -4:
                base = out[j]
                break
            if kind[j] == 1 or kind[j] == 2:
                out[j] = 0
                base = 0
                break
            if kind[j] == 3:
                out[j] = -1
                base = -1
                break
            if step[j] < 0:
                out[j] = -2
                base = -2
                break
            if plen > fuel:
                base = -6  # fuel cut: only the start is decided
                break
            path[plen] = j
            plen += 1
            out[j] = -5  # on the current path
            j = step[j]
            if out[j] == -5:
                base = -3
                break
        if base == -6:
            for m in range(plen):
                out[path[m]] = -4
            out[i] = -3
            continue
        for m in range(plen - 1, -1, -1):
            if base >= 0:
                base += 1
                if base > fuel:
                    base = -3
            out[path[m]] = base
    return out_arr
