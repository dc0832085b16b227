# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Pareto kernels: dominance, front extraction, scaled distances.

Same contracts as _fallback.py; chosen at import when available.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

IMPLEMENTATION = "cython"


def dominates(cnp.ndarray a_in, cnp.ndarray b_in):
    cdef double[::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef Py_ssize_t k
    cdef bint strict = False
    for k in range(a.shape[0]):
        if a[k] > b[k]:
            return False
        if a[k] < b[k]:
            strict = True
    return bool(strict)


def front_mask(cnp.ndarray points_in):
    cdef double[:, ::1] pts = np.ascontiguousarray(points_in, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    out = np.ones(n, dtype=bool)
    cdef cnp.uint8_t[::1] mask = out.view(np.uint8)
    cdef Py_ssize_t i, j, k
    cdef bint le, lt, dup
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            le = True
            lt = False
            for k in range(d):
                if pts[j, k] > pts[i, k]:
                    le = False
                    break
                if pts[j, k] < pts[i, k]:
                    lt = True
            if le and lt:
                mask[i] = 0
                break
        if mask[i]:
            for j in range(i):
                dup = True
                for k in range(d):
                    if pts[j, k] != pts[i, k]:
                        dup = False
                        break
                if dup:
                    mask[i] = 0
                    break
    return out


def hv_improvement_batch(cnp.ndarray draws_in, cnp.ndarray front_in,
                         cnp.ndarray ref_in, int exact_max=12):
    """Exact per-draw hypervolume gain over the front (see _fallback)."""
    cdef double[:, ::1] draws = np.ascontiguousarray(draws_in, dtype=np.float64)
    cdef double[:, ::1] front = np.ascontiguousarray(front_in, dtype=np.float64)
    cdef double[::1] ref = np.ascontiguousarray(ref_in, dtype=np.float64)
    cdef Py_ssize_t n_draws = draws.shape[0]
    cdef Py_ssize_t d = draws.shape[1]
    cdef Py_ssize_t m_front = front.shape[0]
    out = np.zeros(n_draws, dtype=np.float64)
    cdef double[::1] o = out
    # corner scratch: pruned corners for one draw
    corners_arr = np.empty((m_front if m_front > 0 else 1, d), dtype=np.float64)
    cdef double[:, ::1] corners = corners_arr
    kept_arr = np.empty((m_front if m_front > 0 else 1, d), dtype=np.float64)
    cdef double[:, ::1] kept = kept_arr
    vols_arr = np.empty(m_front if m_front > 0 else 1, dtype=np.float64)
    cdef double[::1] vols = vols_arr
    cdef Py_ssize_t s, i, j, k, m, n_keep, bits, r, best
    cdef double box, covered, vol, corner_k, gain, best_vol
    cdef bint skip, le, lt, dup, dominated
    for s in range(n_draws):
        skip = False
        box = 1.0
        for k in range(d):
            if draws[s, k] >= ref[k]:
                skip = True
                break
            box *= ref[k] - draws[s, k]
        if skip:
            continue
        if m_front == 0:
            o[s] = box
            continue
        dominated = False
        for i in range(m_front):
            le = True
            for k in range(d):
                if front[i, k] > draws[s, k]:
                    le = False
                    break
            if le:
                dominated = True
                break
        if dominated:
            continue
        # corners = max(front, y)
        for i in range(m_front):
            for k in range(d):
                corner_k = front[i, k]
                if draws[s, k] > corner_k:
                    corner_k = draws[s, k]
                corners[i, k] = corner_k
        # prune corners dominated by (or duplicating) another corner
        n_keep = 0
        for i in range(m_front):
            skip = False
            for j in range(m_front):
                if j == i:
                    continue
                le = True
                lt = False
                for k in range(d):
                    if corners[j, k] > corners[i, k]:
                        le = False
                        break
                    if corners[j, k] < corners[i, k]:
                        lt = True
                if le and lt:
                    skip = True
                    break
            if not skip:
                for j in range(n_keep):
                    dup = True
                    for k in range(d):
                        if kept[j, k] != corners[i, k]:
                            dup = False
                            break
                    if dup:
                        skip = True
                        break
            if not skip:
                for k in range(d):
                    kept[n_keep, k] = corners[i, k]
                n_keep += 1
        m = n_keep
        if m > exact_max:
            # keep the exact_max largest boxes (stable selection sort)
            for i in range(m):
                vol = 1.0
                for k in range(d):
                    vol *= ref[k] - kept[i, k]
                vols[i] = vol
            for r in range(exact_max):
                best = r
                best_vol = vols[r]
                for i in range(r + 1, m):
                    if vols[i] > best_vol:
                        best = i
                        best_vol = vols[i]
                if best != r:
                    vols[best] = vols[r]
                    vols[r] = best_vol
                    for k in range(d):
                        vol = kept[r, k]
                        kept[r, k] = kept[best, k]
                        kept[best, k] = vol
            m = exact_max
        covered = 0.0
        for bits in range(1, 1 << m):
            vol = 1.0
            for k in range(d):
                corner_k = -1.0
                for i in range(m):
                    if bits >> i & 1 and kept[i, k] > corner_k:
                        corner_k = kept[i, k]
                vol *= ref[k] - corner_k
            r = 0
            i = bits
            while i:
                r += i & 1
                i >>= 1
            if r % 2 == 1:
                covered += vol
            else:
                covered -= vol
        gain = box - covered
        if gain > 0.0:
            o[s] = gain
    return out


def min_scaled_distances(cnp.ndarray points_in, cnp.ndarray front_in,
                         cnp.ndarray inv_scale_in):
    cdef double[:, ::1] pts = np.ascontiguousarray(points_in, dtype=np.float64)
    cdef double[:, ::1] fr = np.ascontiguousarray(front_in, dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(inv_scale_in, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t m = fr.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double best, acc, diff
    for i in range(n):
        best = -1.0
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = (fr[j, k] - pts[i, k]) * s[k]
                acc += diff * diff
            if best < 0.0 or acc < best:
                best = acc
        o[i] = sqrt(best)
    return out
