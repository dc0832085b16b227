"""Pure-numpy implementations of the hot Pareto kernels.

Mirrors the signatures of the compiled `_core` extension; selected at
import time by the package __init__ when the extension is unavailable or
QORSEEK_PURE=1 is set.
"""

import numpy as np

IMPLEMENTATION = "python"


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """Strict Pareto dominance for minimization: <= everywhere, < somewhere."""
    return bool(np.all(a <= b) and np.any(a < b))


def front_mask(points: np.ndarray) -> np.ndarray:
    """Boolean mask of non-dominated rows; QoR-duplicates keep first only."""
    n = points.shape[0]
    mask = np.ones(n, dtype=bool)
    for i in range(n):
        if not mask[i]:
            continue
        p = points[i]
        le = np.all(points <= p, axis=1)
        lt = np.any(points < p, axis=1)
        if np.any(le & lt):
            mask[i] = False
            continue
        dup = np.all(points[:i] == p, axis=1)
        if dup.any():
            mask[i] = False
    return mask


def hv_improvement_batch(draws: np.ndarray, front: np.ndarray,
                         ref: np.ndarray, exact_max: int = 12) -> np.ndarray:
    """Exact hypervolume gain each draw would add to the front.

    For each draw y the gain is the volume of [y, ref] not covered by any
    existing [p, ref] box: inclusion-exclusion over the pruned corner set
    max(p, y).  When more than exact_max corners survive pruning, only the
    exact_max largest-volume corners are kept (a deterministic
    overestimate used for acquisition ranking only).
    """
    n_draws, d = draws.shape
    out = np.zeros(n_draws)
    for s in range(n_draws):
        y = draws[s]
        if np.any(y >= ref):
            continue
        box = float(np.prod(ref - y))
        if len(front) == 0:
            out[s] = box
            continue
        if np.any(np.all(front <= y, axis=1)):
            continue
        corners = np.maximum(front, y)
        keep: list = []
        for i in range(corners.shape[0]):
            c = corners[i]
            le = np.all(corners <= c, axis=1)
            le[i] = False
            if np.any(le & np.any(corners < c, axis=1)):
                continue
            if any(np.array_equal(corners[j], c) for j in keep):
                continue
            keep.append(i)
        kept = corners[keep]
        if kept.shape[0] > exact_max:
            vols = np.prod(ref - kept, axis=1)
            order = np.argsort(-vols, kind="stable")[:exact_max]
            kept = kept[np.sort(order)]
        m = kept.shape[0]
        covered = 0.0
        for bits in range(1, 1 << m):
            corner = kept[[i for i in range(m) if bits >> i & 1]].max(axis=0)
            vol = float(np.prod(ref - corner))
            covered += vol if bin(bits).count("1") % 2 == 1 else -vol
        gain = box - covered
        if gain > 0.0:
            out[s] = gain
    return out


def min_scaled_distances(points: np.ndarray, front: np.ndarray,
                         inv_scale: np.ndarray) -> np.ndarray:
    """Per-row min L2 distance to the front after per-metric scaling.

    inv_scale holds 1/(f_max - f_min) with 0 on degenerate metrics, so
    those metrics contribute nothing.
    """
    sp = points * inv_scale
    sf = front * inv_scale
    out = np.empty(points.shape[0])
    for i in range(sp.shape[0]):
        d = sf - sp[i]
        out[i] = np.sqrt(np.min(np.einsum("ij,ij->i", d, d)))
    return out
