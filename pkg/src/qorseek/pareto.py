"""Pareto dominance, front extraction, hypervolume, and QD sampling.

All metrics are minimized.  The proximity distance normalizes each metric
by its observed range across every evaluated design; metrics with zero
range contribute nothing.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple
import itertools

import numpy as np

from . import _kernels
from .synth_oracle import QorVector

EXACT_HV_MAX_FRONT = 12
MC_HV_SAMPLES = 100_000


@dataclass(frozen=True)
class NormalizationBounds:
    f_max: QorVector
    f_min: QorVector

    def __post_init__(self):
        if any(hi < lo for hi, lo in
               zip(self.f_max.as_tuple(), self.f_min.as_tuple())):
            raise ValueError("f_max must be >= f_min component-wise")

    @staticmethod
    def from_points(points: Sequence[QorVector]) -> "NormalizationBounds":
        arr = np.array([p.as_tuple() for p in points], dtype=float)
        return NormalizationBounds(
            f_max=QorVector(*(int(v) for v in arr.max(axis=0))),
            f_min=QorVector(*(int(v) for v in arr.min(axis=0))),
        )

    def inv_scale(self) -> np.ndarray:
        """1/(f_max - f_min) per metric, 0 where the range is degenerate."""
        span = (np.array(self.f_max.as_tuple(), dtype=float)
                - np.array(self.f_min.as_tuple(), dtype=float))
        out = np.zeros_like(span)
        np.divide(1.0, span, out=out, where=span > 0)
        return out


@dataclass(frozen=True)
class QdSamplingConfig:
    k_near: int = 8
    epsilon: float = 0.25

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.k_near < 0:
            raise ValueError("k_near must be >= 0")


def dominates(a: QorVector, b: QorVector) -> bool:
    """True iff a <= b on all five metrics and a < b on at least one."""
    return _kernels.dominates(
        np.array(a.as_tuple(), dtype=float),
        np.array(b.as_tuple(), dtype=float))


def _qor_matrix(qors: Sequence[QorVector]) -> np.ndarray:
    return np.array([q.as_tuple() for q in qors], dtype=float)


def pareto_front_indices(qors: Sequence[QorVector]) -> List[int]:
    """Indices of the non-dominated entries, QoR-duplicates kept once."""
    if not qors:
        return []
    mask = _kernels.front_mask(_qor_matrix(qors))
    return [i for i in range(len(qors)) if mask[i]]


def pareto_front(designs: Sequence[Tuple[object, QorVector]]
                 ) -> List[Tuple[object, QorVector]]:
    """Exactly the entries whose QoR no other entry dominates."""
    idx = pareto_front_indices([q for _, q in designs])
    return [designs[i] for i in idx]


def pareto_distance(p: QorVector, front: Sequence[QorVector],
                    bounds: NormalizationBounds) -> float:
    """Min over the front of the range-normalized L2 distance (Eq. style)."""
    if not front:
        raise ValueError("front must be non-empty")
    d = _kernels.min_scaled_distances(
        np.array([p.as_tuple()], dtype=float),
        _qor_matrix(front), bounds.inv_scale())
    return float(d[0])


def qd_sample(designs: Sequence[Tuple[object, QorVector]],
              config: QdSamplingConfig,
              bounds: NormalizationBounds) -> List[Tuple[object, QorVector]]:
    """Pareto-proximal quality-diversity selection.

    Keeps the whole front, then up to k_near extra designs: candidates
    within epsilon of the front by normalized distance, picked greedily to
    maximize the minimum normalized L2 distance to everything already
    selected.  Ties break toward earlier input order.
    """
    if not designs:
        raise ValueError("designs must be non-empty")
    qors = [q for _, q in designs]
    pts = _qor_matrix(qors)
    inv = bounds.inv_scale()
    front_idx = pareto_front_indices(qors)
    front_pts = pts[front_idx]

    selected = list(front_idx)
    remaining = [i for i in range(len(designs)) if i not in set(front_idx)]
    if remaining and config.k_near > 0:
        dists = _kernels.min_scaled_distances(pts[remaining], front_pts, inv)
        candidates = [i for i, d in zip(remaining, dists) if d < config.epsilon]
        scaled = pts * inv
        for _ in range(config.k_near):
            if not candidates:
                break
            best_i = None
            best_score = -1.0
            for i in candidates:
                diff = scaled[selected] - scaled[i]
                score = float(np.sqrt(
                    np.min(np.einsum("ij,ij->i", diff, diff))))
                if score > best_score:
                    best_score = score
                    best_i = i
            selected.append(best_i)
            candidates.remove(best_i)
    return [designs[i] for i in selected]


def hypervolume(front: Sequence[Sequence[float]],
                ref_point: Sequence[float],
                mc_seed: int = 0,
                exact_max_front: int = EXACT_HV_MAX_FRONT,
                mc_samples: int = MC_HV_SAMPLES) -> float:
    """Measure of the union of boxes [point, ref] (minimization).

    Exact inclusion-exclusion up to `exact_max_front` points, otherwise a
    deterministic-seed Monte Carlo estimate.
    """
    pts = np.array(front, dtype=float)
    ref = np.array(ref_point, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("front must be a non-empty 2-D point set")
    if np.any(pts >= ref):
        raise ValueError("every front point must strictly dominate ref_point")
    n = pts.shape[0]
    if n <= exact_max_front:
        total = 0.0
        for r in range(1, n + 1):
            sign = 1.0 if r % 2 == 1 else -1.0
            for subset in itertools.combinations(range(n), r):
                corner = pts[list(subset)].max(axis=0)
                total += sign * float(np.prod(ref - corner))
        return total
    return monte_carlo_hypervolume(pts, ref, seed=mc_seed, samples=mc_samples)


def monte_carlo_hypervolume(front: Sequence[Sequence[float]],
                            ref_point: Sequence[float],
                            seed: int = 0,
                            samples: int = MC_HV_SAMPLES) -> float:
    """Hit-or-miss estimate over the bounding box [min(front), ref]."""
    pts = np.array(front, dtype=float)
    ref = np.array(ref_point, dtype=float)
    lo = pts.min(axis=0)
    box_vol = float(np.prod(ref - lo))
    if box_vol == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    draws = rng.uniform(lo, ref, size=(samples, pts.shape[1]))
    # A draw is covered if some front point is <= it on all coordinates.
    covered = np.zeros(samples, dtype=bool)
    for p in pts:
        covered |= np.all(draws >= p, axis=1)
    return box_vol * float(covered.mean())
