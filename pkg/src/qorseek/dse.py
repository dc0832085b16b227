"""Multi-objective Bayesian design-space exploration with Monte-Carlo EHVI.

One independent Gaussian process per QoR metric, fitted on log1p-scaled
targets.  Each step scores a random pool of unevaluated configs by the
expected hypervolume improvement of their posterior draws and synthesizes
the winner.  Produces the QoR-labeled corpus consumed by the reward model.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import math

import numpy as np

from .design_space import (
    DesignPoint, KernelDescriptor, PragmaConfig, SpaceOverflowError,
    enumerate_space, render_design, space_dimensions, space_size,
)
from . import _kernels
from .pareto import hypervolume, pareto_front_indices
from .synth_oracle import QorVector, SynthesisBackend

N_OBJECTIVES = 5
RBF_LENGTH_SCALE = 0.5
GP_JITTER = 1e-6
INIT_EVALS = 4
POOL_SIZE = 256
EHVI_SAMPLES = 64
REF_MARGIN = 1.1


def encode_config(kernel: KernelDescriptor, config: PragmaConfig,
                  ii_choices: Sequence[int] = (1, 2, 4)) -> np.ndarray:
    """Map a config to a fixed-length vector in [0,1]^k, one slot per
    pragma dimension (choice index over the dimension's ladder).

    The unroll ladder is power-of-two, so an index slot is log-scaled in
    the factor.  Injective: the index recovers the choice exactly.
    """
    dims = space_dimensions(kernel, ii_choices)
    cfg_loops = dict(config.loops)
    cfg_arrays = dict(config.arrays)
    out = np.zeros(len(dims))
    for slot, (kind, name, choices) in enumerate(dims):
        if kind == "loop_unroll":
            pick = cfg_loops[name].unroll_factor
        elif kind == "loop_pipe":
            lp = cfg_loops[name]
            pick = (lp.pipeline, lp.ii)
        else:
            pick = cfg_arrays[name]
        idx = choices.index(pick)
        out[slot] = idx / max(1, len(choices) - 1)
    return out


class SurrogateModel:
    """Independent per-objective GPs with an RBF kernel on [0,1]^k inputs.

    Targets are log1p-transformed then standardized; predictions are
    returned in log1p space.
    """

    def __init__(self, inputs: np.ndarray, targets_log: np.ndarray,
                 length_scale: float = RBF_LENGTH_SCALE,
                 jitter: float = GP_JITTER):
        if inputs.shape[0] < 2:
            raise ValueError("surrogate needs at least 2 evaluated points")
        self.inputs = inputs
        self.length_scale = length_scale
        self.jitter = jitter
        self.mean = targets_log.mean(axis=0)
        std = targets_log.std(axis=0)
        self.std = np.where(std > 0, std, 1.0)
        self.targets_norm = (targets_log - self.mean) / self.std
        k = self._kernel(inputs, inputs)
        k[np.diag_indices_from(k)] += jitter
        self.chol = np.linalg.cholesky(k)
        # alpha: (n, n_obj), one solve per objective via shared factor
        self.alpha = np.linalg.solve(
            self.chol.T, np.linalg.solve(self.chol, self.targets_norm))

    def _kernel(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-0.5 * d2 / self.length_scale ** 2)

    def predict(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance per objective, in log1p space.

        x: (m, k).  Returns mean (m, n_obj) and variance (m, n_obj); the
        variance is shared across objectives (same kernel) but broadcast
        per objective for clarity.
        """
        ks = self._kernel(x, self.inputs)           # (m, n)
        mean_norm = ks @ self.alpha                 # (m, n_obj)
        v = np.linalg.solve(self.chol, ks.T)        # (n, m)
        var = np.maximum(1.0 - (v ** 2).sum(axis=0), self.jitter)
        mean = mean_norm * self.std + self.mean
        var_obj = var[:, None] * (self.std ** 2)[None, :]
        return mean, var_obj


def fit_surrogate(evaluated: Sequence[Tuple[np.ndarray, QorVector]]
                  ) -> SurrogateModel:
    """Fit the per-objective GPs on (encoding, QoR) pairs."""
    inputs = np.array([enc for enc, _ in evaluated], dtype=float)
    targets = np.log1p(np.array(
        [q.as_tuple() for _, q in evaluated], dtype=float))
    return SurrogateModel(inputs, targets)


def ehvi(candidate: np.ndarray, model: SurrogateModel,
         front_log: np.ndarray, ref_log: np.ndarray,
         n_samples: int = EHVI_SAMPLES, seed: int = 0) -> float:
    """Monte-Carlo expected hypervolume improvement in log1p space.

    Draws n_samples posterior objective vectors and averages the exact
    hypervolume gain each one would add to the current front.
    """
    mean, var = model.predict(candidate[None, :])
    rng = np.random.default_rng(seed)
    draws = rng.normal(mean[0], np.sqrt(var[0]),
                       size=(n_samples, N_OBJECTIVES))
    gains = _kernels.hv_improvement_batch(
        draws, np.asarray(front_log, dtype=float),
        np.asarray(ref_log, dtype=float))
    return float(gains.mean())


@dataclass
class DseRecord:
    design: DesignPoint
    qor: QorVector
    functional: bool
    step: int


@dataclass
class DseCorpus:
    kernel: KernelDescriptor
    records: List[DseRecord] = field(default_factory=list)
    # per-step (step index, chosen config key, ehvi value, raw-space HV)
    log: List[Tuple[int, str, float, float]] = field(default_factory=list)

    def qors(self) -> List[QorVector]:
        return [r.qor for r in self.records]


def _raw_front_hv(qors: Sequence[QorVector]) -> float:
    pts = np.array([q.as_tuple() for q in qors], dtype=float)
    ref = REF_MARGIN * pts.max(axis=0) + 1.0
    idx = pareto_front_indices(list(qors))
    return hypervolume(pts[idx], ref)


def run_dse(kernel: KernelDescriptor, backend: SynthesisBackend,
            budget_k: int, seed: int,
            pool_size: int = POOL_SIZE,
            ehvi_samples: int = EHVI_SAMPLES) -> DseCorpus:
    """EHVI-guided exploration of one kernel's pragma space.

    Starts from INIT_EVALS random configs, then repeatedly fits the
    surrogate, scores a random unevaluated pool, and evaluates the
    argmax-EHVI config.  Returns early once the space is exhausted.
    """
    if budget_k < INIT_EVALS:
        raise ValueError(f"budget_k must be >= {INIT_EVALS}")
    try:
        all_configs = enumerate_space(kernel)
    except SpaceOverflowError:
        all_configs = None
    rng = np.random.default_rng(seed)
    corpus = DseCorpus(kernel=kernel)
    seen: Dict[str, int] = {}

    def evaluate(config: PragmaConfig, step: int, score: float) -> None:
        design = render_design(kernel, config)
        verdict = backend.evaluate(design)
        assert verdict.qor is not None
        corpus.records.append(DseRecord(
            design=design, qor=verdict.qor,
            functional=verdict.functional, step=step))
        seen[config.key()] = step
        corpus.log.append(
            (step, config.key(), score, _raw_front_hv(corpus.qors())))

    if all_configs is None:
        raise SpaceOverflowError(
            "run_dse requires an enumerable space at desk scale")
    order = rng.permutation(len(all_configs))
    n_init = min(INIT_EVALS, len(all_configs))
    for step in range(n_init):
        evaluate(all_configs[order[step]], step, float("nan"))

    step = n_init
    while step < min(budget_k, len(all_configs)):
        remaining = [c for c in all_configs if c.key() not in seen]
        if not remaining:
            break
        evaluated = [
            (encode_config(kernel, r.design.config), r.qor)
            for r in corpus.records]
        model = fit_surrogate(evaluated)
        targets_log = np.log1p(np.array(
            [q.as_tuple() for q in corpus.qors()], dtype=float))
        ref_log = REF_MARGIN * targets_log.max(axis=0) + 1e-9
        front_idx = pareto_front_indices(corpus.qors())
        front_log = targets_log[front_idx]
        pool_n = min(pool_size, len(remaining))
        pool_idx = rng.choice(len(remaining), size=pool_n, replace=False)
        best: Optional[PragmaConfig] = None
        best_score = -math.inf
        for j, pi in enumerate(sorted(pool_idx)):
            cand = remaining[pi]
            score = ehvi(encode_config(kernel, cand), model,
                         front_log, ref_log, n_samples=ehvi_samples,
                         seed=int(seed * 100003 + step * 257 + j))
            if score > best_score:
                best_score = score
                best = cand
        assert best is not None
        evaluate(best, step, best_score)
        step += 1
    return corpus
