"""Proxy QoR reward assembly with uncertainty-aware synthesis switching.

Round-robin pairwise win rates over the functionally correct members of a
group; candidates whose MC-dropout score variance exceeds the threshold
are synthesized for real (memoized through the replay buffer), and the
buffer periodically fine-tunes the reward model online.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import json

import numpy as np

from .design_space import DesignPoint
from .pareto import dominates
from .reward_model import (
    CorpusEntry, LossConfig, RewardModelParams, TokenizedDesign, build_pairs,
    fine_tune, mc_scores, tokenize,
)
from .synth_oracle import QorVector, SynthesisBackend, SynthesisVerdict


@dataclass(frozen=True)
class UncertaintyConfig:
    tau_u: float = 0.1
    m_passes: int = 10
    k_update: int = 100
    online_lr: float = 1e-3
    online_steps: int = 50
    online_enabled: bool = True
    force_real: bool = False
    max_online_pairs: int = 512

    def __post_init__(self):
        if self.tau_u <= 0:
            raise ValueError("tau_u must be > 0")
        if self.m_passes < 2:
            raise ValueError("m_passes must be >= 2")


@dataclass
class ReplayBuffer:
    """Ground-truth-labeled designs, deduplicated by (kernel, config)."""
    entries: List[Tuple[DesignPoint, QorVector]] = field(default_factory=list)
    _keys: set = field(default_factory=set)

    def key_of(self, design: DesignPoint) -> Tuple[str, str]:
        return (design.kernel.name, design.config.key())

    def lookup(self, design: DesignPoint) -> Optional[QorVector]:
        key = self.key_of(design)
        if key not in self._keys:
            return None
        for d, q in self.entries:
            if self.key_of(d) == key:
                return q
        return None

    def add(self, design: DesignPoint, qor: QorVector) -> bool:
        key = self.key_of(design)
        if key in self._keys:
            return False
        self._keys.add(key)
        self.entries.append((design, qor))
        return True

    def __len__(self) -> int:
        return len(self.entries)

    def save_jsonl(self, path: str) -> None:
        from .design_space import serialize_kernel_descriptor
        with open(path, "w") as f:
            for d, q in self.entries:
                rec = {
                    "kernel": serialize_kernel_descriptor(d.kernel),
                    "config": d.config.key(),
                    "code": d.rendered_code,
                    "qor": list(q.as_tuple()),
                }
                f.write(json.dumps(rec, sort_keys=True) + "\n")


@dataclass
class StepTelemetry:
    step: int
    group_size: int
    n_correct: int
    n_flagged: int
    synth_calls: int
    trigger_rate: float


@dataclass
class RouterTelemetry:
    steps: List[StepTelemetry] = field(default_factory=list)
    synth_calls_cum: int = 0
    synth_seconds_cum: float = 0.0

    def record(self, step: int, group_size: int, n_correct: int,
               n_flagged: int, synth_calls: int,
               cost_seconds: float) -> None:
        self.synth_calls_cum += synth_calls
        self.synth_seconds_cum += synth_calls * cost_seconds
        rate = n_flagged / n_correct if n_correct > 0 else 0.0
        self.steps.append(StepTelemetry(
            step=step, group_size=group_size, n_correct=n_correct,
            n_flagged=n_flagged, synth_calls=synth_calls, trigger_rate=rate))


@dataclass
class Candidate:
    """One group member with its verdict, as seen by the reward router."""
    design: DesignPoint
    verdict: SynthesisVerdict

    @property
    def functional(self) -> bool:
        return self.verdict.functional


def real_pref(qor_i: QorVector, qor_j: QorVector) -> float:
    """Ground-truth pairwise outcome on the two-tier scale."""
    if dominates(qor_i, qor_j):
        return 1.0
    if dominates(qor_j, qor_i):
        return 0.0
    if qor_i.latency_cycles < qor_j.latency_cycles:
        return 1.0
    if qor_j.latency_cycles < qor_i.latency_cycles:
        return 0.0
    return 0.5


def compute_rq(candidates: Sequence[Candidate],
               params: RewardModelParams,
               backend: SynthesisBackend,
               ucfg: UncertaintyConfig,
               telemetry: RouterTelemetry,
               buffer: ReplayBuffer,
               step: int = 0,
               seed: int = 0) -> List[float]:
    """Round-robin QoR reward for a group.

    Non-functional candidates get 0; a lone functional candidate gets 1.
    Otherwise each pair contributes either a ground-truth comparison (when
    both sides have real QoR, from a flagged synthesis or a buffer hit) or
    the mean Bradley-Terry preference over the M dropout passes.
    """
    correct = [i for i, c in enumerate(candidates) if c.functional]
    rq = [0.0] * len(candidates)
    if not correct:
        telemetry.record(step, len(candidates), 0, 0, 0,
                         backend.cost_model_seconds)
        return rq
    if len(correct) == 1:
        rq[correct[0]] = 1.0
        telemetry.record(step, len(candidates), 1, 0, 0,
                         backend.cost_model_seconds)
        return rq

    toks: Dict[int, TokenizedDesign] = {
        i: tokenize(candidates[i].design.rendered_code,
                    vocab=params.vocab, max_len=params.max_len,
                    salt=params.vocab_salt)
        for i in correct}
    passes: Dict[int, np.ndarray] = {}
    flagged: List[int] = []
    for i in correct:
        s = mc_scores(params, toks[i], ucfg.m_passes,
                      seed=seed * 100003 + step * 613 + i)
        passes[i] = s
        u = float(s.var())
        if ucfg.force_real or u > ucfg.tau_u:
            flagged.append(i)

    real_qor: Dict[int, QorVector] = {}
    synth_calls = 0
    for i in flagged:
        design = candidates[i].design
        hit = buffer.lookup(design)
        if hit is not None:
            real_qor[i] = hit
            continue
        verdict = backend.evaluate(design)
        synth_calls += 1
        if verdict.qor is not None:
            real_qor[i] = verdict.qor
            buffer.add(design, verdict.qor)

    n = len(correct)
    for a in range(n):
        i = correct[a]
        acc = 0.0
        for b in range(n):
            if a == b:
                continue
            j = correct[b]
            if i in real_qor and j in real_qor:
                p_ij = real_pref(real_qor[i], real_qor[j])
            else:
                diffs = passes[i] - passes[j]
                p_ij = float(np.mean(1.0 / (1.0 + np.exp(-diffs))))
            acc += p_ij
        rq[i] = acc / (n - 1)
    telemetry.record(step, len(candidates), n, len(flagged), synth_calls,
                     backend.cost_model_seconds)
    return rq


def buffer_pairs(buffer: ReplayBuffer, loss_cfg: LossConfig,
                 params: RewardModelParams):
    entries = [CorpusEntry(kernel=d.kernel.name, text=d.rendered_code, qor=q)
               for d, q in buffer.entries]
    return build_pairs(entries, loss_cfg, vocab=params.vocab,
                       max_len=params.max_len, salt=params.vocab_salt)


def maybe_online_update(params: RewardModelParams, buffer: ReplayBuffer,
                        ucfg: UncertaintyConfig, global_step: int,
                        loss_cfg: Optional[LossConfig] = None,
                        seed: int = 0) -> RewardModelParams:
    """Fine-tune on replay-buffer pairs at scheduled steps; no-op otherwise."""
    if not ucfg.online_enabled:
        return params
    if global_step % ucfg.k_update != 0 or global_step == 0:
        return params
    if len(buffer) < 2:
        return params
    loss_cfg = loss_cfg or LossConfig()
    pairs = buffer_pairs(buffer, loss_cfg, params)
    if not pairs:
        return params
    if len(pairs) > ucfg.max_online_pairs:
        rng = np.random.default_rng(
            np.random.SeedSequence((seed, global_step)))
        idx = rng.choice(len(pairs), size=ucfg.max_online_pairs,
                         replace=False)
        pairs = [pairs[i] for i in sorted(idx)]
    return fine_tune(params, pairs, steps=ucfg.online_steps,
                     learning_rate=ucfg.online_lr,
                     seed=seed * 31 + global_step, loss_cfg=loss_cfg)


def trigger_rate_report(telemetry: RouterTelemetry, window: int
                        ) -> List[Tuple[int, int, float]]:
    """Mean trigger rate per non-overlapping window of steps.

    Returns (window_start, window_end_exclusive, mean_rate) rows.
    """
    if not telemetry.steps:
        raise ValueError("no telemetry recorded")
    if window < 1:
        raise ValueError("window must be >= 1")
    rows = []
    steps = telemetry.steps
    for start in range(0, len(steps), window):
        chunk = steps[start:start + window]
        rate = sum(s.trigger_rate for s in chunk) / len(chunk)
        rows.append((chunk[0].step, chunk[-1].step + 1, rate))
    return rows
