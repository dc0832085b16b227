"""GRPO training loop over a simulated factored policy.

The policy replaces the LLM: per kernel it holds one categorical per
pragma dimension plus Bernoulli draws for reasoning-format compliance and
dynamic allocation, so candidate generation is instantaneous and exactly
log-probable.  Exercises the four-component reward, group-relative
advantages, the clipped surrogate with exact KL to a frozen reference,
and the uncertainty-aware reward router.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import json
import re

import numpy as np

from .design_space import (
    DesignPoint, KernelDescriptor, PragmaConfig, render_design,
    space_dimensions, _assemble,
)
from .reward_model import LossConfig, RewardModelParams
from .reward_router import (
    Candidate, ReplayBuffer, RouterTelemetry, UncertaintyConfig, compute_rq,
    maybe_online_update,
)
from .synth_oracle import SynthesisBackend

FORMAT_RE = re.compile(
    r"\A\s*<think>(.+?)</think>\s*<final_code>(.+?)</final_code>\s*\Z",
    re.DOTALL)


def check_format(text: str) -> int:
    """1 iff the text is exactly a think block then a final_code block,
    both non-empty."""
    m = FORMAT_RE.match(text)
    if m is None:
        return 0
    think, code = m.groups()
    if not think.strip() or not code.strip():
        return 0
    return 1


@dataclass(frozen=True)
class RewardWeights:
    lambda_f: float = 0.1
    lambda_comp: float = 0.2
    lambda_c: float = 0.3
    lambda_q: float = 0.4

    def __post_init__(self):
        vals = (self.lambda_f, self.lambda_comp, self.lambda_c, self.lambda_q)
        if any(v < 0 for v in vals):
            raise ValueError("reward weights must be >= 0")
        if all(v == 0 for v in vals):
            raise ValueError("at least one reward weight must be > 0")


@dataclass(frozen=True)
class GrpoConfig:
    group_size: int = 4
    clip_eps: float = 0.2
    kl_beta: float = 0.02
    ppo_epochs: int = 2
    adv_eps: float = 1e-4
    policy_lr: float = 0.05
    steps: int = 0

    def __post_init__(self):
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")
        if self.clip_eps <= 0:
            raise ValueError("clip_eps must be > 0")


class SimPolicy:
    """Factored categorical policy over pragma dimensions per kernel,
    plus global format and dynamic-allocation Bernoullis."""

    def __init__(self, kernels: Sequence[KernelDescriptor],
                 format_logit: float = 0.0, alloc_logit: float = 0.0):
        self.kernels = {k.name: k for k in kernels}
        self.dims: Dict[str, list] = {
            k.name: space_dimensions(k) for k in kernels}
        self.logits: Dict[str, List[np.ndarray]] = {
            k.name: [np.zeros(len(choices)) for _, _, choices in
                     self.dims[k.name]]
            for k in kernels}
        self.format_logit = float(format_logit)
        self.alloc_logit = float(alloc_logit)

    def copy(self) -> "SimPolicy":
        clone = SimPolicy(list(self.kernels.values()),
                          self.format_logit, self.alloc_logit)
        clone.logits = {k: [z.copy() for z in v]
                        for k, v in self.logits.items()}
        return clone

    def probs(self, kernel: str) -> List[np.ndarray]:
        out = []
        for z in self.logits[kernel]:
            e = np.exp(z - z.max())
            out.append(e / e.sum())
        return out

    def sample(self, kernel: str, rng: np.random.Generator):
        """Draw (dim choice indices, format flag, alloc flag) and the joint
        log-probability under the current policy."""
        probs = self.probs(kernel)
        choices = [int(rng.choice(len(p), p=p)) for p in probs]
        p_fmt = _sigmoid(self.format_logit)
        p_alloc = _sigmoid(self.alloc_logit)
        fmt = bool(rng.random() < p_fmt)
        alloc = bool(rng.random() < p_alloc)
        logp = sum(float(np.log(p[c])) for p, c in zip(probs, choices))
        logp += float(np.log(p_fmt if fmt else 1.0 - p_fmt))
        logp += float(np.log(p_alloc if alloc else 1.0 - p_alloc))
        return choices, fmt, alloc, logp

    def log_prob(self, kernel: str, choices: Sequence[int], fmt: bool,
                 alloc: bool) -> float:
        probs = self.probs(kernel)
        logp = sum(float(np.log(p[c])) for p, c in zip(probs, choices))
        p_fmt = _sigmoid(self.format_logit)
        p_alloc = _sigmoid(self.alloc_logit)
        logp += float(np.log(p_fmt if fmt else 1.0 - p_fmt))
        logp += float(np.log(p_alloc if alloc else 1.0 - p_alloc))
        return logp

    def config_from_choices(self, kernel: str,
                            choices: Sequence[int]) -> PragmaConfig:
        dims = self.dims[kernel]
        picks = [dims[i][2][c] for i, c in enumerate(choices)]
        return _assemble(self.kernels[kernel], picks, dims)

    def kl_to(self, ref: "SimPolicy", kernel: str) -> float:
        """Exact KL(self || ref) summed over the kernel's dimensions and
        the two Bernoullis."""
        total = 0.0
        for p, q in zip(self.probs(kernel), ref.probs(kernel)):
            total += float(np.sum(p * (np.log(p) - np.log(q))))
        for ell, ell_ref in ((self.format_logit, ref.format_logit),
                             (self.alloc_logit, ref.alloc_logit)):
            p = _sigmoid(ell)
            q = _sigmoid(ell_ref)
            total += _bernoulli_kl(p, q)
        return total

    def checkpoint_dict(self) -> dict:
        return {
            "version": 1,
            "format_logit": self.format_logit,
            "alloc_logit": self.alloc_logit,
            "logits": {k: [z.tolist() for z in v]
                       for k, v in self.logits.items()},
        }

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            json.dump(self.checkpoint_dict(), f, sort_keys=True)
            f.write("\n")

    def load_logits(self, payload: dict) -> None:
        self.format_logit = float(payload["format_logit"])
        self.alloc_logit = float(payload["alloc_logit"])
        for k, arrs in payload["logits"].items():
            self.logits[k] = [np.array(a) for a in arrs]


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def _bernoulli_kl(p: float, q: float) -> float:
    eps = 1e-12
    return (p * (np.log(p + eps) - np.log(q + eps))
            + (1 - p) * (np.log(1 - p + eps) - np.log(1 - q + eps)))


THINK_TEXT = "pick unroll, pipeline, and partition factors"


def render_candidate_text(design: DesignPoint, well_formed: bool) -> str:
    """Simulated LLM output: the rendered code in (possibly broken)
    reasoning-format wrapping."""
    if well_formed:
        return (f"<think>{THINK_TEXT}</think> "
                f"<final_code>{design.rendered_code}</final_code>")
    return f"<think>{THINK_TEXT}</think> <final_code>{design.rendered_code}"


@dataclass
class CandidateSample:
    text: str
    design: DesignPoint
    choices: List[int]
    well_formed: bool
    dynamic_alloc: bool
    old_logp: float
    r_f: float = 0.0
    r_comp: float = 0.0
    r_c: float = 0.0
    r_q: float = 0.0
    total: float = 0.0
    advantage: float = 0.0


@dataclass
class GroupSample:
    kernel: str
    candidates: List[CandidateSample]


def total_reward(candidate: CandidateSample, weights: RewardWeights) -> float:
    return (weights.lambda_f * candidate.r_f
            + weights.lambda_comp * candidate.r_comp
            + weights.lambda_c * candidate.r_c
            + weights.lambda_q * candidate.r_q)


def group_advantages(rewards: Sequence[float], adv_eps: float) -> np.ndarray:
    r = np.asarray(rewards, dtype=float)
    mu = r.mean()
    sigma = r.std()
    if sigma == 0.0:
        return np.zeros_like(r)
    return (r - mu) / (sigma + adv_eps)


def _policy_gradient_update(policy: SimPolicy, ref: SimPolicy, kernel: str,
                            group: List[CandidateSample],
                            advantages: np.ndarray,
                            cfg: GrpoConfig) -> None:
    """One gradient-ascent step on the clipped surrogate minus beta*KL."""
    probs = policy.probs(kernel)
    grad_dims = [np.zeros_like(z) for z in policy.logits[kernel]]
    grad_fmt = 0.0
    grad_alloc = 0.0
    g = len(group)
    p_fmt = _sigmoid(policy.format_logit)
    p_alloc = _sigmoid(policy.alloc_logit)
    for cand, adv in zip(group, advantages):
        new_logp = policy.log_prob(
            kernel, cand.choices, cand.well_formed, cand.dynamic_alloc)
        rho = float(np.exp(new_logp - cand.old_logp))
        # Clipped-surrogate gradient gate: zero when the ratio is clipped
        # on the losing side.
        if adv >= 0:
            active = rho <= 1.0 + cfg.clip_eps
        else:
            active = rho >= 1.0 - cfg.clip_eps
        if not active:
            continue
        coef = rho * adv / g
        for z_grad, p, c in zip(grad_dims, probs, cand.choices):
            one_hot = np.zeros_like(p)
            one_hot[c] = 1.0
            z_grad += coef * (one_hot - p)
        grad_fmt += coef * ((1.0 if cand.well_formed else 0.0) - p_fmt)
        grad_alloc += coef * ((1.0 if cand.dynamic_alloc else 0.0) - p_alloc)

    if cfg.kl_beta > 0.0:
        ref_probs = ref.probs(kernel)
        for z_grad, p, q in zip(grad_dims, probs, ref_probs):
            lr = np.log(p) - np.log(q)
            kl_dim = float(np.sum(p * lr))
            z_grad -= cfg.kl_beta * p * (lr - kl_dim)
        for attr, get_ref in (("format_logit", ref.format_logit),
                              ("alloc_logit", ref.alloc_logit)):
            ell = getattr(policy, attr)
            p = _sigmoid(ell)
            q = _sigmoid(get_ref)
            eps = 1e-12
            dkl_dp = (np.log(p + eps) - np.log(q + eps)
                      - np.log(1 - p + eps) + np.log(1 - q + eps))
            if attr == "format_logit":
                grad_fmt -= cfg.kl_beta * dkl_dp * p * (1 - p)
            else:
                grad_alloc -= cfg.kl_beta * dkl_dp * p * (1 - p)

    for z, z_grad in zip(policy.logits[kernel], grad_dims):
        z += cfg.policy_lr * z_grad
    policy.format_logit += cfg.policy_lr * grad_fmt
    policy.alloc_logit += cfg.policy_lr * grad_alloc


def grpo_step(policy: SimPolicy, ref_policy: SimPolicy,
              kernel: KernelDescriptor, backend: SynthesisBackend,
              reward_params: RewardModelParams, ucfg: UncertaintyConfig,
              cfg: GrpoConfig, weights: RewardWeights,
              telemetry: RouterTelemetry, buffer: ReplayBuffer,
              step: int, seed: int) -> GroupSample:
    """Sample a group, score the four reward components, and apply
    ppo_epochs clipped-surrogate updates with KL regularization."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, step)))
    group: List[CandidateSample] = []
    for _ in range(cfg.group_size):
        choices, fmt, alloc, logp = policy.sample(kernel.name, rng)
        config = policy.config_from_choices(kernel.name, choices)
        design = render_design(kernel, config, dynamic_alloc=alloc)
        group.append(CandidateSample(
            text=render_candidate_text(design, fmt), design=design,
            choices=choices, well_formed=fmt, dynamic_alloc=alloc,
            old_logp=logp))

    verdicts = [backend.evaluate(c.design) for c in group]
    rq = compute_rq(
        [Candidate(design=c.design, verdict=v)
         for c, v in zip(group, verdicts)],
        reward_params, backend, ucfg, telemetry, buffer,
        step=step, seed=seed)
    for cand, verdict, q in zip(group, verdicts, rq):
        cand.r_f = float(check_format(cand.text))
        cand.r_comp = float(verdict.compiled)
        cand.r_c = float(verdict.functional)
        cand.r_q = q
        cand.total = total_reward(cand, weights)

    advantages = group_advantages([c.total for c in group], cfg.adv_eps)
    for cand, adv in zip(group, advantages):
        cand.advantage = float(adv)

    for _ in range(cfg.ppo_epochs):
        _policy_gradient_update(
            policy, ref_policy, kernel.name, group, advantages, cfg)
    return GroupSample(kernel=kernel.name, candidates=group)


@dataclass
class TrainingStepRow:
    step: int
    kernel: str
    mean_r_f: float
    mean_r_comp: float
    mean_r_c: float
    mean_r_q: float
    mean_total: float
    trigger_rate: float
    kl: float
    synth_seconds_cum: float


@dataclass
class TrainingRun:
    policy: SimPolicy
    reward_params: RewardModelParams
    telemetry: RouterTelemetry
    buffer: ReplayBuffer
    rows: List[TrainingStepRow] = field(default_factory=list)


def run_training(kernels: Sequence[KernelDescriptor],
                 backend: SynthesisBackend,
                 reward_params: RewardModelParams,
                 cfg: GrpoConfig, weights: RewardWeights,
                 ucfg: UncertaintyConfig, seed: int,
                 loss_cfg: Optional[LossConfig] = None,
                 policy: Optional[SimPolicy] = None,
                 buffer: Optional[ReplayBuffer] = None) -> TrainingRun:
    """Round-robin GRPO over the kernels with scheduled online reward-model
    updates; returns the trained policy and per-step telemetry rows.

    The logged mean_r_q averages the round-robin win rates over the whole
    group (non-functional members contribute 0), so it tracks both QoR
    ranking and the functional rate.
    """
    if not kernels:
        raise ValueError("need at least one kernel")
    policy = policy or SimPolicy(kernels)
    ref_policy = policy.copy()
    buffer = buffer if buffer is not None else ReplayBuffer()
    telemetry = RouterTelemetry()
    run = TrainingRun(policy=policy, reward_params=reward_params,
                      telemetry=telemetry, buffer=buffer)
    params = reward_params
    for step in range(cfg.steps):
        kernel = kernels[step % len(kernels)]
        sample = grpo_step(
            policy, ref_policy, kernel, backend, params, ucfg, cfg, weights,
            telemetry, buffer, step=step, seed=seed)
        params = maybe_online_update(
            params, buffer, ucfg, global_step=step + 1,
            loss_cfg=loss_cfg, seed=seed)
        cands = sample.candidates
        g = len(cands)
        run.rows.append(TrainingStepRow(
            step=step, kernel=kernel.name,
            mean_r_f=sum(c.r_f for c in cands) / g,
            mean_r_comp=sum(c.r_comp for c in cands) / g,
            mean_r_c=sum(c.r_c for c in cands) / g,
            mean_r_q=sum(c.r_q for c in cands) / g,
            mean_total=sum(c.total for c in cands) / g,
            trigger_rate=telemetry.steps[-1].trigger_rate,
            kl=policy.kl_to(ref_policy, kernel.name),
            synth_seconds_cum=telemetry.synth_seconds_cum))
    run.reward_params = params
    return run
