"""Siamese comparative QoR reward model.

Hash-embedding encoder with mean pooling, a two-layer score head, three
dropout sites, Bradley-Terry pairwise training with a consistency
regularizer, and MC-dropout uncertainty.  All gradients are analytic and
checked against finite differences in the test suite.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import hashlib
import json
import re

import numpy as np

from .pareto import dominates
from .synth_oracle import QorVector

PAD_ID = 0
PRAGMA_ID = 1
RESERVED_IDS = 2
DEFAULT_VOCAB = 4096
DEFAULT_DIM = 64
DEFAULT_HIDDEN = 32
DEFAULT_DROPOUT = 0.2
DEFAULT_MAX_LEN = 512
DEFAULT_VOCAB_SALT = "qorseek-v1"
CHECKPOINT_VERSION = 1

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+|[^\sA-Za-z0-9_]")


@dataclass(frozen=True)
class TokenizedDesign:
    token_ids: Tuple[int, ...]
    pragma_token_positions: Tuple[int, ...] = ()


def _hash_token(token: str, vocab: int, salt: str) -> int:
    digest = hashlib.md5(f"{salt}|{token}".encode()).digest()
    return RESERVED_IDS + int.from_bytes(digest[:8], "big") % (vocab - RESERVED_IDS)


def tokenize(design_text: str, vocab: int = DEFAULT_VOCAB,
             max_len: int = DEFAULT_MAX_LEN,
             salt: str = DEFAULT_VOCAB_SALT) -> TokenizedDesign:
    """Whitespace/punctuation tokenization with a stable hash vocabulary.

    Every line starting with "#pragma HLS" gets a [PRAGMA] token inserted
    before its first token.  Sequences longer than max_len are truncated
    at the tail.
    """
    ids: List[int] = []
    pragma_pos: List[int] = []
    for line in design_text.splitlines():
        tokens = _TOKEN_RE.findall(line)
        if not tokens:
            continue
        if line.strip().startswith("#pragma HLS"):
            pragma_pos.append(len(ids))
            ids.append(PRAGMA_ID)
        ids.extend(_hash_token(t, vocab, salt) for t in tokens)
    ids = ids[:max_len]
    pragma_pos = [p for p in pragma_pos if p < len(ids)]
    return TokenizedDesign(token_ids=tuple(ids),
                           pragma_token_positions=tuple(pragma_pos))


@dataclass
class RewardModelParams:
    embedding: np.ndarray       # (V, d)
    head_w1: np.ndarray         # (d, h)
    head_b1: np.ndarray         # (h,)
    head_w2: np.ndarray         # (h,)
    head_b2: float
    dropout_rate: float = DEFAULT_DROPOUT
    vocab_salt: str = DEFAULT_VOCAB_SALT
    max_len: int = DEFAULT_MAX_LEN

    @property
    def vocab(self) -> int:
        return self.embedding.shape[0]

    @property
    def dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def hidden(self) -> int:
        return self.head_w1.shape[1]

    def copy(self) -> "RewardModelParams":
        return RewardModelParams(
            embedding=self.embedding.copy(), head_w1=self.head_w1.copy(),
            head_b1=self.head_b1.copy(), head_w2=self.head_w2.copy(),
            head_b2=float(self.head_b2), dropout_rate=self.dropout_rate,
            vocab_salt=self.vocab_salt, max_len=self.max_len)

    def blocks(self) -> Dict[str, np.ndarray]:
        return {"embedding": self.embedding, "head_w1": self.head_w1,
                "head_b1": self.head_b1, "head_w2": self.head_w2}

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for name in ("embedding", "head_w1", "head_b1", "head_w2"):
            h.update(np.ascontiguousarray(getattr(self, name)).tobytes())
        h.update(np.float64(self.head_b2).tobytes())
        return h.hexdigest()


def init_params(seed: int, vocab: int = DEFAULT_VOCAB, dim: int = DEFAULT_DIM,
                hidden: int = DEFAULT_HIDDEN,
                dropout_rate: float = DEFAULT_DROPOUT,
                vocab_salt: str = DEFAULT_VOCAB_SALT,
                max_len: int = DEFAULT_MAX_LEN) -> RewardModelParams:
    rng = np.random.default_rng(seed)
    return RewardModelParams(
        embedding=rng.normal(0.0, 0.5, size=(vocab, dim)),
        head_w1=rng.normal(0.0, 1.0 / np.sqrt(dim), size=(dim, hidden)),
        head_b1=np.zeros(hidden),
        head_w2=rng.normal(0.0, 0.4, size=(hidden,)),
        head_b2=0.0,
        dropout_rate=dropout_rate, vocab_salt=vocab_salt, max_len=max_len)


def dropout_masks(params: RewardModelParams, mask_seed) -> Optional[Tuple]:
    """Three inverted-dropout masks (post-pool, post-hidden, pre-output)."""
    if mask_seed is None or params.dropout_rate == 0.0:
        return None
    rng = np.random.default_rng(np.random.SeedSequence(mask_seed))
    rate = params.dropout_rate
    scale = 1.0 / (1.0 - rate)
    m1 = (rng.random(params.dim) >= rate) * scale
    m2 = (rng.random(params.hidden) >= rate) * scale
    m3 = (rng.random(params.hidden) >= rate) * scale
    return (m1, m2, m3)


def _forward(params: RewardModelParams, design: TokenizedDesign,
             masks: Optional[Tuple]) -> Tuple[float, dict]:
    ids = np.array(design.token_ids, dtype=np.intp)
    if ids.size:
        x = params.embedding[ids].mean(axis=0)
    else:
        x = np.zeros(params.dim)
    if masks is None:
        m1 = m2 = m3 = None
        x1 = x
    else:
        m1, m2, m3 = masks
        x1 = x * m1
    a = x1 @ params.head_w1 + params.head_b1
    h = np.tanh(a)
    h2 = h if m2 is None else h * m2
    h3 = h2 if m3 is None else h2 * m3
    s = float(h3 @ params.head_w2 + params.head_b2)
    cache = {"ids": ids, "x1": x1, "h": h, "h3": h3, "masks": masks}
    return s, cache


def _backward(params: RewardModelParams, cache: dict, ds: float,
              grads: dict) -> None:
    masks = cache["masks"]
    grads["head_w2"] += ds * cache["h3"]
    grads["head_b2"] += ds
    dh3 = ds * params.head_w2
    if masks is None:
        dh = dh3
    else:
        m1, m2, m3 = masks
        dh = dh3 * m3 * m2
    da = dh * (1.0 - cache["h"] ** 2)
    grads["head_w1"] += np.outer(cache["x1"], da)
    grads["head_b1"] += da
    dx1 = params.head_w1 @ da
    dx = dx1 if masks is None else dx1 * masks[0]
    ids = cache["ids"]
    if ids.size:
        np.add.at(grads["embedding"], ids, dx / ids.size)


def score(params: RewardModelParams, design: TokenizedDesign,
          mask_seed=None) -> float:
    """Scalar quality score; deterministic when no mask seed is given."""
    s, _ = _forward(params, design, dropout_masks(params, mask_seed))
    return s


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def preference(params: RewardModelParams, a: TokenizedDesign,
               b: TokenizedDesign) -> float:
    """P(a better than b) = sigmoid of the deterministic score gap."""
    return _sigmoid(score(params, a) - score(params, b))


TIER_DOMINANCE = "dominance"
TIER_LATENCY = "latency"
TIER_TIE = "tie"


@dataclass(frozen=True)
class PairExample:
    design_i: TokenizedDesign
    design_j: TokenizedDesign
    label: float
    tier: str
    kernel: str = ""


@dataclass(frozen=True)
class LossConfig:
    lambda_pair: float = 1.0
    lambda_cons: float = 0.5
    delta_gap: float = 0.10
    keep_ties: bool = False


def relative_gap(a: QorVector, b: QorVector) -> float:
    """Max per-metric relative difference |m_a - m_b| / max(m_a, m_b, 1)."""
    gap = 0.0
    for x, y in zip(a.as_tuple(), b.as_tuple()):
        gap = max(gap, abs(x - y) / max(x, y, 1))
    return gap


def label_pair(qor_i: QorVector, qor_j: QorVector) -> Tuple[float, str]:
    """Two-tier preference label for the ordered pair (i, j).

    Full confidence (1.0) when i Pareto-dominates j on all five metrics;
    half confidence (0.5) when the pair is incomparable but i has
    strictly lower latency; 0.0 otherwise (tie).  The half-confidence
    target deliberately does NOT mark the faster design as preferred:
    a correct model stays at or below indifference for speed bought with
    extra resources, and reserves clear preference for dominance.
    """
    if dominates(qor_i, qor_j):
        return 1.0, TIER_DOMINANCE
    if qor_i.latency_cycles < qor_j.latency_cycles:
        return 0.5, TIER_LATENCY
    return 0.0, TIER_TIE


@dataclass(frozen=True)
class CorpusEntry:
    """One functional design with its kernel tag, text, and measured QoR."""
    kernel: str
    text: str
    qor: QorVector


def build_pairs(entries: Sequence[CorpusEntry], loss_cfg: LossConfig,
                vocab: int = DEFAULT_VOCAB, max_len: int = DEFAULT_MAX_LEN,
                salt: str = DEFAULT_VOCAB_SALT) -> List[PairExample]:
    """All ordered within-kernel pairs, two-tier labeled and gap-filtered.

    Near-identical pairs (relative gap < delta_gap) are discarded; tie-tier
    pairs are kept only when loss_cfg.keep_ties is set.
    """
    by_kernel: Dict[str, List[CorpusEntry]] = {}
    for e in entries:
        by_kernel.setdefault(e.kernel, []).append(e)
    pairs: List[PairExample] = []
    for kernel, group in by_kernel.items():
        toks = [tokenize(e.text, vocab=vocab, max_len=max_len, salt=salt)
                for e in group]
        for i in range(len(group)):
            for j in range(len(group)):
                if i == j:
                    continue
                if relative_gap(group[i].qor, group[j].qor) < loss_cfg.delta_gap:
                    continue
                y, tier = label_pair(group[i].qor, group[j].qor)
                if tier == TIER_TIE and not loss_cfg.keep_ties:
                    continue
                pairs.append(PairExample(
                    design_i=toks[i], design_j=toks[j], label=y, tier=tier,
                    kernel=kernel))
    return pairs


def _zero_grads(params: RewardModelParams) -> dict:
    return {"embedding": np.zeros_like(params.embedding),
            "head_w1": np.zeros_like(params.head_w1),
            "head_b1": np.zeros_like(params.head_b1),
            "head_w2": np.zeros_like(params.head_w2),
            "head_b2": 0.0}


def _pool_batch(params: RewardModelParams,
                designs: Sequence[TokenizedDesign]
                ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Padded id matrix, validity mask, lengths, and pooled embeddings."""
    n = len(designs)
    max_len = max((len(d.token_ids) for d in designs), default=0)
    ids = np.zeros((n, max(1, max_len)), dtype=np.intp)
    valid = np.zeros_like(ids, dtype=float)
    for k, d in enumerate(designs):
        ln = len(d.token_ids)
        ids[k, :ln] = d.token_ids
        valid[k, :ln] = 1.0
    lengths = np.maximum(valid.sum(axis=1), 1.0)
    pooled = (params.embedding[ids] * valid[:, :, None]).sum(axis=1) \
        / lengths[:, None]
    return ids, valid, lengths, pooled


class _BatchMasks:
    """Per-row inverted-dropout masks for one batched forward pass."""

    def __init__(self, rng: np.random.Generator, rate: float,
                 n: int, dim: int, hidden: int):
        scale = 1.0 / (1.0 - rate)
        self.m1 = (rng.random((n, dim)) >= rate) * scale
        self.m2 = (rng.random((n, hidden)) >= rate) * scale
        self.m3 = (rng.random((n, hidden)) >= rate) * scale


def _forward_batch(params: RewardModelParams, pooled: np.ndarray,
                   masks: Optional[_BatchMasks]) -> Tuple[np.ndarray, dict]:
    x1 = pooled if masks is None else pooled * masks.m1
    h = np.tanh(x1 @ params.head_w1 + params.head_b1)
    h3 = h if masks is None else h * masks.m2 * masks.m3
    s = h3 @ params.head_w2 + params.head_b2
    return s, {"x1": x1, "h": h, "h3": h3, "masks": masks}


def _backward_batch(params: RewardModelParams, cache: dict,
                    coef: np.ndarray, grads: dict) -> np.ndarray:
    """Accumulate head gradients for per-row score coefficients `coef`;
    returns the gradient w.r.t. the pooled embeddings (n, d)."""
    masks = cache["masks"]
    grads["head_w2"] += cache["h3"].T @ coef
    grads["head_b2"] += float(coef.sum())
    dh3 = coef[:, None] * params.head_w2[None, :]
    dh = dh3 if masks is None else dh3 * masks.m3 * masks.m2
    da = dh * (1.0 - cache["h"] ** 2)
    grads["head_w1"] += cache["x1"].T @ da
    grads["head_b1"] += da.sum(axis=0)
    dx1 = da @ params.head_w1.T
    return dx1 if masks is None else dx1 * masks.m1


def loss_and_grads(params: RewardModelParams, batch: Sequence[PairExample],
                   loss_cfg: LossConfig, mask_seed=None
                   ) -> Tuple[float, dict]:
    """Mean combined loss over a batch with analytic gradients.

    The pairwise logit uses one dropout mask shared by both branches; the
    consistency target uses an independent mask per branch.  Masks for the
    whole batch come from one generator seeded with mask_seed.  With
    dropout disabled the consistency term vanishes and the loss is pure
    BCE.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    b = len(batch)
    designs = [p.design_i for p in batch] + [p.design_j for p in batch]
    ids, valid, lengths, pooled = _pool_batch(params, designs)
    labels = np.array([p.label for p in batch])
    grads = _zero_grads(params)
    use_dropout = mask_seed is not None and params.dropout_rate > 0.0
    if use_dropout:
        rng = np.random.default_rng(np.random.SeedSequence(mask_seed))
        rate = params.dropout_rate
        shared_half = _BatchMasks(rng, rate, b, params.dim, params.hidden)
        shared = _BatchMasks.__new__(_BatchMasks)
        shared.m1 = np.vstack([shared_half.m1, shared_half.m1])
        shared.m2 = np.vstack([shared_half.m2, shared_half.m2])
        shared.m3 = np.vstack([shared_half.m3, shared_half.m3])
        independent = _BatchMasks(rng, rate, 2 * b, params.dim, params.hidden)
    else:
        shared = independent = None

    s_sh, c_sh = _forward_batch(params, pooled, shared)
    logit = s_sh[:b] - s_sh[b:]
    p = np.where(logit >= 0, 1.0 / (1.0 + np.exp(-np.abs(logit))),
                 np.exp(-np.abs(logit)) / (1.0 + np.exp(-np.abs(logit))))
    eps = 1e-12
    bce = -(labels * np.log(p + eps) + (1.0 - labels) * np.log(1.0 - p + eps))
    inv_b = 1.0 / b
    if use_dropout:
        s_ind, c_ind = _forward_batch(params, pooled, independent)
        delta = s_ind[:b] - s_ind[b:]
        cons = (logit - delta) ** 2
        total = float(np.mean(loss_cfg.lambda_pair * bce
                              + loss_cfg.lambda_cons * cons))
        d_logit = inv_b * (loss_cfg.lambda_pair * (p - labels)
                           + 2.0 * loss_cfg.lambda_cons * (logit - delta))
        d_delta = inv_b * (-2.0 * loss_cfg.lambda_cons * (logit - delta))
        dx = _backward_batch(params, c_sh,
                             np.concatenate([d_logit, -d_logit]), grads)
        dx += _backward_batch(params, c_ind,
                              np.concatenate([d_delta, -d_delta]), grads)
    else:
        total = float(np.mean(loss_cfg.lambda_pair * bce))
        d_logit = inv_b * loss_cfg.lambda_pair * (p - labels)
        dx = _backward_batch(params, c_sh,
                             np.concatenate([d_logit, -d_logit]), grads)
    contrib = valid[:, :, None] * (dx / lengths[:, None])[:, None, :]
    np.add.at(grads["embedding"], ids.ravel(),
              contrib.reshape(-1, params.dim))
    return total, grads


@dataclass
class OptimizerConfig:
    epochs: int = 20
    learning_rate: float = 5e-3
    batch_size: int = 64
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    test_fraction: float = 0.10  # of kernels, not pairs


class AdamState:
    def __init__(self, params: RewardModelParams):
        self.m = _zero_grads(params)
        self.v = _zero_grads(params)
        self.t = 0

    def step(self, params: RewardModelParams, grads: dict,
             cfg: OptimizerConfig) -> None:
        self.t += 1
        b1, b2 = cfg.beta1, cfg.beta2
        corr1 = 1.0 - b1 ** self.t
        corr2 = 1.0 - b2 ** self.t
        for name in ("embedding", "head_w1", "head_b1", "head_w2"):
            g = grads[name]
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            update = (self.m[name] / corr1) / (
                np.sqrt(self.v[name] / corr2) + cfg.eps)
            arr = getattr(params, name)
            arr -= cfg.learning_rate * update
        g = grads["head_b2"]
        self.m["head_b2"] = b1 * self.m["head_b2"] + (1 - b1) * g
        self.v["head_b2"] = b2 * self.v["head_b2"] + (1 - b2) * g * g
        params.head_b2 -= cfg.learning_rate * (
            (self.m["head_b2"] / corr1)
            / (np.sqrt(self.v["head_b2"] / corr2) + cfg.eps))


def _scores_deterministic(params: RewardModelParams,
                          designs: Sequence[TokenizedDesign]) -> np.ndarray:
    return np.array([score(params, d) for d in designs])


def pair_accuracy(params: RewardModelParams, pairs: Sequence[PairExample],
                  tier: str) -> float:
    """Fraction of one tier's pairs where (p > 0.5) agrees with (y > 0.5).

    Dominance pairs (y=1.0) are correct when the dominant design is
    strictly preferred; latency pairs (y=0.5) are correct when the model
    does NOT strictly prefer the faster-but-costlier design (p ≤ 0.5).
    """
    subset = [p for p in pairs if p.tier == tier]
    if not subset:
        return float("nan")
    unique: Dict[int, int] = {}
    designs: List[TokenizedDesign] = []
    for p in subset:
        for d in (p.design_i, p.design_j):
            if id(d) not in unique:
                unique[id(d)] = len(designs)
                designs.append(d)
    _, _, _, pooled = _pool_batch(params, designs)
    scores, _ = _forward_batch(params, pooled, None)
    correct = 0
    for p in subset:
        pred_first = scores[unique[id(p.design_i)]] \
            > scores[unique[id(p.design_j)]]
        correct += int(pred_first == (p.label > 0.5))
    return correct / len(subset)


@dataclass
class EpochLog:
    epoch: int
    train_acc_dom: float
    test_acc_dom: float
    train_acc_lat: float
    test_acc_lat: float
    loss: float


def split_by_kernel(pairs: Sequence[PairExample], seed: int,
                    test_fraction: float = 0.10
                    ) -> Tuple[List[PairExample], List[PairExample]]:
    """Deterministic train/test split at kernel granularity (no leakage)."""
    kernels = sorted({p.kernel for p in pairs})
    rng = np.random.default_rng(seed)
    order = [kernels[i] for i in rng.permutation(len(kernels))]
    n_test = max(1, int(round(test_fraction * len(kernels)))) \
        if len(kernels) > 1 else 0
    test_kernels = set(order[:n_test])
    train = [p for p in pairs if p.kernel not in test_kernels]
    test = [p for p in pairs if p.kernel in test_kernels]
    return train, test


def train(params: RewardModelParams, pairs: Sequence[PairExample],
          optimizer_cfg: OptimizerConfig, seed: int,
          loss_cfg: Optional[LossConfig] = None
          ) -> Tuple[RewardModelParams, List[EpochLog]]:
    """Adam training with a by-kernel train/test split and per-epoch
    accuracy logging (dropout disabled for evaluation)."""
    loss_cfg = loss_cfg or LossConfig()
    train_pairs, test_pairs = split_by_kernel(
        pairs, seed, optimizer_cfg.test_fraction)
    if not train_pairs:
        raise ValueError("empty train split")
    params = params.copy()
    state = AdamState(params)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xAD)))
    log: List[EpochLog] = []
    for epoch in range(optimizer_cfg.epochs):
        order = rng.permutation(len(train_pairs))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), optimizer_cfg.batch_size):
            batch = [train_pairs[i]
                     for i in order[start:start + optimizer_cfg.batch_size]]
            loss, grads = loss_and_grads(
                params, batch, loss_cfg,
                mask_seed=None if params.dropout_rate == 0.0
                else seed * 1000003 + epoch * 4093 + start)
            state.step(params, grads, optimizer_cfg)
            epoch_loss += loss
            n_batches += 1
        log.append(EpochLog(
            epoch=epoch,
            train_acc_dom=pair_accuracy(params, train_pairs, TIER_DOMINANCE),
            test_acc_dom=pair_accuracy(params, test_pairs, TIER_DOMINANCE),
            train_acc_lat=pair_accuracy(params, train_pairs, TIER_LATENCY),
            test_acc_lat=pair_accuracy(params, test_pairs, TIER_LATENCY),
            loss=epoch_loss / max(1, n_batches)))
    return params, log


def fine_tune(params: RewardModelParams, pairs: Sequence[PairExample],
              steps: int, learning_rate: float, seed: int,
              loss_cfg: Optional[LossConfig] = None,
              batch_size: int = 16) -> RewardModelParams:
    """Run a fixed number of gradient steps (online update path)."""
    loss_cfg = loss_cfg or LossConfig()
    params = params.copy()
    cfg = OptimizerConfig(learning_rate=learning_rate, batch_size=batch_size)
    state = AdamState(params)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF1)))
    for step in range(steps):
        idx = rng.integers(0, len(pairs), size=min(batch_size, len(pairs)))
        batch = [pairs[i] for i in idx]
        _, grads = loss_and_grads(
            params, batch, loss_cfg,
            mask_seed=None if params.dropout_rate == 0.0
            else seed * 4099 + step)
        state.step(params, grads, cfg)
    return params


def mc_uncertainty(params: RewardModelParams, design: TokenizedDesign,
                   m_passes: int, seed: int) -> Tuple[float, float]:
    """Mean and population variance of M dropout-enabled scores."""
    if m_passes < 2:
        raise ValueError("m_passes must be >= 2")
    scores = np.array([
        score(params, design, mask_seed=(seed, m)) for m in range(m_passes)])
    return float(scores.mean()), float(scores.var())


def mc_scores(params: RewardModelParams, design: TokenizedDesign,
              m_passes: int, seed: int) -> np.ndarray:
    """The M dropout-pass scores themselves (for pairwise averaging)."""
    return np.array([
        score(params, design, mask_seed=(seed, m)) for m in range(m_passes)])


def save_checkpoint(params: RewardModelParams, path: str) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "vocab": params.vocab,
        "dim": params.dim,
        "hidden": params.hidden,
        "dropout_rate": params.dropout_rate,
        "vocab_salt": params.vocab_salt,
        "max_len": params.max_len,
        "embedding": params.embedding.tolist(),
        "head_w1": params.head_w1.tolist(),
        "head_b1": params.head_b1.tolist(),
        "head_w2": params.head_w2.tolist(),
        "head_b2": params.head_b2,
    }
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True)
        f.write("\n")


def load_checkpoint(path: str) -> RewardModelParams:
    with open(path) as f:
        payload = json.load(f)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version in {path}")
    return RewardModelParams(
        embedding=np.array(payload["embedding"]),
        head_w1=np.array(payload["head_w1"]),
        head_b1=np.array(payload["head_b1"]),
        head_w2=np.array(payload["head_w2"]),
        head_b2=float(payload["head_b2"]),
        dropout_rate=float(payload["dropout_rate"]),
        vocab_salt=payload["vocab_salt"],
        max_len=int(payload["max_len"]))
