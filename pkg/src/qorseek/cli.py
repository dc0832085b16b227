"""Command-line entry point tying the pipeline together.

Subcommands: dse (corpus generation), pairs (preference-pair dataset),
train-rm (reward-model training), grpo (policy training with the reward
router), report (telemetry summaries).  Every command is deterministic
given its config, including byte-identical output files.

Exit codes: 0 success, 2 missing input, 3 invalid config, 4 internal
invariant violation.
"""

import argparse
import csv
import glob as globmod
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .demo_kernels import make_demo_kernels
from .design_space import (
    DescriptorError, KernelDescriptor, parse_kernel_descriptor,
)
from .dse import DseCorpus, run_dse
from .grpo_sim import (
    GrpoConfig, RewardWeights, TrainingRun, run_training,
)
from .pareto import (
    NormalizationBounds, QdSamplingConfig, pareto_front_indices, qd_sample,
)
from .reward_model import (
    CorpusEntry, LossConfig, OptimizerConfig, RewardModelParams, build_pairs,
    init_params, load_checkpoint, pair_accuracy, save_checkpoint,
    split_by_kernel, train,
)
from .reward_router import ReplayBuffer, UncertaintyConfig
from .synth_oracle import AnalyticBackend, QorVector

log = logging.getLogger("qorseek")

EXIT_OK = 0
EXIT_MISSING_INPUT = 2
EXIT_INVALID_CONFIG = 3
EXIT_INTERNAL = 4

TELEMETRY_COLUMNS = (
    "step", "kernel", "mean_r_f", "mean_r_comp", "mean_r_c", "mean_r_q",
    "mean_total", "trigger_rate", "kl", "synth_seconds_cum")
ACCURACY_COLUMNS = (
    "epoch", "train_acc_dom", "test_acc_dom", "train_acc_lat",
    "test_acc_lat", "loss")
HV_COLUMNS = ("step", "config_key", "ehvi", "hypervolume")


class MissingInputError(FileNotFoundError):
    """Required input file or directory is absent."""


class ConfigError(ValueError):
    """A config value is out of range or of the wrong type."""


@dataclass
class RunConfig:
    """Full pipeline configuration; every subcommand reads a subset.

    Mirrors the per-module config types; flag overrides win over the
    config file.
    """
    seed: int = 0
    out: str = "runs/out"
    kernels: str = "demo"
    budget: int = 40
    pool_size: int = 256
    ehvi_samples: int = 64
    qd: QdSamplingConfig = field(default_factory=QdSamplingConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    model: Dict = field(default_factory=lambda: {
        "vocab": 4096, "dim": 64, "hidden": 32, "dropout": 0.2,
        "max_len": 512})
    uncertainty: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    grpo: GrpoConfig = field(default_factory=GrpoConfig)
    weights: RewardWeights = field(default_factory=RewardWeights)
    oracle: Dict = field(default_factory=lambda: {"cost_seconds": 180.0})


def _build_section(cls, payload: dict, section: str):
    try:
        return cls(**payload)
    except TypeError as exc:
        raise ConfigError(f"config section '{section}': {exc}") from exc


def load_config(path: Optional[str], overrides: dict) -> RunConfig:
    """Read the JSON config file (if any) and apply flag overrides."""
    payload: dict = {}
    if path is not None:
        if not os.path.exists(path):
            raise MissingInputError(f"config file not found: {path}")
        with open(path) as f:
            try:
                payload = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path}: {exc}") from exc
    cfg = RunConfig()
    section_types = {
        "qd": QdSamplingConfig, "loss": LossConfig,
        "optimizer": OptimizerConfig, "uncertainty": UncertaintyConfig,
        "grpo": GrpoConfig, "weights": RewardWeights,
    }
    for key, value in payload.items():
        if key in section_types:
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{key}' must be an object")
            try:
                setattr(cfg, key,
                        _build_section(section_types[key], value, key))
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"config key '{key}': {exc}") from exc
        elif key in ("model", "oracle"):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{key}' must be an object")
            base = dict(getattr(cfg, key))
            unknown = set(value) - set(base)
            if unknown:
                raise ConfigError(
                    f"config key '{key}.{sorted(unknown)[0]}' is unknown")
            base.update(value)
            setattr(cfg, key, base)
        elif key in ("seed", "budget", "pool_size", "ehvi_samples"):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"config key '{key}' must be an integer")
            setattr(cfg, key, value)
        elif key in ("out", "kernels"):
            if not isinstance(value, str):
                raise ConfigError(f"config key '{key}' must be a string")
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"config key '{key}' is unknown")
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "epochs":
            cfg.optimizer.epochs = value
        elif key == "steps":
            cfg.grpo = GrpoConfig(**{**_grpo_dict(cfg.grpo), "steps": value})
        else:
            setattr(cfg, key, value)
    _validate_config(cfg)
    return cfg


def _grpo_dict(g: GrpoConfig) -> dict:
    return {"group_size": g.group_size, "clip_eps": g.clip_eps,
            "kl_beta": g.kl_beta, "ppo_epochs": g.ppo_epochs,
            "adv_eps": g.adv_eps, "policy_lr": g.policy_lr,
            "steps": g.steps}


def _validate_config(cfg: RunConfig) -> None:
    checks = (
        ("seed", cfg.seed >= 0),
        ("budget", cfg.budget >= 4),
        ("pool_size", cfg.pool_size >= 1),
        ("ehvi_samples", cfg.ehvi_samples >= 1),
        ("model.vocab", int(cfg.model["vocab"]) >= 4),
        ("model.dim", int(cfg.model["dim"]) >= 1),
        ("model.hidden", int(cfg.model["hidden"]) >= 1),
        ("model.dropout", 0.0 <= float(cfg.model["dropout"]) < 1.0),
        ("model.max_len", int(cfg.model["max_len"]) >= 1),
        ("oracle.cost_seconds", float(cfg.oracle["cost_seconds"]) > 0.0),
        ("optimizer.epochs", cfg.optimizer.epochs >= 0),
        ("optimizer.learning_rate", cfg.optimizer.learning_rate > 0.0),
        ("optimizer.batch_size", cfg.optimizer.batch_size >= 1),
        ("grpo.steps", cfg.grpo.steps >= 0),
    )
    for key, ok in checks:
        if not ok:
            raise ConfigError(f"config key '{key}' is out of range")


def resolve_kernels(pattern: str) -> List[KernelDescriptor]:
    """Load kernels from a glob of .kd files, or the built-in demo suite
    for the special value "demo"."""
    if pattern == "demo":
        return make_demo_kernels()
    paths = sorted(globmod.glob(pattern))
    if not paths:
        raise MissingInputError(f"no kernel descriptor matches: {pattern}")
    kernels = []
    for p in paths:
        with open(p) as f:
            kernels.append(parse_kernel_descriptor(f.read()))
    return kernels


def _make_backend(cfg: RunConfig) -> AnalyticBackend:
    return AnalyticBackend(
        cost_model_seconds=float(cfg.oracle["cost_seconds"]))


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: str, columns: Sequence[str],
               rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([
                _fmt(v) if isinstance(v, float) else str(v) for v in row])


def corpus_path(out: str, kernel: str) -> str:
    return os.path.join(out, f"corpus_{kernel}.jsonl")


def write_corpus(out: str, corpus: DseCorpus) -> str:
    path = corpus_path(out, corpus.kernel.name)
    with open(path, "w") as f:
        for rec in corpus.records:
            f.write(json.dumps({
                "kernel": corpus.kernel.name,
                "config": rec.design.config.key(),
                "step": rec.step,
                "functional": rec.functional,
                "qor": list(rec.qor.as_tuple()),
                "text": rec.design.rendered_code,
            }, sort_keys=True) + "\n")
    return path


def read_corpus(out: str) -> List[CorpusEntry]:
    paths = sorted(globmod.glob(os.path.join(out, "corpus_*.jsonl")))
    if not paths:
        raise MissingInputError(f"no corpus files under: {out}")
    entries: List[CorpusEntry] = []
    for path in paths:
        with open(path) as f:
            for line in f:
                row = json.loads(line)
                if not row["functional"]:
                    continue
                entries.append(CorpusEntry(
                    kernel=row["kernel"], text=row["text"],
                    qor=QorVector(*row["qor"])))
    if not entries:
        raise MissingInputError(f"corpus under {out} has no functional rows")
    return entries


def cmd_dse(cfg: RunConfig) -> int:
    kernels = resolve_kernels(cfg.kernels)
    backend = _make_backend(cfg)
    os.makedirs(cfg.out, exist_ok=True)
    for kernel in kernels:
        corpus = run_dse(kernel, backend, budget_k=cfg.budget, seed=cfg.seed,
                         pool_size=cfg.pool_size,
                         ehvi_samples=cfg.ehvi_samples)
        write_corpus(cfg.out, corpus)
        _write_csv(os.path.join(cfg.out, f"hv_{kernel.name}.csv"),
                   HV_COLUMNS, corpus.log)
        designs = [(r.design, r.qor) for r in corpus.records]
        front = pareto_front_indices(corpus.qors())
        bounds = NormalizationBounds.from_points(corpus.qors())
        sampled = qd_sample(designs, cfg.qd, bounds)
        print(f"{kernel.name}: {len(corpus.records)} evaluated, "
              f"front {len(front)}, qd-sample {len(sampled)}")
    return EXIT_OK


def cmd_pairs(cfg: RunConfig) -> int:
    entries = read_corpus(cfg.out)
    pairs = build_pairs(entries, cfg.loss,
                        vocab=int(cfg.model["vocab"]),
                        max_len=int(cfg.model["max_len"]))
    path = os.path.join(cfg.out, "pairs.jsonl")
    tiers: Dict[str, int] = {}
    with open(path, "w") as f:
        for p in pairs:
            tiers[p.tier] = tiers.get(p.tier, 0) + 1
            f.write(json.dumps({
                "kernel": p.kernel, "label": p.label, "tier": p.tier,
                "len_i": len(p.design_i.token_ids),
                "len_j": len(p.design_j.token_ids),
            }, sort_keys=True) + "\n")
    print(f"pairs: {len(pairs)} "
          + " ".join(f"{t}={tiers[t]}" for t in sorted(tiers)))
    return EXIT_OK


def cmd_train_rm(cfg: RunConfig) -> int:
    entries = read_corpus(cfg.out)
    pairs = build_pairs(entries, cfg.loss,
                        vocab=int(cfg.model["vocab"]),
                        max_len=int(cfg.model["max_len"]))
    params = init_params(
        seed=cfg.seed, vocab=int(cfg.model["vocab"]),
        dim=int(cfg.model["dim"]), hidden=int(cfg.model["hidden"]),
        dropout_rate=float(cfg.model["dropout"]),
        max_len=int(cfg.model["max_len"]))
    params, log_rows = train(params, pairs, cfg.optimizer, seed=cfg.seed,
                             loss_cfg=cfg.loss)
    save_checkpoint(params, os.path.join(cfg.out, "reward_model.json"))
    _write_csv(os.path.join(cfg.out, "accuracy.csv"), ACCURACY_COLUMNS,
               [(r.epoch, r.train_acc_dom, r.test_acc_dom, r.train_acc_lat,
                 r.test_acc_lat, r.loss) for r in log_rows])
    _, test_pairs = split_by_kernel(pairs, cfg.seed,
                                    cfg.optimizer.test_fraction)
    acc_dom = pair_accuracy(params, test_pairs, "dominance")
    acc_lat = pair_accuracy(params, test_pairs, "latency")
    print(f"test accuracy: dominance={acc_dom:.4f} latency={acc_lat:.4f}")
    return EXIT_OK


def cmd_grpo(cfg: RunConfig) -> int:
    ckpt = os.path.join(cfg.out, "reward_model.json")
    if not os.path.exists(ckpt):
        raise MissingInputError(f"reward-model checkpoint not found: {ckpt}")
    params = load_checkpoint(ckpt)
    kernels = resolve_kernels(cfg.kernels)
    backend = _make_backend(cfg)
    run = run_training(kernels, backend, params, cfg.grpo, cfg.weights,
                       cfg.uncertainty, seed=cfg.seed, loss_cfg=cfg.loss)
    _write_telemetry(cfg.out, run)
    run.policy.save(os.path.join(cfg.out, "policy.json"))
    save_checkpoint(run.reward_params,
                    os.path.join(cfg.out, "reward_model_online.json"))
    run.buffer.save_jsonl(os.path.join(cfg.out, "replay_buffer.jsonl"))
    proxy_seconds = run.telemetry.synth_seconds_cum
    candidates = cfg.grpo.steps * cfg.grpo.group_size
    all_real = candidates * backend.cost_model_seconds
    report_path = os.path.join(cfg.out, "cost_report.txt")
    with open(report_path, "w") as f:
        f.write(f"synthesis calls: {run.telemetry.synth_calls_cum}\n")
        f.write(f"proxy-path synthesis seconds: {_fmt(proxy_seconds)}\n")
        f.write(f"all-real candidates: {candidates}\n")
        f.write(f"all-real synthesis seconds: {_fmt(all_real)}\n")
        ratio = proxy_seconds / all_real if all_real else 0.0
        f.write(f"cost ratio: {_fmt(ratio)}\n")
    print(f"grpo: {cfg.grpo.steps} steps, "
          f"{run.telemetry.synth_calls_cum} synthesis calls, "
          f"cost ratio {proxy_seconds / all_real if all_real else 0.0:.4f}")
    return EXIT_OK


def _write_telemetry(out: str, run: TrainingRun) -> None:
    _write_csv(os.path.join(out, "telemetry.csv"), TELEMETRY_COLUMNS,
               [(r.step, r.kernel, r.mean_r_f, r.mean_r_comp, r.mean_r_c,
                 r.mean_r_q, r.mean_total, r.trigger_rate, r.kl,
                 r.synth_seconds_cum) for r in run.rows])


def _read_telemetry(out: str) -> List[dict]:
    path = os.path.join(out, "telemetry.csv")
    if not os.path.exists(path):
        raise MissingInputError(f"telemetry not found: {path}")
    with open(path) as f:
        return list(csv.DictReader(f))


def cmd_report(cfg: RunConfig) -> int:
    rows = _read_telemetry(cfg.out)
    if not rows:
        raise MissingInputError(f"telemetry under {cfg.out} is empty")
    n = len(rows)
    window = max(1, n // 10)
    trig = [float(r["trigger_rate"]) for r in rows]
    rq = [float(r["mean_r_q"]) for r in rows]
    win_rows = []
    for start in range(0, n, window):
        chunk = trig[start:start + window]
        win_rows.append((start, min(start + window, n) - 1,
                         sum(chunk) / len(chunk)))
    _write_csv(os.path.join(cfg.out, "trigger_windows.csv"),
               ("start", "end", "mean_trigger_rate"), win_rows)
    first = sum(rq[:window]) / window
    last = sum(rq[n - window:]) / len(rq[n - window:])
    _write_csv(os.path.join(cfg.out, "rq_trend.csv"),
               ("window", "mean_r_q"),
               [("first", first), ("last", last)])
    print(f"trigger rate: first-window {win_rows[0][2]:.4f}, "
          f"last-window {win_rows[-1][2]:.4f}")
    print(f"r_q trend: {last - first:+.4f}")
    return EXIT_OK


COMMANDS = {
    "dse": cmd_dse,
    "pairs": cmd_pairs,
    "train-rm": cmd_train_rm,
    "grpo": cmd_grpo,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qorseek",
        description="QoR-aware HLS reward pipeline at desk scale")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--kernels", default=None)
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--out", default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("QORSEEK_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(level=getattr(logging, level),
                        stream=sys.stderr,
                        format="%(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k)
                 for k in ("seed", "kernels", "budget", "epochs", "steps",
                           "out")}
    try:
        cfg = load_config(args.config, overrides)
        log.info("running %s with seed %d out %s",
                 args.command, cfg.seed, cfg.out)
        return COMMANDS[args.command](cfg)
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ConfigError, DescriptorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except Exception as exc:  # internal invariant violations
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
