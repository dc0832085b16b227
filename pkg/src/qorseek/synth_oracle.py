"""Deterministic analytic stand-in for an HLS synthesis tool.

Maps (kernel, pragma config) to a 5-metric cost vector plus compile and
functional verdicts.  The backend interface is the substitution point for
a real tool; the analytic backend is a total, pure function so every
downstream result is reproducible.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple
import hashlib
import math

from .design_space import (
    PORTS_PER_BANK, DesignPoint, KernelDescriptor, PragmaConfig,
    ValidationError, effective_parallelism, validate_config,
)

PIPELINE_DEPTH = 3
CONTROL_OVERHEAD = 10
BASE_LUT = 200
BASE_FF = 100
LUT_PER_ADD = 32
LUT_PER_MUL = 16
LUT_PIPELINE = 64
BRAM_BITS = 18432
HAZARD_SALT = "qorseek-hazard-v1"
DEFAULT_COST_SECONDS = 180.0


@dataclass(frozen=True)
class QorVector:
    latency_cycles: int
    lut: int
    dsp: int
    bram: int
    ff: int

    def as_tuple(self) -> Tuple[int, int, int, int, int]:
        return (self.latency_cycles, self.lut, self.dsp, self.bram, self.ff)

    @staticmethod
    def metric_names() -> Tuple[str, ...]:
        return ("latency_cycles", "lut", "dsp", "bram", "ff")


@dataclass(frozen=True)
class SynthesisVerdict:
    compiled: bool
    functional: bool
    qor: Optional[QorVector] = None

    def __post_init__(self):
        if self.functional and not self.compiled:
            raise ValueError("functional implies compiled")
        if self.compiled != (self.qor is not None):
            raise ValueError("qor must be present iff compiled")


def analytic_qor(kernel: KernelDescriptor, config: PragmaConfig) -> QorVector:
    """Fixed-formula cost model; all integer arithmetic with explicit ceils.

    Innermost loops: pipelined cycles are ceil(T/e)*II + pipeline depth,
    otherwise ceil(T/e)*(1 + adds + muls).  Each ancestor multiplies its
    children's total by its own ceil(T/e).  Parallelism e per loop is the
    unroll factor capped at 2 ports per bank of every accessed array.
    """
    validate_config(kernel, config)
    e: Dict[str, int] = {
        l.id: effective_parallelism(kernel, config, l.id)
        for l in kernel.loops}

    def nest_cycles(loop_id: str) -> int:
        loop = kernel.loop(loop_id)
        lp = config.loop_pragma(loop_id)
        children = kernel.children_of(loop_id)
        iters = math.ceil(loop.trip_count / e[loop_id])
        if not children:
            if lp.pipeline:
                return iters * lp.ii + PIPELINE_DEPTH
            return iters * (1 + loop.ops_add + loop.ops_mul)
        return iters * sum(nest_cycles(c.id) for c in children)

    latency = CONTROL_OVERHEAD + sum(
        nest_cycles(l.id) for l in kernel.children_of(None))

    dsp = sum(l.ops_mul * e[l.id] for l in kernel.loops)
    lut = BASE_LUT
    for l in kernel.loops:
        lp = config.loop_pragma(l.id)
        lut += (l.ops_add * LUT_PER_ADD + l.ops_mul * LUT_PER_MUL) * e[l.id]
        if lp.pipeline:
            lut += LUT_PIPELINE * e[l.id]
    ff = BASE_FF + lut // 2

    bram = 0
    for a in kernel.arrays:
        ap = config.array_pragma(a.name)
        if ap.partition_kind == "complete":
            continue
        f = ap.partition_factor
        bram += f * math.ceil(a.num_words * a.word_bits / (f * BRAM_BITS))

    return QorVector(latency_cycles=latency, lut=lut, dsp=dsp, bram=bram, ff=ff)


def hazard_draw(kernel_name: str, config: PragmaConfig) -> float:
    """Deterministic pseudo-random value in [0, 1) for the hazard set."""
    payload = f"{HAZARD_SALT}|{kernel_name}|{config.key()}".encode()
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big") / 2 ** 64


class SynthesisBackend:
    """Interface a real synthesis tool could implement."""

    cost_model_seconds: float

    def evaluate(self, design: DesignPoint) -> SynthesisVerdict:
        raise NotImplementedError


class AnalyticBackend(SynthesisBackend):
    """Pure analytic oracle with hash-based functional hazards."""

    def __init__(self, cost_model_seconds: float = DEFAULT_COST_SECONDS):
        self.cost_model_seconds = float(cost_model_seconds)

    def evaluate(self, design: DesignPoint) -> SynthesisVerdict:
        try:
            validate_config(design.kernel, design.config)
            legal = True
        except ValidationError:
            legal = False
        compiled = legal and not design.dynamic_alloc_flag
        if not compiled:
            return SynthesisVerdict(compiled=False, functional=False, qor=None)
        qor = analytic_qor(design.kernel, design.config)
        draw = hazard_draw(design.kernel.name, design.config)
        functional = draw >= design.kernel.hazard_fraction
        return SynthesisVerdict(compiled=True, functional=functional, qor=qor)


def make_backend(name: str = "analytic",
                 cost_seconds: float = DEFAULT_COST_SECONDS
                 ) -> SynthesisBackend:
    if name == "analytic":
        return AnalyticBackend(cost_model_seconds=cost_seconds)
    raise ValueError(f"unknown oracle backend {name!r}")
