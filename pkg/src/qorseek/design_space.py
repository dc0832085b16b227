"""Kernel descriptors, pragma configuration spaces, and design rendering.

A kernel is described by its loop nest and array declarations in a small
line-oriented text format (see ``parse_kernel_descriptor``).  The pragma
space per kernel covers loop unrolling, pipelining with an initiation
interval, and array partitioning.  All sampling and enumeration here is
deterministic given a seed.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple
import itertools
import random

DEFAULT_II_CHOICES = (1, 2, 4)
DEFAULT_SPACE_CAP = 10 ** 6
WORD_BIT_CHOICES = (8, 16, 32, 64)


class DescriptorError(ValueError):
    """Malformed or invalid kernel descriptor input."""


class ParseError(DescriptorError):
    """Syntax error in a descriptor file; carries a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class ValidationError(DescriptorError):
    """A structurally parsed descriptor or config violates an invariant."""


class SpaceOverflowError(ValueError):
    """Enumeration would exceed the configured cap; sample instead."""


@dataclass(frozen=True)
class LoopInfo:
    id: str
    trip_count: int
    parent: Optional[str] = None
    ops_add: int = 0
    ops_mul: int = 0
    arrays_accessed: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ArrayInfo:
    name: str
    num_words: int
    word_bits: int


@dataclass(frozen=True)
class KernelDescriptor:
    name: str
    loops: Tuple[LoopInfo, ...]
    arrays: Tuple[ArrayInfo, ...]
    hazard_fraction: float = 0.0

    def loop(self, loop_id: str) -> LoopInfo:
        for l in self.loops:
            if l.id == loop_id:
                return l
        raise KeyError(loop_id)

    def array(self, name: str) -> ArrayInfo:
        for a in self.arrays:
            if a.name == name:
                return a
        raise KeyError(name)

    def children_of(self, loop_id: Optional[str]) -> Tuple[LoopInfo, ...]:
        return tuple(l for l in self.loops if l.parent == loop_id)

    def innermost_loops(self) -> Tuple[LoopInfo, ...]:
        have_children = {l.parent for l in self.loops if l.parent is not None}
        return tuple(l for l in self.loops if l.id not in have_children)


@dataclass(frozen=True)
class LoopPragma:
    unroll_factor: int = 1
    pipeline: bool = False
    ii: int = 1


@dataclass(frozen=True)
class ArrayPragma:
    partition_kind: str = "none"  # none | cyclic | block | complete
    partition_factor: int = 1


@dataclass(frozen=True)
class PragmaConfig:
    loops: Tuple[Tuple[str, LoopPragma], ...]
    arrays: Tuple[Tuple[str, ArrayPragma], ...]

    def loop_pragma(self, loop_id: str) -> LoopPragma:
        return dict(self.loops)[loop_id]

    def array_pragma(self, name: str) -> ArrayPragma:
        return dict(self.arrays)[name]

    def key(self) -> str:
        """Canonical string form, stable across runs; used for hashing."""
        parts = []
        for lid, lp in self.loops:
            parts.append(f"L:{lid}:u{lp.unroll_factor}:p{int(lp.pipeline)}:i{lp.ii}")
        for name, ap in self.arrays:
            parts.append(f"A:{name}:{ap.partition_kind}:{ap.partition_factor}")
        return "|".join(parts)


@dataclass(frozen=True)
class DesignPoint:
    kernel: KernelDescriptor
    config: PragmaConfig
    rendered_code: str
    dynamic_alloc_flag: bool = False


def validate_kernel(kernel: KernelDescriptor) -> None:
    """Raise ValidationError unless every KernelDescriptor invariant holds."""
    ids = [l.id for l in kernel.loops]
    if len(ids) != len(set(ids)):
        raise ValidationError(f"kernel {kernel.name}: duplicate loop ids")
    names = [a.name for a in kernel.arrays]
    if len(names) != len(set(names)):
        raise ValidationError(f"kernel {kernel.name}: duplicate array names")
    if not kernel.loops:
        raise ValidationError(f"kernel {kernel.name}: needs at least one loop")
    if not 0.0 <= kernel.hazard_fraction <= 1.0:
        raise ValidationError("hazard_fraction must lie in [0, 1]")
    id_set = set(ids)
    for l in kernel.loops:
        if l.trip_count < 1:
            raise ValidationError(f"loop {l.id}: trip_count must be >= 1")
        if l.ops_add < 0 or l.ops_mul < 0:
            raise ValidationError(f"loop {l.id}: op counts must be >= 0")
        if l.parent is not None and l.parent not in id_set:
            raise ValidationError(f"loop {l.id}: unknown parent {l.parent}")
        for arr in l.arrays_accessed:
            if arr not in set(names):
                raise ValidationError(f"loop {l.id}: undeclared array {arr}")
    # Parent chains must be acyclic.
    for l in kernel.loops:
        seen = set()
        cur: Optional[str] = l.id
        while cur is not None:
            if cur in seen:
                raise ValidationError(f"loop {l.id}: cyclic parent chain")
            seen.add(cur)
            cur = kernel.loop(cur).parent
    for a in kernel.arrays:
        if a.num_words < 1:
            raise ValidationError(f"array {a.name}: num_words must be >= 1")
        if a.word_bits not in WORD_BIT_CHOICES:
            raise ValidationError(
                f"array {a.name}: word_bits must be one of {WORD_BIT_CHOICES}")


def parse_kernel_descriptor(text: str) -> KernelDescriptor:
    """Parse the line-oriented descriptor format into a validated kernel.

    Format::

        kernel <name>
        loop <id> trip=<n> [parent=<id>] add=<n> mul=<n> [arrays=<a,b>]
        array <name> words=<n> bits=<n>
        hazard=<real>

    ``#`` starts a comment; blank lines are ignored.
    """
    name: Optional[str] = None
    loops: List[LoopInfo] = []
    arrays: List[ArrayInfo] = []
    hazard = 0.0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        head = fields[0]
        if head == "kernel":
            if len(fields) != 2:
                raise ParseError(line_no, "expected: kernel <name>")
            name = fields[1]
        elif head == "loop":
            if len(fields) < 2:
                raise ParseError(line_no, "expected: loop <id> key=value ...")
            kv = _parse_kv(fields[2:], line_no)
            try:
                trip = int(kv.pop("trip"))
            except KeyError:
                raise ParseError(line_no, "loop is missing trip=<n>")
            arrays_accessed: Tuple[str, ...] = ()
            if "arrays" in kv:
                arrays_accessed = tuple(
                    a for a in kv.pop("arrays").split(",") if a)
            loops.append(LoopInfo(
                id=fields[1],
                trip_count=trip,
                parent=kv.pop("parent", None),
                ops_add=int(kv.pop("add", "0")),
                ops_mul=int(kv.pop("mul", "0")),
                arrays_accessed=arrays_accessed,
            ))
            if kv:
                raise ParseError(line_no, f"unknown loop keys: {sorted(kv)}")
        elif head == "array":
            if len(fields) < 2:
                raise ParseError(line_no, "expected: array <name> key=value ...")
            kv = _parse_kv(fields[2:], line_no)
            try:
                arrays.append(ArrayInfo(
                    name=fields[1],
                    num_words=int(kv.pop("words")),
                    word_bits=int(kv.pop("bits")),
                ))
            except KeyError as exc:
                raise ParseError(line_no, f"array is missing {exc.args[0]}=<n>")
            if kv:
                raise ParseError(line_no, f"unknown array keys: {sorted(kv)}")
        elif head.startswith("hazard="):
            try:
                hazard = float(head.split("=", 1)[1])
            except ValueError:
                raise ParseError(line_no, "hazard=<real> expected")
        else:
            raise ParseError(line_no, f"unknown directive {head!r}")
    if name is None:
        raise ParseError(1, "descriptor is missing a 'kernel <name>' line")
    kernel = KernelDescriptor(
        name=name, loops=tuple(loops), arrays=tuple(arrays),
        hazard_fraction=hazard)
    validate_kernel(kernel)
    return kernel


def _parse_kv(fields: Sequence[str], line_no: int) -> Dict[str, str]:
    kv: Dict[str, str] = {}
    for f in fields:
        if "=" not in f:
            raise ParseError(line_no, f"expected key=value, got {f!r}")
        k, v = f.split("=", 1)
        if k in kv:
            raise ParseError(line_no, f"duplicate key {k!r}")
        kv[k] = v
    return kv


def serialize_kernel_descriptor(kernel: KernelDescriptor) -> str:
    """Inverse of parse_kernel_descriptor (round-trips exactly)."""
    lines = [f"kernel {kernel.name}"]
    for l in kernel.loops:
        parts = [f"loop {l.id}", f"trip={l.trip_count}"]
        if l.parent is not None:
            parts.append(f"parent={l.parent}")
        parts.append(f"add={l.ops_add}")
        parts.append(f"mul={l.ops_mul}")
        if l.arrays_accessed:
            parts.append("arrays=" + ",".join(l.arrays_accessed))
        lines.append(" ".join(parts))
    for a in kernel.arrays:
        lines.append(f"array {a.name} words={a.num_words} bits={a.word_bits}")
    lines.append(f"hazard={kernel.hazard_fraction!r}")
    return "\n".join(lines) + "\n"


def unroll_choices(trip_count: int) -> Tuple[int, ...]:
    """Power-of-two divisors of the trip count, plus the trip count itself."""
    choices = [1]
    p = 2
    while p < trip_count:
        if trip_count % p == 0:
            choices.append(p)
        p *= 2
    if trip_count > 1:
        choices.append(trip_count)
    return tuple(choices)


def pipeline_choices(ii_choices: Sequence[int] = DEFAULT_II_CHOICES
                     ) -> Tuple[Tuple[bool, int], ...]:
    """(pipeline, ii) pairs: off, then on at each initiation interval."""
    return ((False, 1),) + tuple((True, ii) for ii in ii_choices)


def partition_choices(array: ArrayInfo) -> Tuple[ArrayPragma, ...]:
    """Legal partition pragmas for one array.

    Factors for cyclic/block are power-of-two divisors strictly between 1
    and num_words; a full-width cyclic/block partition folds into complete.
    """
    choices = [ArrayPragma("none", 1)]
    f = 2
    while f < array.num_words:
        if array.num_words % f == 0:
            choices.append(ArrayPragma("cyclic", f))
            choices.append(ArrayPragma("block", f))
        f *= 2
    if array.num_words > 1:
        choices.append(ArrayPragma("complete", array.num_words))
    return tuple(choices)


def space_dimensions(kernel: KernelDescriptor,
                     ii_choices: Sequence[int] = DEFAULT_II_CHOICES):
    """Per-dimension choice lists, in a fixed order.

    Returns a list of ("loop_unroll"|"loop_pipe"|"array_part", name, choices)
    tuples; the cartesian product of the choice lists is the full space.
    """
    dims = []
    for l in kernel.loops:
        dims.append(("loop_unroll", l.id, unroll_choices(l.trip_count)))
        dims.append(("loop_pipe", l.id, pipeline_choices(ii_choices)))
    for a in kernel.arrays:
        dims.append(("array_part", a.name, partition_choices(a)))
    return dims


def _assemble(kernel: KernelDescriptor, picks: Sequence, dims) -> PragmaConfig:
    loop_u: Dict[str, int] = {}
    loop_p: Dict[str, Tuple[bool, int]] = {}
    arr: Dict[str, ArrayPragma] = {}
    for (kind, name, _), pick in zip(dims, picks):
        if kind == "loop_unroll":
            loop_u[name] = pick
        elif kind == "loop_pipe":
            loop_p[name] = pick
        else:
            arr[name] = pick
    return PragmaConfig(
        loops=tuple(
            (l.id, LoopPragma(loop_u[l.id], loop_p[l.id][0], loop_p[l.id][1]))
            for l in kernel.loops),
        arrays=tuple((a.name, arr[a.name]) for a in kernel.arrays),
    )


def space_size(kernel: KernelDescriptor,
               ii_choices: Sequence[int] = DEFAULT_II_CHOICES) -> int:
    n = 1
    for _, _, choices in space_dimensions(kernel, ii_choices):
        n *= len(choices)
    return n


def enumerate_space(kernel: KernelDescriptor,
                    ii_choices: Sequence[int] = DEFAULT_II_CHOICES,
                    cap: int = DEFAULT_SPACE_CAP) -> List[PragmaConfig]:
    """All legal configs in deterministic lexicographic dimension order."""
    validate_kernel(kernel)
    total = space_size(kernel, ii_choices)
    if total > cap:
        raise SpaceOverflowError(
            f"space has {total} configs (> cap {cap}); use sample_config")
    dims = space_dimensions(kernel, ii_choices)
    return [_assemble(kernel, picks, dims)
            for picks in itertools.product(*(c for _, _, c in dims))]


def sample_config(kernel: KernelDescriptor, rng_seed: int,
                  ii_choices: Sequence[int] = DEFAULT_II_CHOICES
                  ) -> PragmaConfig:
    """Uniform independent choice per dimension, reproducible from seed."""
    rng = random.Random(rng_seed)
    dims = space_dimensions(kernel, ii_choices)
    picks = [choices[rng.randrange(len(choices))] for _, _, choices in dims]
    return _assemble(kernel, picks, dims)


def validate_config(kernel: KernelDescriptor, config: PragmaConfig) -> None:
    """Raise ValidationError unless config is legal for kernel."""
    cfg_loops = dict(config.loops)
    cfg_arrays = dict(config.arrays)
    if set(cfg_loops) != {l.id for l in kernel.loops}:
        raise ValidationError("config loop ids do not match kernel loops")
    if set(cfg_arrays) != {a.name for a in kernel.arrays}:
        raise ValidationError("config array names do not match kernel arrays")
    for l in kernel.loops:
        lp = cfg_loops[l.id]
        if lp.unroll_factor < 1 or lp.unroll_factor > l.trip_count:
            raise ValidationError(f"loop {l.id}: unroll_factor out of range")
        if lp.unroll_factor != l.trip_count \
                and l.trip_count % lp.unroll_factor != 0:
            raise ValidationError(
                f"loop {l.id}: unroll_factor must divide trip_count")
        if lp.ii < 1:
            raise ValidationError(f"loop {l.id}: ii must be >= 1")
        if not lp.pipeline and lp.ii != 1:
            # Canonical form: ii is only meaningful when pipelining; pinning
            # it to 1 otherwise keeps rendering injective over configs.
            raise ValidationError(f"loop {l.id}: ii must be 1 when not pipelined")
    for a in kernel.arrays:
        ap = cfg_arrays[a.name]
        if ap.partition_kind not in ("none", "cyclic", "block", "complete"):
            raise ValidationError(f"array {a.name}: unknown partition kind")
        if ap.partition_kind == "none" and ap.partition_factor != 1:
            raise ValidationError(
                f"array {a.name}: factor must be 1 for kind=none")
        if ap.partition_kind == "complete" \
                and ap.partition_factor != a.num_words:
            raise ValidationError(
                f"array {a.name}: complete requires factor=num_words")
        if ap.partition_kind in ("cyclic", "block") \
                and a.num_words % ap.partition_factor != 0:
            raise ValidationError(
                f"array {a.name}: factor must divide num_words")


RENDER_LANE_CAP = 12
RENDER_BANK_CAP = 12
PORTS_PER_BANK = 2


def effective_parallelism(kernel: KernelDescriptor, config: PragmaConfig,
                          loop_id: str) -> int:
    """Parallel lanes the schedule can actually sustain: the unroll factor
    capped at PORTS_PER_BANK concurrent accesses per bank of every array
    the loop touches."""
    loop = kernel.loop(loop_id)
    lp = config.loop_pragma(loop_id)
    e = lp.unroll_factor
    for arr in loop.arrays_accessed:
        ap = config.array_pragma(arr)
        e = min(e, PORTS_PER_BANK * ap.partition_factor)
    return max(1, e)


def render_design(kernel: KernelDescriptor, config: PragmaConfig,
                  dynamic_alloc: bool = False) -> DesignPoint:
    """Deterministically pretty-print the kernel with its pragma choices.

    Emits exactly one "#pragma HLS" line per non-default pragma choice
    (unroll factor > 1, pipeline on, partition kind != none).  The body
    mirrors what the pragmas do to the scheduled hardware: a partitioned
    array emits one marker per bank, and an unrolled loop emits one
    marker per lane the port binding can actually sustain (both capped,
    so large factors stay within the tokenizer budget).
    """
    validate_config(kernel, config)
    cfg_arrays = dict(config.arrays)
    lines: List[str] = []
    args = ", ".join(
        f"word{a.word_bits}_t {a.name}[{a.num_words}]" for a in kernel.arrays)
    lines.append(f"void {kernel.name}({args}) {{")
    for a in kernel.arrays:
        ap = cfg_arrays[a.name]
        if ap.partition_kind != "none":
            lines.append(
                f"  #pragma HLS ARRAY_PARTITION variable={a.name} "
                f"{ap.partition_kind} factor={ap.partition_factor}")
            banks = a.num_words if ap.partition_kind == "complete" \
                else ap.partition_factor
            for b in range(min(banks, RENDER_BANK_CAP)):
                lines.append(f"  /* bank {b} */")
    if dynamic_alloc:
        lines.append("  int *scratch = (int *)malloc(16 * sizeof(int));")

    def emit(loop_id: Optional[str], depth: int) -> None:
        indent = "  " * (depth + 1)
        for l in kernel.children_of(loop_id):
            lp = config.loop_pragma(l.id)
            lines.append(
                f"{indent}for (int {l.id} = 0; {l.id} < {l.trip_count}; "
                f"{l.id}++) {{")
            if lp.unroll_factor > 1:
                lines.append(
                    f"{indent}  #pragma HLS UNROLL factor={lp.unroll_factor}")
            if lp.pipeline:
                lines.append(f"{indent}  #pragma HLS PIPELINE II={lp.ii}")
            lanes = effective_parallelism(kernel, config, l.id)
            for lane in range(1, min(lanes, RENDER_LANE_CAP)):
                lines.append(f"{indent}  /* lane {lane} */")
            body = []
            for arr in l.arrays_accessed:
                body.append(f"{arr}[{l.id} % {kernel.array(arr).num_words}]")
            rhs = " + ".join(body) if body else "1"
            if l.ops_mul > 0:
                rhs = f"({rhs}) * {l.ops_mul}"
            if l.ops_add > 0:
                rhs = f"{rhs} + {l.ops_add}"
            lines.append(f"{indent}  acc = {rhs};")
            emit(l.id, depth + 1)
            lines.append(f"{indent}}}")

    emit(None, 0)
    lines.append("}")
    return DesignPoint(
        kernel=kernel, config=config, rendered_code="\n".join(lines) + "\n",
        dynamic_alloc_flag=dynamic_alloc)
