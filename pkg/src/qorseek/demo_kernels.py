"""Built-in demo kernel suite used by the tests and the quickstart docs.

Eight kernels spanning single loops, nests, and multi-array access, each
with a non-trivial latency/resource trade-off under the analytic oracle.
"""

import os
from typing import List

from .design_space import (
    ArrayInfo, KernelDescriptor, LoopInfo, serialize_kernel_descriptor,
)


def make_demo_kernels() -> List[KernelDescriptor]:
    return [
        KernelDescriptor(
            name="vecscale",
            loops=(LoopInfo("i", 16, None, 1, 1, ("a",)),),
            arrays=(ArrayInfo("a", 16, 32),),
            hazard_fraction=0.2),
        KernelDescriptor(
            name="dotprod",
            loops=(LoopInfo("i", 32, None, 2, 1, ("x", "y")),),
            arrays=(ArrayInfo("x", 32, 32), ArrayInfo("y", 32, 32)),
            hazard_fraction=0.2),
        KernelDescriptor(
            name="matvec",
            loops=(LoopInfo("r", 8, None, 0, 0, ()),
                   LoopInfo("c", 8, "r", 1, 2, ("m",))),
            arrays=(ArrayInfo("m", 64, 32),),
            hazard_fraction=0.25),
        KernelDescriptor(
            name="stencil3",
            loops=(LoopInfo("i", 12, None, 2, 1, ("grid",)),),
            arrays=(ArrayInfo("grid", 24, 16),),
            hazard_fraction=0.15),
        KernelDescriptor(
            name="fir8",
            loops=(LoopInfo("n", 16, None, 1, 1, ("s", "c")),),
            arrays=(ArrayInfo("s", 16, 16), ArrayInfo("c", 8, 16)),
            hazard_fraction=0.2),
        KernelDescriptor(
            name="outerprod",
            loops=(LoopInfo("i", 4, None, 0, 0, ()),
                   LoopInfo("j", 16, "i", 1, 1, ("u", "v"))),
            arrays=(ArrayInfo("u", 16, 32), ArrayInfo("v", 4, 32)),
            hazard_fraction=0.25),
        KernelDescriptor(
            name="reduce_tree",
            loops=(LoopInfo("i", 64, None, 1, 0, ("buf",)),),
            arrays=(ArrayInfo("buf", 64, 8),),
            hazard_fraction=0.15),
        KernelDescriptor(
            name="conv1d",
            loops=(LoopInfo("o", 8, None, 0, 0, ()),
                   LoopInfo("k", 4, "o", 1, 1, ("w", "d"))),
            arrays=(ArrayInfo("w", 4, 16), ArrayInfo("d", 16, 16)),
            hazard_fraction=0.2),
    ]


def write_demo_kernels(directory: str) -> List[str]:
    """Write each demo kernel as a .kd descriptor file; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for kernel in make_demo_kernels():
        path = os.path.join(directory, f"{kernel.name}.kd")
        with open(path, "w") as f:
            f.write(serialize_kernel_descriptor(kernel))
        paths.append(path)
    return paths
