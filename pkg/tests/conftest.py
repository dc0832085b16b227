import numpy as np
import pytest

from qorseek.demo_kernels import make_demo_kernels
from qorseek.design_space import (
    ArrayInfo, KernelDescriptor, LoopInfo, enumerate_space, render_design,
)
from qorseek.synth_oracle import AnalyticBackend, QorVector


@pytest.fixture(scope="session")
def demo_kernels():
    return make_demo_kernels()


@pytest.fixture(scope="session")
def backend():
    return AnalyticBackend()


@pytest.fixture
def tiny_kernel():
    """Single loop, trip 8, one add and one mul, no arrays."""
    return KernelDescriptor(
        name="tiny",
        loops=(LoopInfo("i", 8, None, 1, 1, ()),),
        arrays=())


@pytest.fixture
def array_kernel():
    """Single loop over one 16-word array (port-cap effects reachable)."""
    return KernelDescriptor(
        name="arr16",
        loops=(LoopInfo("i", 16, None, 1, 1, ("a",)),),
        arrays=(ArrayInfo("a", 16, 32),))


def random_qor(rng) -> QorVector:
    return QorVector(*(int(v) for v in rng.integers(0, 50, size=5)))


def all_designs(kernel):
    """Every legal design point of a kernel with its analytic QoR."""
    from qorseek.synth_oracle import analytic_qor
    out = []
    for cfg in enumerate_space(kernel):
        out.append((render_design(kernel, cfg), analytic_qor(kernel, cfg)))
    return out


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        import test_acceptance
    except ImportError:
        return
    lines = getattr(test_acceptance, "REPORT_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
