"""Desk-scale QoR-aware HLS reward pipeline.

Subsystems: pragma design spaces with a deterministic synthesis oracle,
Pareto/DSE corpus construction, a comparative reward model with MC-dropout
uncertainty switching and online updates, and a GRPO simulation harness.
"""

__version__ = "0.1.0"
