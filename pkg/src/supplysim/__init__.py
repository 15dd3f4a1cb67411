"""supplysim: a deterministic multi-agent supply-chain gridworld.

Agents maintain their own processing centers with help from others; the
package ships the simulation engine, social-outcome metrics, scripted and
learned policies, and an experiment runner for mechanism interventions
(self-repair speed, geometry, topology, specialization).
"""

__version__ = "0.1.0"

from .topology import Topology, build_topology, downstream_set, shapley_cost_shares, upstream_set

__all__ = [
    "Topology",
    "build_topology",
    "upstream_set",
    "downstream_set",
    "shapley_cost_shares",
    "__version__",
]
