"""Genuine atomic multicast simulator.

Thin wrapper over the C++ core: ``run`` simulates one seeded gTPC-C
experiment, ``check_trace`` runs the safety and minimality checkers over a
recorded trace.
"""

from ._amcast import (
    ProtocolError,
    cascade_probabilities,
    check_trace,
    latency_step,
    overlay,
    overlay_presets,
    percentile,
    random_run,
    run,
    scalability_factor,
    scenarios,
)

__all__ = [
    "ProtocolError",
    "cascade_probabilities",
    "check_trace",
    "latency_step",
    "overlay",
    "overlay_presets",
    "percentile",
    "random_run",
    "run",
    "scalability_factor",
    "scenarios",
]
