"""sweepd: job management for parameter-space exploration.

Records simulators, parameter sets, and runs in a three-layer provenance
model, submits jobs through a uniform scheduler wrapper, collects and
archives results, and exposes the lifecycle through an API, a CLI, and a
web console.
"""

__version__ = "0.1.0"
