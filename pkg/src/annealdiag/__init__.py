"""Desk-scale reverse-anneal sampling simulator and diagnostics.

Subpackages follow the pipeline: ``model`` builds Ising instances,
``qsim``/``lindblad`` simulate pause-point quantum dynamics, ``samplers``
provide the classical baselines, ``diagnostics`` computes the memory
order parameter and conditional-Gibbs distances, ``landscape`` does exact
enumeration, and ``campaign`` orchestrates sweeps, records, and replay.
"""

__version__ = "0.1.0"
