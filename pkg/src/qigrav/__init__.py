"""Quantum-information simulations of interferometers, Bell tests,
gravitationally induced entanglement and indefinite causal order."""

__version__ = "0.1.0"

from . import causal, core, gates, gie, interferometry, kernels, nonlocality
from .errors import QigravError

__all__ = ["QigravError", "__version__", "causal", "core", "gates", "gie", "interferometry", "kernels", "nonlocality"]
