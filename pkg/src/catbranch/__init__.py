"""Exact Gaussian dynamics of cat states in coupled oscillator networks.

Evolves Schroedinger-cat product states of a linear spring network, traces
out every particle except one, and tracks how the interference between the
system particle's two packets decays, alongside the crossing and branching
of the matching classical trajectory ensemble.
"""

__version__ = "0.1.0"

from .errors import CatBranchError
from .model import CatSpec, OscillatorNetwork, ValidatedConfig, validate

__all__ = ["CatBranchError", "CatSpec", "OscillatorNetwork", "ValidatedConfig", "validate", "__version__"]
