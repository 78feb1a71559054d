"""Perturbative quantum simulation emulator with exact full-register oracles."""

from importlib.metadata import PackageNotFoundError, version

from .errors import AmbiguityError, EvolutionError, ResourceLimitError, UnsupportedConfigurationError
from .evolve import EvolverConfig, evolve_dense, evolve_krylov
from .pauli import IDENTITY, BasisProjector, PauliString, PauliSum, apply_pauli, apply_pauli_sum, bilinear

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - source checkout without install
    __version__ = "0.0.0"

__all__ = [
    "AmbiguityError",
    "BasisProjector",
    "EvolutionError",
    "EvolverConfig",
    "IDENTITY",
    "PauliString",
    "PauliSum",
    "ResourceLimitError",
    "UnsupportedConfigurationError",
    "apply_pauli",
    "apply_pauli_sum",
    "bilinear",
    "evolve_dense",
    "evolve_krylov",
]
