"""Physical configuration: oscillator network, cat-state parameters, packet labels."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AsymmetricCoupling,
    DimensionMismatch,
    IndefinitePotential,
    NegativeMass,
    NonPositiveWidth,
    ValidationError,
)

FREE_MODE_TOL = 1e-9
MAX_PARTICLES = 8

PacketLabel = tuple[int, ...]


@dataclass(frozen=True)
class OscillatorNetwork:
    """Particles on a line joined by springs, plus per-particle external springs.

    ``coupling_k[i][j]`` is the spring constant between particles i and j
    (0-based); ``external_k[i]`` ties particle i to the origin.
    """

    masses: tuple[float, ...]
    external_k: tuple[float, ...]
    coupling_k: tuple[tuple[float, ...], ...]
    system_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "external_k", tuple(float(k) for k in self.external_k))
        object.__setattr__(
            self, "coupling_k", tuple(tuple(float(k) for k in row) for row in self.coupling_k)
        )

    @property
    def n(self) -> int:
        return len(self.masses)

    @classmethod
    def from_pairs(cls, masses, external_k, pairs: dict[tuple[int, int], float], system_index=0):
        """Build from a sparse ``{(i, j): k}`` map of springs (0-based indices)."""
        n = len(masses)
        k = np.zeros((n, n))
        for (i, j), val in pairs.items():
            if i == j:
                raise ValidationError(f"self-coupling on particle {i}")
            k[i, j] = k[j, i] = val
        return cls(tuple(masses), tuple(external_k), tuple(map(tuple, k)), system_index)

    def mass_array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    def coupling_array(self) -> np.ndarray:
        return np.asarray(self.coupling_k, dtype=float).reshape(self.n, self.n)


@dataclass(frozen=True)
class CatSpec:
    """Two-packet superposition per particle: packets centred at 0 and ``d[i]``."""

    d: tuple[float, ...]
    sigma: tuple[float, ...]
    hbar: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        object.__setattr__(self, "sigma", tuple(float(v) for v in self.sigma))
        object.__setattr__(self, "hbar", float(self.hbar))


@dataclass(frozen=True)
class ValidatedConfig:
    network: OscillatorNetwork
    cat: CatSpec
    potential: np.ndarray = field(repr=False, compare=False)
    free_modes: tuple[bool, ...] = ()

    @property
    def n(self) -> int:
        return self.network.n

    @property
    def system_index(self) -> int:
        return self.network.system_index


def all_labels(n: int) -> list[PacketLabel]:
    """Every packet label of ``n`` particles, first particle most significant."""
    return [tuple(bits) for bits in itertools.product((0, 1), repeat=n)]


def label_str(label: Sequence[int]) -> str:
    return "".join(str(int(a)) for a in label)


def potential_matrix(network: OscillatorNetwork) -> np.ndarray:
    """Matrix V with potential energy 1/2 x^T V x."""
    k = network.coupling_array()
    v = -k.copy()
    np.fill_diagonal(v, np.asarray(network.external_k) + k.sum(axis=1))
    return v


def potential_energy(network: OscillatorNetwork, x) -> float:
    """Potential energy summed spring by spring (independent of ``potential_matrix``)."""
    x = np.asarray(x, dtype=float)
    k = network.coupling_array()
    energy = 0.0
    for i in range(network.n):
        energy += 0.5 * network.external_k[i] * x[i] ** 2
        for j in range(i + 1, network.n):
            energy += 0.5 * k[i, j] * (x[i] - x[j]) ** 2
    return energy


def validate(
    network: OscillatorNetwork,
    cat: CatSpec,
    tol: float = FREE_MODE_TOL,
    max_particles: int = MAX_PARTICLES,
) -> ValidatedConfig:
    from .errors import NegativeEigenvalue
    from .normal_modes import eigendecompose, mass_weighted

    n = network.n
    if n < 1:
        raise ValidationError("network needs at least one particle")
    if n > max_particles:
        raise ValidationError(f"{n} particles exceeds the cap of {max_particles} (terms grow as 4^n)")
    if len(network.external_k) != n or len(network.coupling_k) != n:
        raise DimensionMismatch("external_k and coupling_k must match the number of masses")
    if any(len(row) != n for row in network.coupling_k):
        raise DimensionMismatch("coupling_k must be square")
    if len(cat.d) != n or len(cat.sigma) != n:
        raise DimensionMismatch("cat d and sigma must have one entry per particle")
    if not 0 <= network.system_index < n:
        raise ValidationError(f"system_index {network.system_index} out of range")

    masses = network.mass_array()
    if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
        raise NegativeMass(f"masses must be positive, got {network.masses}")
    k = network.coupling_array()
    if not np.array_equal(k, k.T):
        raise AsymmetricCoupling("coupling_k is not symmetric")
    if np.any(np.diag(k) != 0):
        raise ValidationError("coupling_k must have a zero diagonal")
    if np.any(k < 0) or any(e < 0 for e in network.external_k):
        raise ValidationError("spring constants must be non-negative")
    if any(not s > 0 for s in cat.sigma):
        raise NonPositiveWidth(f"packet widths must be positive, got {cat.sigma}")
    if not cat.hbar > 0:
        raise ValidationError("hbar must be positive")
    if cat.t0 != 0.0:
        raise ValidationError("t0 is fixed to 0")

    v = potential_matrix(network)
    w = mass_weighted(v, masses)
    try:
        basis = eigendecompose(w, masses, tol=tol)
    except NegativeEigenvalue as exc:
        raise IndefinitePotential(str(exc)) from exc
    return ValidatedConfig(network, cat, v, basis.free_mode)
