"""Change of variables to decoupled normal modes.

Particle coordinates ``x`` map to mode coordinates ``q = O^T M^{1/2} x``; in
mode coordinates every mode has unit mass and squared frequency ``omega2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NegativeEigenvalue, NoConvergence

MAX_SWEEPS = 100


@dataclass(frozen=True)
class NormalModeBasis:
    masses: np.ndarray
    O: np.ndarray
    omega2: np.ndarray
    free_mode: tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.masses)

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(np.clip(self.omega2, 0.0, None))

    @property
    def to_mode_matrix(self) -> np.ndarray:
        """``S`` with ``q = S x``."""
        return self.O.T * np.sqrt(self.masses)[None, :]

    @property
    def from_mode_matrix(self) -> np.ndarray:
        """``T`` with ``x = T q``."""
        return self.O / np.sqrt(self.masses)[:, None]


def mass_weighted(V, masses) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if V.ndim != 2 or V.shape != (len(masses), len(masses)):
        raise DimensionMismatch(f"potential {V.shape} vs {len(masses)} masses")
    s = 1.0 / np.sqrt(masses)
    w = V * s[:, None] * s[None, :]
    return 0.5 * (w + w.T)


def jacobi_eigh(W, max_sweeps: int = MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for a small real symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` in the order produced by the sweeps;
    callers apply their own ordering.
    """
    a = np.array(W, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= 1e-17 * scale:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NoConvergence(f"Jacobi sweeps did not converge in {max_sweeps} sweeps")


def eigendecompose(W, masses=None, tol: float = 1e-9) -> NormalModeBasis:
    """Diagonalize the mass-weighted potential ``W``.

    Eigenvalues come back ascending and each eigenvector has its
    largest-magnitude component positive, so outputs are reproducible.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {W.shape}")
    masses = np.ones(W.shape[0]) if masses is None else np.asarray(masses, dtype=float)
    if len(masses) != W.shape[0]:
        raise DimensionMismatch("masses do not match matrix size")

    vals, vecs = jacobi_eigh(W)
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        i = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[i, k] < 0:
            vecs[:, k] = -vecs[:, k]
    if vals.size and vals[0] < -tol:
        raise NegativeEigenvalue(f"eigenvalue {vals[0]:.6g} below -{tol:g}")
    free = tuple(bool(abs(w2) <= tol) for w2 in vals)
    return NormalModeBasis(masses.copy(), vecs, vals, free)


def basis_for(network) -> NormalModeBasis:
    from .model import potential_matrix

    masses = network.mass_array()
    return eigendecompose(mass_weighted(potential_matrix(network), masses), masses)


def to_modes(x, basis: NormalModeBasis) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != basis.n:
        raise DimensionMismatch(f"vector of length {x.shape[-1]} for {basis.n} modes")
    return x @ basis.to_mode_matrix.T


def from_modes(q, basis: NormalModeBasis) -> np.ndarray:
    q = np.asarray(q)
    if q.shape[-1] != basis.n:
        raise DimensionMismatch(f"vector of length {q.shape[-1]} for {basis.n} modes")
    return q @ basis.from_mode_matrix.T
