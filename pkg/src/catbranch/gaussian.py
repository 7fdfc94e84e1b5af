"""Exact algebra of complex Gaussian terms ``exp(c + b.x - 1/2 x.A.x)``.

Every operation accepts a *batch* of terms: ``c`` has shape ``batch``,
``b`` has shape ``batch + (N,)`` and ``A`` has shape ``batch + (N, N)``.
A single term is the special case of an empty batch shape.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotNormalizable, SingularBlock
from .model import PacketLabel

LOG_2PI = np.log(2.0 * np.pi)
EXP_CLAMP = 700.0
PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class ComplexGaussianTerm:
    c: np.ndarray
    b: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        c = np.asarray(self.c, dtype=complex)
        if A.ndim < 2 or A.shape[-1] != A.shape[-2] or b.shape[-1:] != A.shape[-1:]:
            raise DimensionMismatch(f"inconsistent shapes b{b.shape} A{A.shape}")
        A = 0.5 * (A + np.swapaxes(A, -1, -2))
        batch = np.broadcast_shapes(c.shape, b.shape[:-1], A.shape[:-2])
        object.__setattr__(self, "A", np.broadcast_to(A, batch + A.shape[-2:]).copy())
        object.__setattr__(self, "b", np.broadcast_to(b, batch + b.shape[-1:]).copy())
        object.__setattr__(self, "c", np.broadcast_to(c, batch).copy())
        for arr in (self.A, self.b, self.c):
            arr.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.b.shape[-1]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.c.shape

    def __len__(self):
        return self.batch_shape[0]

    def __getitem__(self, idx) -> "ComplexGaussianTerm":
        return ComplexGaussianTerm(self.c[idx], self.b[idx], self.A[idx])

    def __call__(self, x):
        return evaluate(self, x)

    @classmethod
    def unit(cls, dim: int) -> "ComplexGaussianTerm":
        """The multiplicative identity (the constant function 1)."""
        return cls(0.0, np.zeros(dim), np.zeros((dim, dim)))


@dataclass(frozen=True)
class LabeledTerm:
    """A term together with the packet labels it connects.

    Wavefunction terms use ``ket`` only; ``bra`` is ``None``.
    """

    term: ComplexGaussianTerm
    ket: PacketLabel
    bra: PacketLabel | None = None


def stack(terms: Iterable[ComplexGaussianTerm]) -> ComplexGaussianTerm:
    terms = list(terms)
    return ComplexGaussianTerm(
        np.stack([t.c for t in terms]),
        np.stack([t.b for t in terms]),
        np.stack([t.A for t in terms]),
    )


def _check_dim(term: ComplexGaussianTerm, n: int):
    if term.dim != n:
        raise DimensionMismatch(f"term of dimension {term.dim} vs {n}")


def log_evaluate(term: ComplexGaussianTerm, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_dim(term, x.shape[-1])
    lin = np.einsum("...i,...i->...", term.b, x)
    quad = np.einsum("...i,...ij,...j->...", x, term.A, x)
    return term.c + lin - 0.5 * quad


def evaluate(term: ComplexGaussianTerm, x) -> np.ndarray | complex:
    """Value at real point(s) ``x``; the real exponent is clamped to +-700."""
    z = log_evaluate(term, x)
    z = np.clip(z.real, -EXP_CLAMP, EXP_CLAMP) + 1j * z.imag
    out = np.exp(z)
    return complex(out) if np.ndim(out) == 0 else out


def multiply(t1: ComplexGaussianTerm, t2: ComplexGaussianTerm) -> ComplexGaussianTerm:
    _check_dim(t2, t1.dim)
    return ComplexGaussianTerm(t1.c + t2.c, t1.b + t2.b, t1.A + t2.A)


def conjugate(term: ComplexGaussianTerm) -> ComplexGaussianTerm:
    return ComplexGaussianTerm(term.c.conj(), term.b.conj(), term.A.conj())


def ldl(A, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Non-pivoting symmetric factorization ``A = L diag(d) L^T`` (batched).

    With ``Re(A)`` positive definite every pivot has positive real part; a
    pivot whose real part falls below ``1e-12 * max Re(diag)`` raises
    :class:`NotNormalizable`.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[-1]
    L = np.zeros_like(A)
    d = np.zeros(A.shape[:-1], dtype=complex)
    idx = np.arange(n)
    L[..., idx, idx] = 1.0
    floor = PIVOT_RTOL * np.max(np.abs(np.diagonal(A, axis1=-2, axis2=-1).real), axis=-1)
    for j in range(n):
        dj = A[..., j, j] - np.sum(L[..., j, :j] ** 2 * d[..., :j], axis=-1)
        if check and np.any(dj.real <= floor):
            raise NotNormalizable(f"pivot {j} has real part {np.min(dj.real):.3g}")
        if np.any(dj == 0):
            raise SingularBlock(f"zero pivot at {j}")
        d[..., j] = dj
        if j + 1 < n:
            s = A[..., j + 1 :, j] - np.einsum(
                "...ik,...k->...i", L[..., j + 1 :, :j], L[..., j, :j] * d[..., :j]
            )
            L[..., j + 1 :, j] = s / dj[..., None]
    return L, d


def ldl_solve(L, d, rhs) -> np.ndarray:
    """Solve ``L diag(d) L^T X = rhs`` for ``rhs`` of shape ``batch + (N, K)``."""
    n = L.shape[-1]
    y = np.array(rhs, dtype=complex)
    for i in range(n):
        y[..., i, :] -= np.einsum("...k,...kj->...j", L[..., i, :i], y[..., :i, :])
    y = y / d[..., :, None]
    for i in range(n - 1, -1, -1):
        y[..., i, :] -= np.einsum("...k,...kj->...j", L[..., i + 1 :, i], y[..., i + 1 :, :])
    return y


def log_sqrt_det(d) -> np.ndarray:
    """``log det(A)^{1/2}`` on the branch fixed by principal roots of the pivots."""
    return 0.5 * np.sum(np.log(d), axis=-1)


def _require_positive_real_part(A):
    re = 0.5 * (A.real + np.swapaxes(A.real, -1, -2))
    if re.shape[-1] and np.min(np.linalg.eigvalsh(re)) <= 0:
        raise NotNormalizable("real part of the quadratic form is not positive definite")


def marginalize(term: ComplexGaussianTerm, drop: Sequence[int]) -> ComplexGaussianTerm:
    """Integrate out the variables in ``drop`` exactly (Schur complement)."""
    n = term.dim
    drop = sorted(set(int(i) for i in drop))
    if any(i < 0 or i >= n for i in drop):
        raise DimensionMismatch(f"drop indices {drop} out of range for dimension {n}")
    keep = [i for i in range(n) if i not in drop]
    if not drop:
        return term
    A, b = term.A, term.b
    add = np.ix_(drop, drop)
    A_dd = A[(...,) + add]
    _require_positive_real_part(A_dd)
    L, d = ldl(A_dd)
    A_dk = A[(...,) + np.ix_(drop, keep)]
    b_d = b[..., drop]
    rhs = np.concatenate([A_dk, b_d[..., None]], axis=-1)
    sol = ldl_solve(L, d, rhs)
    X, y = sol[..., :-1], sol[..., -1]
    A_kk = A[(...,) + np.ix_(keep, keep)]
    A_kd = np.swapaxes(A_dk, -1, -2)
    A_new = A_kk - A_kd @ X
    b_new = b[..., keep] - np.einsum("...ij,...j->...i", A_kd, y)
    c_new = (
        term.c
        + 0.5 * np.einsum("...i,...i->...", b_d, y)
        + 0.5 * len(drop) * LOG_2PI
        - log_sqrt_det(d)
    )
    return ComplexGaussianTerm(c_new, b_new, A_new)


def log_integrate_all(term: ComplexGaussianTerm) -> np.ndarray:
    return marginalize(term, range(term.dim)).c


def integrate_all(term: ComplexGaussianTerm) -> np.ndarray | complex:
    """``(2 pi)^{N/2} det(A)^{-1/2} exp(c + 1/2 b.A^{-1}.b)``."""
    out = np.exp(log_integrate_all(term))
    return complex(out) if np.ndim(out) == 0 else out


def moments(term: ComplexGaussianTerm) -> tuple[np.ndarray, np.ndarray]:
    """Mean ``A^{-1} b`` and covariance ``A^{-1}`` of a term's normalized shape."""
    L, d = ldl(term.A)
    n = term.dim
    eye = np.broadcast_to(np.eye(n), term.A.shape)
    cov = ldl_solve(L, d, eye)
    mean = np.einsum("...ij,...j->...i", cov, term.b)
    return mean, cov
