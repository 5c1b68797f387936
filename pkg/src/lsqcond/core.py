"""Core least squares machinery: problems, factorized caches, geometry, norms.

The SVD-based solve is the reference path; every derived quantity
(projections, pseudoinverse applications, condition geometry) is computed
from the same factorization so that no normal-equations matrix is ever
formed explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFullRank,
    OutOfRange,
    ZeroResidual,
    ZeroSolution,
)


@dataclass(frozen=True)
class Tolerances:
    """Relative numerical tolerances used across the library.

    ``rank_tol`` is measured against sigma_max, ``resid_tol`` against ||b||,
    the rest against the natural scale of the quantity they guard.
    """

    rank_tol: float = 1e-12
    ortho_tol: float = 1e-12
    pythag_tol: float = 1e-12
    svd_tol: float = 1e-12
    resid_tol: float = 1e-14


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class LsProblem:
    """A dense, overdetermined least squares problem min_u ||b - A u||_2.

    Requires m > n >= 1 and finite entries. Full column rank is verified
    when the problem is factorized, not at construction.
    """

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).ravel()
        if A.ndim != 2:
            raise DimensionMismatch(f"matrix must be 2-D, got shape {A.shape}")
        m, n = A.shape
        if not m > n >= 1:
            raise DimensionMismatch(f"need m > n >= 1, got shape {m}x{n}")
        if b.shape != (m,):
            raise DimensionMismatch(f"rhs has length {b.size}, expected {m}")
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("matrix and rhs entries must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class SpectralData:
    """Thin SVD A = U diag(s) V^t with positive, nonincreasing singular values."""

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0])

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1])

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def spectral_data(A: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> SpectralData:
    """Thin SVD of a full-column-rank matrix.

    Raises NonFullRank when sigma_min <= rank_tol * sigma_max.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise DimensionMismatch(f"need m >= n, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError("matrix entries must be finite")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0.0 or s[-1] <= tol.rank_tol * s[0]:
        ratio = s[-1] / s[0] if s[0] > 0.0 else 0.0
        raise NonFullRank(f"sigma_min/sigma_max = {ratio:.3e} within rank tolerance")
    return SpectralData(singular_values=s, left_vectors=U, right_vectors=Vt.T)


@dataclass(frozen=True)
class LsCache:
    """Factorized state of a solved problem, shared by all analyses.

    Immutable after construction and safe for concurrent readers. All
    applier methods go through the stored SVD.
    """

    problem: LsProblem
    x: np.ndarray
    r: np.ndarray
    Ax: np.ndarray
    svd: SpectralData

    @property
    def norm_b(self) -> float:
        return float(np.linalg.norm(self.problem.b))

    @property
    def norm_r(self) -> float:
        return float(np.linalg.norm(self.r))

    @property
    def norm_Ax(self) -> float:
        return float(np.linalg.norm(self.Ax))

    @property
    def norm_x(self) -> float:
        return float(np.linalg.norm(self.x))

    def apply_proj(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of v onto col(A)."""
        U = self.svd.left_vectors
        return U @ (U.T @ np.asarray(v, dtype=float))

    def apply_pinv(self, v: np.ndarray) -> np.ndarray:
        """Pseudoinverse application (A^t A)^{-1} A^t v = V diag(1/s) U^t v."""
        d = self.svd
        return d.right_vectors @ ((d.left_vectors.T @ np.asarray(v, dtype=float)) / d.singular_values)

    def apply_pinv_transpose(self, w: np.ndarray) -> np.ndarray:
        """A (A^t A)^{-1} w = U diag(1/s) V^t w."""
        d = self.svd
        return d.left_vectors @ ((d.right_vectors.T @ np.asarray(w, dtype=float)) / d.singular_values)

    def apply_gram_inverse(self, w: np.ndarray) -> np.ndarray:
        """(A^t A)^{-1} w = V diag(1/s^2) V^t w."""
        d = self.svd
        return d.right_vectors @ ((d.right_vectors.T @ np.asarray(w, dtype=float)) / d.singular_values**2)

    def self_check(self) -> dict[str, float]:
        """Relative defect measures for the solve postconditions.

        Keys: orthogonality (||A^t r|| / (||A|| ||b||)), pythagoras
        (|| ||Ax||^2 + ||r||^2 - ||b||^2 | / ||b||^2), idempotence
        (||P(Pb) - Pb|| / ||b||).
        """
        A, b = self.problem.A, self.problem.b
        nb = self.norm_b
        scale = self.svd.sigma_max * nb
        ortho = float(np.linalg.norm(A.T @ self.r)) / scale if scale > 0.0 else 0.0
        pythag = abs(self.norm_Ax**2 + self.norm_r**2 - nb**2) / nb**2 if nb > 0.0 else 0.0
        pb = self.apply_proj(b)
        idem = float(np.linalg.norm(self.apply_proj(pb) - pb)) / nb if nb > 0.0 else 0.0
        return {"orthogonality": ortho, "pythagoras": pythag, "idempotence": idem}


def solve_least_squares(problem: LsProblem, tol: Tolerances = DEFAULT_TOLERANCES) -> LsCache:
    """Solve the problem via the SVD and cache the factorized state."""
    svd = spectral_data(problem.A, tol)
    x = svd.right_vectors @ ((svd.left_vectors.T @ problem.b) / svd.singular_values)
    Ax = problem.A @ x
    r = problem.b - Ax
    return LsCache(problem=problem, x=x, r=r, Ax=Ax, svd=svd)


@dataclass(frozen=True)
class Geometry:
    """The scalars governing the condition estimates.

    kappa is the spectral matrix condition number, theta the angle between
    b and col(A), vds the van der Sluis ratio ||Ax|| / (||x|| sigma_min)
    which always lies in [1, kappa].
    """

    kappa: float
    theta: float
    cot_theta: float
    vds: float
    sigma_min: float

    def __post_init__(self):
        slack = 1e-9
        if not self.kappa >= 1.0 - slack:
            raise ValueError(f"kappa = {self.kappa} < 1")
        if not 0.0 < self.theta <= math.pi / 2 + slack:
            raise ValueError(f"theta = {self.theta} outside (0, pi/2]")
        if not (1.0 - slack) <= self.vds <= self.kappa * (1.0 + slack):
            raise ValueError(f"vds = {self.vds} outside [1, kappa]")


def geometry(cache: LsCache, tol: Tolerances = DEFAULT_TOLERANCES) -> Geometry:
    """Condition geometry of a solved problem.

    Raises ZeroResidual when ||r|| <= resid_tol ||b|| (condition numbers
    are undefined rather than large) and ZeroSolution when x = 0.
    """
    nr, nx, nax = cache.norm_r, cache.norm_x, cache.norm_Ax
    if nr <= tol.resid_tol * cache.norm_b:
        raise ZeroResidual(f"||r|| = {nr:.3e} within residual tolerance of zero")
    if nx == 0.0:
        raise ZeroSolution("least squares solution is exactly zero")
    smin = cache.svd.sigma_min
    # atan2 is stable near both 0 and pi/2; never arccos of a ratio
    return Geometry(
        kappa=cache.svd.sigma_max / smin,
        theta=math.atan2(nr, nax),
        cot_theta=nax / nr,
        vds=nax / (nx * smin),
        sigma_min=smin,
    )


def nuclear_norm(M: np.ndarray) -> float:
    """Sum of the singular values of M, including multiplicities.

    This is the dual of the spectral norm under the Frobenius pairing.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.isfinite(M).all():
        raise ValueError("matrix entries must be finite")
    return float(np.linalg.svd(M, compute_uv=False).sum())


def projector_difference_norm(
    A: np.ndarray, B: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Spectral norm of P_A - P_B, the orthogonal projectors onto the column spaces.

    Always in [0, 1]; equals the sine of the largest principal angle when
    the subspaces have equal dimension. Raises NonFullRank for either input.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    Qa = spectral_data(A, tol).left_vectors
    Qb = spectral_data(B, tol).left_vectors
    diff = Qa @ Qa.T - Qb @ Qb.T
    return min(float(np.linalg.norm(diff, 2)), 1.0)


def vec_index(i: int, j: int, m: int, n: int | None = None) -> int:
    """Column-stacking index of entry (i, j) of an m-row matrix: j*m + i.

    Indices are zero-based; pass n to also range-check the column index.
    """
    if not 0 <= i < m:
        raise OutOfRange(f"row index {i} outside [0, {m})")
    if j < 0 or (n is not None and j >= n):
        raise OutOfRange(f"column index {j} out of range")
    return j * m + i


def vec_unflatten(k: int, m: int) -> tuple[int, int]:
    """Inverse of vec_index: linear index k of an m-row matrix back to (i, j)."""
    if k < 0 or m <= 0:
        raise OutOfRange(f"linear index {k} or row count {m} out of range")
    return k % m, k // m
