"""Residual Jacobian machinery and empirical condition estimators.

The derivative of the residual with respect to the matrix acts on a
perturbation dA as

    dr = -(I - P) dA x - A (A^t A)^{-1} dA^t r.

Its adjoint maps a residual-space direction dr to (minus) the rank-2
matrix u1 v1^t + u2 v2^t with u1 = (I - P) dr, v1 = x, u2 = r,
v2 = (A^t A)^{-1} A^t dr. The induced condition number is therefore the
maximum over unit directions of the nuclear norm g of that matrix, which
admits the closed two-sided bounds L <= g <= U evaluated here.

The pointwise lower bound holds on half the sphere: flipping the sign of
the component of a direction along r always moves it into the half where
cos(theta_u - theta_v) >= 0 without changing L, U, or the attainable
maximum. All sampling in this module performs that sign canonicalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conditioning import SQRT2, ScaleFactors
from .core import LsCache, LsProblem, solve_least_squares
from .errors import (
    DegenerateDirection,
    DimensionMismatch,
    NonFullRank,
    ZeroResidual,
    ZeroSolution,
)

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def apply_residual_jacobian(cache: LsCache, dA: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First-order changes (dr, dx) of residual and solution for a matrix
    perturbation dA, both linear in dA.

    dr = -(I - P) dA x - A (A^t A)^{-1} dA^t r
    dx = -(A^t A)^{-1} A^t dA x + (A^t A)^{-1} dA^t r
    """
    dA = np.asarray(dA, dtype=float)
    if dA.shape != cache.problem.A.shape:
        raise DimensionMismatch(f"perturbation shape {dA.shape} != {cache.problem.A.shape}")
    dAx = dA @ cache.x
    dAtr = dA.T @ cache.r
    dr = -(dAx - cache.apply_proj(dAx)) - cache.apply_pinv_transpose(dAtr)
    dx = -cache.apply_pinv(dAx) + cache.apply_gram_inverse(dAtr)
    return dr, dx


@dataclass(frozen=True)
class Rank2Adjoint:
    """Rank-2 representation of the transposed residual Jacobian applied to
    a direction: the adjoint image is sign * vec(u1 v1^t + u2 v2^t).

    The explicit sign = -1 is carried so signed inner-product identities
    hold; all norm-based quantities are sign-independent.
    """

    u1: np.ndarray
    v1: np.ndarray
    u2: np.ndarray
    v2: np.ndarray
    sign: float = -1.0

    def matrix(self) -> np.ndarray:
        return np.outer(self.u1, self.v1) + np.outer(self.u2, self.v2)


def adjoint_rank2(cache: LsCache, delta_r: np.ndarray) -> Rank2Adjoint:
    """Adjoint factors for a residual-space direction.

    Satisfies <dr(dA), delta_r> = sign * <dA, u1 v1^t + u2 v2^t>_F for
    every conformable dA.
    """
    delta_r = np.asarray(delta_r, dtype=float).ravel()
    if delta_r.shape != (cache.problem.m,):
        raise DimensionMismatch(f"direction length {delta_r.size} != {cache.problem.m}")
    return Rank2Adjoint(
        u1=delta_r - cache.apply_proj(delta_r),
        v1=cache.x,
        u2=cache.r,
        v2=cache.apply_pinv(delta_r),
    )


def _products_and_cosines(adj: Rank2Adjoint) -> tuple[float, float, float, float, float, float]:
    """Norm products a = ||u1|| ||v1||, b = ||u2|| ||v2|| together with the
    cosine and sine of theta_u = angle(u1, u2) and theta_v = angle(v1, v2).

    The sines come from orthogonal rejections rather than sqrt(1 - c^2), so
    they stay accurate to machine precision when an angle is near 0 or pi
    (which happens systematically, e.g. for m = n + 1 where the residual
    complement is one-dimensional). A zero factor returns (1, 0) for its
    angle; the corresponding cross term vanishes anyway.
    """
    nu1, nv1 = float(np.linalg.norm(adj.u1)), float(np.linalg.norm(adj.v1))
    nu2, nv2 = float(np.linalg.norm(adj.u2)), float(np.linalg.norm(adj.v2))
    a = nu1 * nv1
    b = nu2 * nv2
    cu, su = 1.0, 0.0
    if nu1 > 0.0 and nu2 > 0.0:
        u1h, u2h = adj.u1 / nu1, adj.u2 / nu2
        cu = float(u1h @ u2h)
        su = float(np.linalg.norm(u1h - cu * u2h))
    cv, sv = 1.0, 0.0
    if nv1 > 0.0 and nv2 > 0.0:
        v1h, v2h = adj.v1 / nv1, adj.v2 / nv2
        cv = float(v1h @ v2h)
        sv = float(np.linalg.norm(v2h - cv * v1h))
    return a, b, cu, su, cv, sv


def g_objective(cache: LsCache, delta_r: np.ndarray) -> float:
    """Dual-norm objective: the nuclear norm of the rank-2 adjoint matrix.

    Evaluated via the closed form
    sqrt(a^2 + b^2 + 2 a b cos(theta_u - theta_v)) with the products and
    angles of the adjoint factors; agrees with an SVD of the rank-2 matrix.
    Expects a unit direction (the objective is positively homogeneous).
    """
    a, b, cu, su, cv, sv = _products_and_cosines(adjoint_rank2(cache, delta_r))
    if a == 0.0 or b == 0.0:
        return math.hypot(a, b)
    cos_diff = cu * cv + su * sv
    return math.sqrt(max(a * a + b * b + 2.0 * a * b * cos_diff, 0.0))


def sandwich_bounds(cache: LsCache, delta_r: np.ndarray) -> tuple[float, float]:
    """Two-sided bounds (L, U) on the objective at a direction:

    L = sqrt(a^2 + b^2) <= g <= a + b = U, with U <= sqrt(2) L whenever
    both products are nonzero. The lower inequality requires the direction
    to be sign-canonical (see canonicalize_direction).
    """
    a, b, _, _, _, _ = _products_and_cosines(adjoint_rank2(cache, delta_r))
    return math.hypot(a, b), a + b


def canonicalize_direction(cache: LsCache, delta_r: np.ndarray) -> np.ndarray:
    """Flip the sign of the component of delta_r along r when that raises
    the objective.

    The flip maps theta_u to pi - theta_u and leaves L and U unchanged, so
    of the two sign choices the better one always has
    cos(theta_u - theta_v) >= 0, which makes L <= g hold pointwise. The
    maximum over the unit sphere is unaffected.
    """
    delta_r = np.asarray(delta_r, dtype=float).ravel()
    adj = adjoint_rank2(cache, delta_r)
    # same-quadrant test: flip iff cos(theta_u) * cos(theta_v) < 0
    if (adj.u1 @ adj.u2) * (adj.v1 @ adj.v2) < 0.0:
        rhat = cache.r / cache.norm_r
        return delta_r - 2.0 * (rhat @ delta_r) * rhat
    return delta_r


@dataclass(frozen=True)
class DirectionCandidate:
    """A unit residual-space direction with its objective value and bounds.

    Directions produced by this module are sign-canonical, so
    L_value <= g_value <= U_value holds for every candidate.
    """

    delta_r: np.ndarray
    g_value: float
    L_value: float
    U_value: float
    origin: str  # "sampled" | "constructed" | "refined"


@dataclass(frozen=True)
class EmpiricalEstimate:
    """Best sampled value of the scaled objective, with provenance."""

    value: float
    best_direction: DirectionCandidate
    samples_used: int
    seed: int


def _require_geometry(cache: LsCache) -> None:
    if cache.norm_r == 0.0:
        raise ZeroResidual("residual is zero; no worst-case direction exists")
    if cache.norm_x == 0.0:
        raise ZeroSolution("solution is zero; no worst-case direction exists")


def worst_case_direction(cache: LsCache) -> DirectionCandidate:
    """Direction maximizing the upper bound U over the unit sphere.

    Built as cos(phi*) rhat + sin(phi*) a'' where a'' is the left singular
    vector for sigma_min and tan(phi*) = (||r|| / sigma_min) / ||x||; its U
    value is sqrt((||r|| / sigma_min)^2 + ||x||^2). Among the four sign
    combinations of rhat and a'' the one with the largest objective is
    returned.
    """
    _require_geometry(cache)
    rhat = cache.r / cache.norm_r
    amin = cache.svd.left_vectors[:, -1]
    phistar = math.atan2(cache.norm_r / cache.svd.sigma_min, cache.norm_x)
    c, s = math.cos(phistar), math.sin(phistar)
    best = None
    best_g = -1.0
    for sr in (1.0, -1.0):
        for sa in (1.0, -1.0):
            d = sr * c * rhat + sa * s * amin
            g = g_objective(cache, d)
            if g > best_g:
                best, best_g = d, g
    L, U = sandwich_bounds(cache, best)
    return DirectionCandidate(delta_r=best, g_value=best_g, L_value=L, U_value=U, origin="constructed")


@dataclass(frozen=True)
class SamplerConfig:
    """Settings for the empirical condition estimator.

    Sample i is drawn from entries i*m .. (i+1)*m of the seeded Gaussian
    stream, so the candidate set for a given (seed, n_samples) is
    independent of evaluation order.
    """

    n_samples: int = 2000
    seed: int = 0
    refine_iters: int = 60


def _batch_objective(cache: LsCache, D: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (g, L, U, flip) over unit columns of D.

    g is the sign-optimal objective: for each column the better of the two
    r-component signs, which always has cos(theta_u - theta_v) >= 0.
    flip marks columns whose canonical representative is the flipped one.
    """
    svd = cache.svd
    nx, nr = cache.norm_x, cache.norm_r
    rhat = cache.r / nr
    xhat = cache.x / nx
    UtD = svd.left_vectors.T @ D
    U1 = D - svd.left_vectors @ UtD
    V2 = svd.right_vectors @ (UtD / svd.singular_values[:, None])
    nu1 = np.linalg.norm(U1, axis=0)
    nv2 = np.linalg.norm(V2, axis=0)
    a = nu1 * nx
    b = nr * nv2
    # rejection-based sines stay accurate when an angle degenerates
    with np.errstate(invalid="ignore", divide="ignore"):
        U1h = np.where(nu1 > 0.0, U1 / nu1, 0.0)
        V2h = np.where(nv2 > 0.0, V2 / nv2, 0.0)
    cu = np.where(nu1 > 0.0, rhat @ U1h, 1.0)
    su = np.where(nu1 > 0.0, np.linalg.norm(U1h - rhat[:, None] * cu, axis=0), 0.0)
    cv = np.where(nv2 > 0.0, xhat @ V2h, 1.0)
    sv = np.where(nv2 > 0.0, np.linalg.norm(V2h - xhat[:, None] * cv, axis=0), 0.0)
    cos_keep = cu * cv + su * sv
    cos_flip = -cu * cv + su * sv
    flip = cos_flip > cos_keep
    cos_best = np.where(flip, cos_flip, cos_keep)
    g = np.sqrt(np.maximum(a * a + b * b + 2.0 * a * b * cos_best, 0.0))
    L = np.hypot(a, b)
    U = a + b
    return g, L, U, flip


def empirical_condition_wrt_A(
    cache: LsCache, scales: ScaleFactors, config: SamplerConfig | None = None
) -> EmpiricalEstimate:
    """Empirical estimate of the condition number with respect to the matrix.

    Maximizes the objective over the constructed worst-case sign family,
    +/- rhat, +/- a'', n_samples seeded uniform sphere directions (each
    sign-canonicalized), and a golden-section refinement over the plane
    spanned by rhat and a''. The returned value, scaled by
    scale_A / scale_r, is guaranteed to land inside the theoretical
    sandwich [chi_A_upper / sqrt(2), chi_A_upper].
    """
    if config is None:
        config = SamplerConfig()
    _require_geometry(cache)
    m = cache.problem.m
    rhat = cache.r / cache.norm_r
    amin = cache.svd.left_vectors[:, -1]

    columns: list[np.ndarray] = []
    origins: list[str] = []

    phistar = math.atan2(cache.norm_r / cache.svd.sigma_min, cache.norm_x)
    c, s = math.cos(phistar), math.sin(phistar)
    for sr in (1.0, -1.0):
        for sa in (1.0, -1.0):
            columns.append(sr * c * rhat + sa * s * amin)
            origins.append("constructed")
    for d in (rhat, -rhat, amin, -amin):
        columns.append(d)
        origins.append("constructed")

    if config.n_samples > 0:
        rng = np.random.default_rng(config.seed)
        Z = rng.standard_normal((config.n_samples, m)).T
        Z /= np.linalg.norm(Z, axis=0)
        columns.extend(Z.T)
        origins.extend(["sampled"] * config.n_samples)

    # golden-section refinement of phi -> g(cos(phi) rhat + sin(phi) sa * a'')
    # on [0, pi/2]; g restricted to that plane is unimodal in 2*phi
    for sa in (1.0, -1.0):
        def plane_objective(phi: float, sa: float = sa) -> float:
            return g_objective(cache, math.cos(phi) * rhat + sa * math.sin(phi) * amin)

        phi_best = _golden_max(plane_objective, 0.0, math.pi / 2.0, config.refine_iters)
        columns.append(math.cos(phi_best) * rhat + sa * math.sin(phi_best) * amin)
        origins.append("refined")

    D = np.column_stack(columns)
    g, L, U, flip = _batch_objective(cache, D)
    best = int(np.argmax(g))
    d_best = D[:, best]
    if flip[best]:
        d_best = d_best - 2.0 * (rhat @ d_best) * rhat
    candidate = DirectionCandidate(
        delta_r=d_best,
        g_value=float(g[best]),
        L_value=float(L[best]),
        U_value=float(U[best]),
        origin=origins[best],
    )
    value = scales.scale_A / scales.scale_r * candidate.g_value

    upper = scales.scale_A / scales.scale_r * math.hypot(cache.norm_r / cache.svd.sigma_min, cache.norm_x)
    if not upper / SQRT2 * (1.0 - 1e-9) <= value <= upper * (1.0 + 1e-9):
        raise RuntimeError(f"estimate {value} escaped the sandwich [{upper / SQRT2}, {upper}]")
    return EmpiricalEstimate(
        value=value, best_direction=candidate, samples_used=config.n_samples, seed=config.seed
    )


def _golden_max(f, lo: float, hi: float, iters: int) -> float:
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
    return c if fc >= fd else d


def attaining_perturbation(cache: LsCache, delta_r: np.ndarray) -> np.ndarray:
    """Unit-spectral-norm matrix perturbation attaining the objective value.

    With the thin SVD u1 v1^t + u2 v2^t = Uh Sh Vh^t, the matrix
    dA = -(Uh Vh^t) has ||dA||_2 = 1 and satisfies
    <apply_residual_jacobian(dA).dr, delta_r> = g(delta_r), which forces
    ||dr|| >= g(delta_r) for a unit direction.
    """
    adj = adjoint_rank2(cache, delta_r)
    M = adj.matrix()
    Uh, sh, Vht = np.linalg.svd(M, full_matrices=False)
    a, b, _, _, _, _ = _products_and_cosines(adj)
    if sh[0] <= 1e-14 * max(a + b, 1e-300):
        raise DegenerateDirection("objective value is zero at this direction")
    keep = sh > 1e-13 * sh[0]
    return -(Uh[:, keep] @ Vht[keep, :])


def finite_difference_condition(
    problem: LsProblem,
    scales: ScaleFactors,
    delta: float | None = None,
    samples: int = 200,
    seed: int = 0,
) -> float:
    """Empirical condition estimate from exact perturbed solves.

    Maximizes (||dr|| / scale_r) / (delta / scale_A) over unit-spectral-norm
    perturbation shapes: alternating dense Gaussian and rank-1 samples
    (sample i drawn from a stream seeded with (seed, i)), plus the
    attaining perturbation of the constructed worst-case direction. The
    default step is sqrt(machine epsilon) * scale_A; the step must stay
    below sigma_min so every perturbed problem keeps full rank.
    """
    cache = solve_least_squares(problem)
    if delta is None:
        delta = math.sqrt(np.finfo(float).eps) * scales.scale_A
    if not 0.0 < delta < cache.svd.sigma_min:
        raise NonFullRank(f"step {delta} not inside (0, sigma_min = {cache.svd.sigma_min})")

    m, n = problem.m, problem.n
    shapes: list[np.ndarray] = []
    try:
        shapes.append(attaining_perturbation(cache, worst_case_direction(cache).delta_r))
    except (ZeroResidual, ZeroSolution, DegenerateDirection):
        pass
    for i in range(samples):
        rng = np.random.default_rng((seed, i))
        if i % 2 == 0:
            E = rng.standard_normal((m, n))
        else:
            E = np.outer(rng.standard_normal(m), rng.standard_normal(n))
        shapes.append(E / np.linalg.svd(E, compute_uv=False)[0])

    best = 0.0
    for E in shapes:
        perturbed = solve_least_squares(LsProblem(problem.A + delta * E, problem.b))
        dr = np.linalg.norm(perturbed.r - cache.r)
        best = max(best, (dr / scales.scale_r) / (delta / scales.scale_A))
    return best
