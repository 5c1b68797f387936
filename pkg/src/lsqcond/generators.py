"""Test-problem generators with analytic ground truth.

Covers the parametric 3x2 family (a diagonal matrix with tunable
conditioning, angle, and alignment, after the classic Golub & Van Loan
textbook example), seeded random ensembles with prescribed singular values
and angle, a Lanczos projection demo, column equilibration, and block-norm
instances for the joint-versus-separate condition number inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conditioning import ScaleFactors, residual_condition_bounds
from .core import LsCache, LsProblem, geometry, solve_least_squares
from .errors import (
    DimensionMismatch,
    NonFullRank,
    ParamOutOfRange,
    ZeroColumn,
    ZeroResidual,
    ZeroSolution,
)


@dataclass(frozen=True)
class GvlExpected:
    """Closed-form reference values for the parametric example."""

    x: np.ndarray
    r: np.ndarray
    kappa: float
    vds: float
    cot_theta: float
    chi_A_upper: float
    dr_rel_first_order: float  # predicted ||dr|| / ||r|| for the bundled dA


@dataclass(frozen=True)
class GvlExample:
    """The 3x2 parametric problem with its perturbation and analytic record.

    A = [[1, 0], [0, alpha], [0, 0]], b = (beta cos phi, beta sin phi, 1),
    delta_A puts (-eps, -eps) in the last row. kappa = 1/alpha,
    cot(theta) = beta, and phi steers the alignment ratio between 1 and
    kappa.
    """

    alpha: float
    beta: float
    phi: float
    epsilon: float
    problem: LsProblem
    delta_A: np.ndarray
    expected: GvlExpected


def gvl_example(alpha: float, beta: float, phi: float, epsilon: float = 0.0) -> GvlExample:
    """Construct the parametric example and its analytic expected record.

    Requires 0 < alpha < 1, beta > 0, phi in [0, pi/2], and epsilon = 0 or
    epsilon < 1e-2 * min(alpha, beta) so the perturbation stays well inside
    the first-order regime.
    """
    if not 0.0 < alpha < 1.0:
        raise ParamOutOfRange(f"alpha must be in (0, 1), got {alpha}")
    if not beta > 0.0:
        raise ParamOutOfRange(f"beta must be positive, got {beta}")
    if not 0.0 <= phi <= math.pi / 2.0:
        raise ParamOutOfRange(f"phi must be in [0, pi/2], got {phi}")
    if epsilon < 0.0 or (epsilon > 0.0 and epsilon >= 1e-2 * min(alpha, beta)):
        raise ParamOutOfRange(f"epsilon = {epsilon} not in [0, 1e-2 * min(alpha, beta))")

    A = np.array([[1.0, 0.0], [0.0, alpha], [0.0, 0.0]])
    b = np.array([beta * math.cos(phi), beta * math.sin(phi), 1.0])
    dA = np.array([[0.0, 0.0], [0.0, 0.0], [-epsilon, -epsilon]])

    cos_phi, sin_phi = math.cos(phi), math.sin(phi)
    expected = GvlExpected(
        x=np.array([beta * cos_phi, beta / alpha * sin_phi]),
        r=np.array([0.0, 0.0, 1.0]),
        kappa=1.0 / alpha,
        vds=1.0 / math.hypot(alpha * cos_phi, sin_phi),
        cot_theta=beta,
        chi_A_upper=(1.0 / alpha)
        * math.sqrt(1.0 + (alpha * beta * cos_phi) ** 2 + (beta * sin_phi) ** 2),
        dr_rel_first_order=(1.0 / alpha)
        * math.sqrt(1.0 + alpha**2 + (alpha * beta * cos_phi + beta * sin_phi) ** 2)
        * epsilon,
    )
    return GvlExample(alpha, beta, phi, epsilon, LsProblem(A, b), dA, expected)


@dataclass(frozen=True)
class EnsembleSpec:
    """Recipe for a seeded random problem with prescribed spectrum and angle.

    mix steers the alignment ratio: 0 puts the projection of b along the
    top left singular vector (ratio near kappa), 1 along the bottom one
    (ratio near 1), interpolating spherically in between.
    """

    m: int
    n: int
    singular_values: tuple[float, ...]
    theta: float
    mix: float
    seed: int

    def __post_init__(self):
        if not self.n >= 1 or not self.m >= self.n + 1:
            raise ParamOutOfRange(f"need m >= n + 1 >= 2, got m={self.m}, n={self.n}")
        sv = np.asarray(self.singular_values, dtype=float)
        if sv.shape != (self.n,) or not np.all(sv > 0.0) or not np.isfinite(sv).all():
            raise ParamOutOfRange(f"need {self.n} positive singular values")
        if not 0.0 < self.theta < math.pi / 2.0:
            raise ParamOutOfRange(f"theta must be in (0, pi/2), got {self.theta}")
        if not 0.0 <= self.mix <= 1.0:
            raise ParamOutOfRange(f"mix must be in [0, 1], got {self.mix}")
        object.__setattr__(self, "singular_values", tuple(float(s) for s in sv))


def _haar_orthonormal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    Z = rng.standard_normal((rows, cols))
    Q, R = np.linalg.qr(Z)
    # sign fix makes the factor unique, hence bit-reproducible per seed
    return Q * np.where(np.diag(R) < 0.0, -1.0, 1.0)


def random_problem(spec: EnsembleSpec) -> LsProblem:
    """Build A = U diag(sigma) V^t and b = cos(theta) uhat + sin(theta) what.

    uhat interpolates between the extreme left singular vectors per
    spec.mix; what is a seeded random unit vector orthogonal to col(A).
    The construction reproduces the prescribed singular values to 1e-12
    and the target angle to 1e-10; ||b|| = 1.
    """
    sv = np.sort(np.asarray(spec.singular_values, dtype=float))[::-1]
    rng = np.random.default_rng(spec.seed)
    U = _haar_orthonormal(rng, spec.m, spec.n)
    V = _haar_orthonormal(rng, spec.n, spec.n)
    A = (U * sv) @ V.T

    t = spec.mix * math.pi / 2.0
    uhat = U[:, 0] if spec.n == 1 else math.cos(t) * U[:, 0] + math.sin(t) * U[:, -1]
    for _ in range(64):
        z = rng.standard_normal(spec.m)
        w = z - U @ (U.T @ z)
        nw = np.linalg.norm(w)
        if nw > 1e-8 * np.linalg.norm(z):
            break
    else:  # pragma: no cover - probability zero for m > n
        raise ParamOutOfRange("could not draw a direction orthogonal to col(A)")
    b = math.cos(spec.theta) * uhat + math.sin(spec.theta) * (w / nw)
    return LsProblem(A, b)


def ensemble_specs(
    count: int,
    seed: int,
    max_m: int = 30,
    max_n: int = 10,
    max_kappa_exp: float = 6.0,
    theta_range: tuple[float, float] = (0.05, math.pi / 2.0 - 0.05),
) -> list[EnsembleSpec]:
    """Seeded stream of problem recipes covering sizes, conditioning, and angles.

    Condition numbers range up to 10**max_kappa_exp via geometrically
    spaced singular values.
    """
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(n + 1, max_m + 1))
        if n == 1:
            sv: tuple[float, ...] = (1.0,)
        else:
            sv = tuple(np.geomspace(1.0, 10.0 ** -rng.uniform(0.0, max_kappa_exp), n))
        specs.append(
            EnsembleSpec(
                m=m,
                n=n,
                singular_values=sv,
                theta=float(rng.uniform(*theta_range)),
                mix=float(rng.uniform(0.0, 1.0)),
                seed=int(rng.integers(0, 2**31)),
            )
        )
    return specs


@dataclass(frozen=True)
class LanczosStep:
    """Per-step record of the three-term recurrence viewed as a projection.

    theta is the angle between T v_j and the span of the one or two most
    recent basis vectors; predicted_chi = csc(theta) is the condition
    estimate for an orthonormal basis. krylov_theta is the auxiliary angle
    to the full basis built so far. On breakdown the angles are NaN.
    """

    step: int
    alpha: float
    beta: float
    theta: float
    predicted_chi: float
    orthogonality_defect: float
    krylov_theta: float
    breakdown: bool


def lanczos_demo(
    T: np.ndarray,
    v1: np.ndarray,
    steps: int,
    breakdown_tol: float | None = None,
) -> list[LanczosStep]:
    """Run the symmetric three-term recurrence and rate each step's projection.

    Each step projects b = T v_j onto span{v_{j-1}, v_j} (just {v_1} at the
    first step) and records the angle, its cosecant, and the worst
    pairwise inner product among all basis vectors so far. Iteration stops
    after recording a step whose new off-span component has norm at most
    breakdown_tol (default 1e-12 ||T||_2); breakdown is reported, not
    raised.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {T.shape}")
    norm_T = float(np.linalg.norm(T, 2))
    if norm_T > 0.0 and float(np.linalg.norm(T - T.T, 2)) > 1e-12 * norm_T:
        raise ParamOutOfRange("matrix must be symmetric to 1e-12 relative")
    v = np.asarray(v1, dtype=float).ravel()
    if v.shape != (T.shape[0],):
        raise DimensionMismatch(f"start vector length {v.size} != {T.shape[0]}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ParamOutOfRange("start vector must have unit norm")
    if steps < 1:
        raise ParamOutOfRange("need at least one step")
    tol_b = 1e-12 * norm_T if breakdown_tol is None else breakdown_tol

    basis = [v.copy()]
    v_prev = np.zeros_like(v)
    beta_prev = 0.0
    records: list[LanczosStep] = []
    for j in range(1, steps + 1):
        u = T @ v
        alpha = float(v @ u)
        w = u - alpha * v - beta_prev * v_prev
        beta_next = float(np.linalg.norm(w))
        breakdown = beta_next <= tol_b

        A_local = v[:, None] if j == 1 else np.column_stack([v_prev, v])
        theta = chi = math.nan
        if not breakdown:
            try:
                geom = geometry(solve_least_squares(LsProblem(A_local, u)))
                theta = geom.theta
                chi = 1.0 / math.sin(theta)
            except (NonFullRank, ZeroResidual, ZeroSolution):
                breakdown = True

        W = np.column_stack(basis)
        G = np.abs(W.T @ W - np.eye(W.shape[1]))
        defect = float(G.max()) if W.shape[1] > 1 else 0.0

        Q, _ = np.linalg.qr(W)
        proj = Q @ (Q.T @ u)
        krylov_theta = math.atan2(float(np.linalg.norm(u - proj)), float(np.linalg.norm(proj)))

        records.append(
            LanczosStep(
                step=j,
                alpha=alpha,
                beta=beta_next,
                theta=theta,
                predicted_chi=chi,
                orthogonality_defect=defect,
                krylov_theta=krylov_theta,
                breakdown=breakdown,
            )
        )
        if breakdown:
            break
        v_next = w / beta_next
        basis.append(v_next)
        v_prev, v, beta_prev = v, v_next, beta_next
    return records


def equilibrate_columns(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal entries d with d_j = 1 / ||A e_j||_2 and the scaled matrix A diag(d).

    Every column of the result has unit 2-norm. Raises ZeroColumn when a
    column vanishes.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatch(f"matrix must be 2-D, got shape {A.shape}")
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0.0):
        raise ZeroColumn(f"columns {np.flatnonzero(norms == 0.0).tolist()} are zero")
    d = 1.0 / norms
    return d, A * d


@dataclass(frozen=True)
class EquilibrationResult:
    """Condition numbers before and after column equilibration.

    The direction of the change in chi_A_upper is deliberately unasserted:
    scaling lowers the matrix condition number on badly scaled columns but
    also moves the alignment ratio, so the net effect can go either way.
    """

    d: np.ndarray
    kappa_before: float
    kappa_after: float
    chi_A_upper_before: float
    chi_A_upper_after: float


def equilibration_experiment(problem: LsProblem) -> EquilibrationResult:
    """Solve the problem before and after column equilibration and compare."""
    d, AD = equilibrate_columns(problem.A)
    before = solve_least_squares(problem)
    after = solve_least_squares(LsProblem(AD, problem.b))

    def chi_upper(cache: LsCache) -> float:
        geom = geometry(cache)
        return residual_condition_bounds(cache, geom, ScaleFactors.relative(cache)).chi_A_upper

    return EquilibrationResult(
        d=d,
        kappa_before=before.svd.sigma_max / before.svd.sigma_min,
        kappa_after=after.svd.sigma_max / after.svd.sigma_min,
        chi_A_upper_before=chi_upper(before),
        chi_A_upper_after=chi_upper(after),
    )


@dataclass(frozen=True)
class BlockNormCase:
    """Sampled estimate of the norm of [A B] induced by the max-of-norms
    domain norm, with its components.

    The joint norm always satisfies max(||A||, ||B||) <= ||[A B]|| <=
    ||A|| + ||B||, so the sum overestimates it by at most a factor of 2.
    """

    norm_A: float
    norm_B: float
    norm_joint_est: float

    @property
    def ratios(self) -> dict[str, float]:
        joint = self.norm_joint_est
        if joint == 0.0:
            return {"max_over_joint": 1.0, "sum_over_joint": 1.0}
        return {
            "max_over_joint": max(self.norm_A, self.norm_B) / joint,
            "sum_over_joint": (self.norm_A + self.norm_B) / joint,
        }


def _spectral(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def block_norm_case(A: np.ndarray, B: np.ndarray, samples: int = 500, seed: int = 0) -> BlockNormCase:
    """Estimate max ||A u + B v||_2 over max(||u||, ||v||) = 1.

    By duality the maximum equals max over unit w of ||A^t w|| + ||B^t w||,
    so every codomain direction w yields a feasible (u, v) pair. Candidates
    are the top left singular vectors of A and B plus seeded random pairs;
    the best few are polished by alternating maximization, which is
    monotone in the objective. The constructed candidates guarantee the
    estimate is at least max(||A||, ||B||).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatch(f"row counts {A.shape[0]} and {B.shape[0]} differ")
    norm_A, norm_B = _spectral(A), _spectral(B)

    def pair_from_codomain(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        au, bv = A.T @ w, B.T @ w
        nau, nbv = np.linalg.norm(au), np.linalg.norm(bv)
        return (au / nau if nau > 0.0 else np.zeros(A.shape[1])), (
            bv / nbv if nbv > 0.0 else np.zeros(B.shape[1])
        )

    candidates: list[tuple[np.ndarray, np.ndarray]] = []
    for M in (A, B):
        if _spectral(M) > 0.0:
            w_top = np.linalg.svd(M, full_matrices=False)[0][:, 0]
            candidates.append(pair_from_codomain(w_top))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        u = rng.standard_normal(A.shape[1])
        v = rng.standard_normal(B.shape[1])
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        candidates.append((u / nu if nu > 0 else u, v / nv if nv > 0 else v))

    def objective(u: np.ndarray, v: np.ndarray) -> float:
        return float(np.linalg.norm(A @ u + B @ v))

    scored = sorted(candidates, key=lambda uv: objective(*uv), reverse=True)
    best = objective(*scored[0]) if scored else 0.0
    for u, v in scored[:5]:
        for _ in range(50):
            w = A @ u + B @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            w /= nw
            u, v = pair_from_codomain(w)
        best = max(best, objective(u, v))
    return BlockNormCase(norm_A=norm_A, norm_B=norm_B, norm_joint_est=best)
