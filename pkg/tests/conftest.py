import numpy as np
import pytest

import lsqcond as lc


@pytest.fixture
def e1_cache():
    """The smallest nontrivial problem: A = [[1], [0]], b = (1, 1).

    Solution x = (1), residual r = (0, 1); kappa = vds = 1, theta = pi/4.
    """
    return lc.solve_least_squares(lc.LsProblem([[1.0], [0.0]], [1.0, 1.0]))


@pytest.fixture
def gvl_cache():
    """The parametric 3x2 instance at alpha=0.5, beta=2, phi=0."""
    return lc.solve_least_squares(lc.gvl_example(0.5, 2.0, 0.0).problem)


def normal_equations_solve(A, b):
    """Independent oracle: solve via the explicitly formed normal equations."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.linalg.solve(A.T @ A, A.T @ b)
    return x, b - A @ x


@pytest.fixture
def oracle_solve():
    return normal_equations_solve


def solved_ensemble(count, seed, **kwargs):
    """Stream of (cache, geometry) pairs over a seeded ensemble."""
    for spec in lc.ensemble_specs(count, seed, **kwargs):
        cache = lc.solve_least_squares(lc.random_problem(spec))
        yield cache, lc.geometry(cache)
