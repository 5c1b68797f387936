"""Matrix Market and plain-text vector file I/O."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

_MM_SUFFIXES = {".mtx", ".mm"}


def read_matrix(path: str | Path) -> np.ndarray:
    """Dense real matrix from a Matrix Market file (array or coordinate)."""
    M = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(M):
        M = M.toarray()
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{path}: expected a matrix, got shape {M.shape}")
    return M


def read_vector(path: str | Path) -> np.ndarray:
    """Real vector from a Matrix Market array file or plain text.

    Plain text means one decimal value per line, ASCII, '.' radix.
    """
    path = Path(path)
    if path.suffix.lower() in _MM_SUFFIXES:
        M = read_matrix(path)
        if min(M.shape) != 1:
            raise ValueError(f"{path}: expected a vector, got shape {M.shape}")
        return M.ravel()
    v = np.loadtxt(path, dtype=float, ndmin=1)
    if v.ndim != 1:
        raise ValueError(f"{path}: expected one value per line, got shape {v.shape}")
    return v


def write_matrix(path: str | Path, M: np.ndarray, comment: str = "") -> None:
    """Dense real matrix to a Matrix Market array file at full precision."""
    scipy.io.mmwrite(str(path), np.asarray(M, dtype=float), comment=comment, precision=17)


def write_vector(path: str | Path, v: np.ndarray) -> None:
    """Vector to Matrix Market (by suffix) or plain text, one value per line."""
    v = np.asarray(v, dtype=float).ravel()
    path = Path(path)
    if path.suffix.lower() in _MM_SUFFIXES:
        write_matrix(path, v[:, None])
        return
    with open(path, "w", encoding="ascii") as fh:
        for value in v:
            fh.write(format(value, ".17g") + "\n")
