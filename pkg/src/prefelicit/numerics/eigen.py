"""Smallest-eigenpair extraction for symmetric positive matrices."""
from __future__ import annotations

import numpy as np


def min_eigenpair(h: np.ndarray, sym_tol: float = 1e-8) -> tuple[float, np.ndarray]:
    """Return the smallest eigenvalue and a unit eigenvector of ``h``.

    The matrix must be symmetric within ``sym_tol`` (relative) and must not
    be negative definite in its smallest direction beyond roundoff; both
    conditions raise ValueError because upstream callers only ever build
    positive semidefinite curvature matrices, so a violation signals a bug
    rather than data.

    The eigenvector sign is normalized so its first component of
    meaningful magnitude is positive, making downstream axis labels
    deterministic.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.T)) > sym_tol * scale:
        raise ValueError("matrix must be symmetric")
    values, vectors = np.linalg.eigh((h + h.T) / 2.0)
    lam = float(values[0])
    if lam < -1e-8 * scale:
        raise ValueError("matrix has a significantly negative eigenvalue")
    u = vectors[:, 0]
    for comp in u:
        if abs(comp) > 1e-12:
            if comp < 0:
                u = -u
            break
    return lam, u.copy()
