"""Euclidean projection onto the probability simplex, column by column."""

from __future__ import annotations

import numpy as np


def project_columns(v: np.ndarray) -> np.ndarray:
    """Project every column of ``v`` onto ``{p >= 0, sum p = 1}``.

    Sort-and-threshold algorithm: for each column find the largest ``k``
    with ``u_k - (sum_{i<=k} u_i - 1) / k > 0`` over the sorted entries ``u``.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    u = -np.sort(-v, axis=0)
    css = np.cumsum(u, axis=0) - 1.0
    ks = np.arange(1, n + 1)[:, None]
    cond = u - css / ks > 0
    rho = n - 1 - np.argmax(cond[::-1], axis=0)
    theta = css[rho, np.arange(v.shape[1])] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project(v: np.ndarray) -> np.ndarray:
    """Projection of a single vector."""
    return project_columns(np.asarray(v, dtype=float)[:, None])[:, 0]
