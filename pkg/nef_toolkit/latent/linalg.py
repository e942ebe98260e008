"""Symmetric eigenproblems for the Gram matrices of the latent experiments."""

import math
import warnings
from typing import Tuple

import numpy as np

from nef_toolkit.errors import DegenerateSpectrum
from nef_toolkit.infrastructure.logging import get_logger


logger = get_logger(__name__)

MAX_DIMENSION = 64
OFF_DIAGONAL_TOL = 1e-12
GAP_TOL = 1e-8


EPS = np.finfo(float).eps


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(matrix: np.ndarray, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps run over every pair p < q until the off-diagonal Frobenius norm
    drops below ``tol`` times the norm of the matrix. Eigenvalues are
    returned in decreasing order, eigenvectors as columns with the entry of
    largest magnitude made positive.
    """
    a = np.array(matrix, dtype=float)
    n, m = a.shape
    if n != m:
        raise ValueError("matrix must be square")
    if n > MAX_DIMENSION:
        raise ValueError(f"Jacobi iteration is limited to n ≤ {MAX_DIMENSION}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(a).max(initial=0.0)))):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    threshold = tol * max(float(np.linalg.norm(a)), np.finfo(float).tiny)

    sweeps = 0
    while _off_norm(a) > threshold:
        if sweeps == max_sweeps:
            logger.warning(f"Jacobi iteration stopped after {max_sweeps} sweeps")
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                # below rounding of the diagonal: a rotation would only overflow θ
                if abs(apq) <= EPS * math.sqrt(abs(a[p, p] * a[q, q])):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
        sweeps += 1

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values, v = values[order], v[:, order]
    signs = np.sign(v[np.argmax(np.abs(v), axis=0), np.arange(n)])
    signs[signs == 0] = 1.0
    logger.debug(f"Jacobi converged in {sweeps} sweeps for n = {n}")
    return values, v * signs


def top_r_subspace(gram: np.ndarray, r: int) -> np.ndarray:
    """Orthonormal n×r basis of the eigenvectors of the r largest eigenvalues."""
    n = np.shape(gram)[0]
    if not 1 <= r <= n:
        raise ValueError(f"rank r = {r} must lie in [1, {n}]")
    values, vectors = jacobi_eigh(gram)
    if r < n and values[r - 1] - values[r] < GAP_TOL:
        message = f"eigen-gap λ_r − λ_(r+1) = {values[r - 1] - values[r]:.3g} at r = {r}"
        logger.warning(message)
        warnings.warn(message, DegenerateSpectrum, stacklevel=2)
    return vectors[:, :r]


def subspace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """‖P_A − P_B‖_F for column-orthonormal bases A and B."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"bases differ in shape: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a @ a.T - b @ b.T))


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans, increasing."""
    cosines = np.linalg.svd(np.asarray(a).T @ np.asarray(b), compute_uv=False)
    return np.sort(np.arccos(np.clip(cosines, -1.0, 1.0)))
