"""Dense symmetric eigensolver and Gram-matrix routines.

Eigenfaces live in pixel space (D ~ 10^4) but a training set only has M
images, so the D x D covariance ``A A^T`` is never formed. Instead the
M x M Gram matrix ``A^T A`` is diagonalized and its eigenvectors ``x`` are
mapped back through ``A``: if ``A^T A x = lam x`` then
``A A^T (A x) = lam (A x)``.

The eigensolver is a cyclic Jacobi method. A sweep visits every
off-diagonal pair exactly once using round-robin ordering: each round is a set of
``n/2`` disjoint plane rotations, and ``n - 1`` rounds cover every pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import ConvergenceError, LinAlgError

OFFDIAG_TOL = 1e-12
MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-9
DEFAULT_RANK_TOL = 1e-12
# first component above this magnitude decides an eigenvector's sign
_SIGN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class EigenPairs:
    """Eigenvalues sorted descending; ``vectors[:, i]`` pairs with ``values[i]``."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return self.values.size


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise LinAlgError(f"expected a nonempty 2-D matrix, got shape {m.shape}")
    return m


def gram(a) -> np.ndarray:
    """Return ``A^T A``, symmetrized exactly."""
    a = _as_matrix(a)
    g = a.T @ a
    return (g + g.T) / 2.0


def _round_robin(n: int):
    """Pairing schedule for one sweep as two ``(rounds, n_pairs)`` arrays.

    Over ``n - 1`` rounds (``n`` padded to even) every unordered pair
    ``p < q`` appears exactly once. Pairs touching the padding index are
    marked with ``-1``.
    """
    m = n + (n % 2)
    ring = list(range(1, m))
    ps = np.full((m - 1, m // 2), -1, dtype=np.int64)
    qs = np.full((m - 1, m // 2), -1, dtype=np.int64)
    for r in range(m - 1):
        players = [0] + ring
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps[r, i], qs[r, i] = min(a, b), max(a, b)
        ring = ring[-1:] + ring[:-1]
    return ps, qs


def _max_offdiag(a: np.ndarray) -> float:
    if a.shape[0] < 2:
        return 0.0
    off = np.abs(a - np.diag(np.diag(a)))
    return float(off.max())


@numba.njit(cache=True)
def _sweep(a, vt, ps, qs):
    """One cyclic sweep of plane rotations, applied in place.

    ``vt`` accumulates the rotations with eigenvectors stored as rows.
    """
    n = a.shape[0]
    for r in range(ps.shape[0]):
        for k in range(ps.shape[1]):
            p = ps[r, k]
            q = qs[r, k]
            if p < 0:
                continue
            apq = a[p, q]
            if apq == 0.0:
                continue
            app = a[p, p]
            aqq = a[q, q]
            theta = (aqq - app) / (2.0 * apq)
            if abs(theta) > 1e150:
                t = 0.5 / theta
            else:
                sgn = 1.0 if theta >= 0.0 else -1.0
                t = sgn / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            for i in range(n):
                x = a[p, i]
                y = a[q, i]
                a[p, i] = c * x - s * y
                a[q, i] = s * x + c * y
            for i in range(n):
                x = a[i, p]
                y = a[i, q]
                a[i, p] = c * x - s * y
                a[i, q] = s * x + c * y
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            for i in range(n):
                x = vt[p, i]
                y = vt[q, i]
                vt[p, i] = c * x - s * y
                vt[q, i] = s * x + c * y


def _jacobi(s: np.ndarray):
    n = s.shape[0]
    a = s.copy()
    vt = np.eye(n)
    target = OFFDIAG_TOL * np.linalg.norm(s)
    ps, qs = _round_robin(n)
    for _ in range(MAX_SWEEPS):
        if _max_offdiag(a) <= target:
            return np.diag(a).copy(), vt.T
        _sweep(a, vt, ps, qs)
        a = (a + a.T) / 2.0
    if _max_offdiag(a) <= target:
        return np.diag(a).copy(), vt.T
    raise ConvergenceError(f"Jacobi did not converge after {MAX_SWEEPS} sweeps")


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > _SIGN_EPS)
        if nz.size and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def sym_eig(s) -> EigenPairs:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Eigenvalues come back in descending order (stable for ties) and each
    eigenvector's first nonzero component is positive, so the output is a
    deterministic function of the input bits.

    Raises:
        LinAlgError: non-square or asymmetric input.
        ConvergenceError: off-diagonal mass still above tolerance after
            ``MAX_SWEEPS`` sweeps.
    """
    s = _as_matrix(s)
    if s.shape[0] != s.shape[1]:
        raise LinAlgError(f"matrix must be square, got {s.shape}")
    if not np.all(np.isfinite(s)):
        raise LinAlgError("matrix contains non-finite entries")
    scale = max(1.0, float(np.abs(s).max()))
    if np.abs(s - s.T).max() > SYMMETRY_TOL * scale:
        raise LinAlgError("matrix is not symmetric")
    values, vectors = _jacobi(s)
    order = np.argsort(-values, kind="stable")
    return EigenPairs(values[order], _canonical_signs(vectors[:, order]))


def _kept(values: np.ndarray, rank_tol: float) -> np.ndarray:
    if values.size == 0:
        return np.zeros(0, dtype=bool)
    lam_max = values.max()
    if lam_max <= 0:
        return np.zeros(values.size, dtype=bool)
    return values > rank_tol * lam_max


def lift_eigenvectors(a, small: EigenPairs, rank_tol: float = DEFAULT_RANK_TOL) -> EigenPairs:
    """Map eigenpairs of ``gram(a)`` to unit eigenvectors of ``a a^T``.

    Pairs whose eigenvalue is at most ``rank_tol * lam_max`` carry no
    face-space direction and are dropped.
    """
    a = _as_matrix(a)
    if small.vectors.shape[0] != a.shape[1]:
        raise LinAlgError(
            f"eigenvectors of length {small.vectors.shape[0]} do not match "
            f"{a.shape[1]} columns"
        )
    keep = _kept(small.values, rank_tol)
    lifted = a @ small.vectors[:, keep]
    lifted /= np.linalg.norm(lifted, axis=0)
    return EigenPairs(small.values[keep].copy(), lifted)


def thin_svd_via_gram(a, rank_tol: float = DEFAULT_RANK_TOL):
    """Thin SVD ``a ~= U diag(sigma) V^T`` built from ``sym_eig(gram(a))``.

    Returns ``(U, sigma, V)`` restricted to singular values whose square
    exceeds ``rank_tol`` times the largest.
    """
    a = _as_matrix(a)
    pairs = sym_eig(gram(a))
    lam = np.clip(pairs.values, 0.0, None)
    keep = _kept(lam, rank_tol)
    sigma = np.sqrt(lam[keep])
    v = pairs.vectors[:, keep]
    u = (a @ v) / sigma
    return u, sigma, v
