"""Cyclic Jacobi eigensolver for dense real symmetric matrices.

Rotations are applied in round-robin (tournament) order: each round holds
n/2 disjoint index pairs, so the whole round is one vectorized update and
every pair (p, q) is visited exactly once per sweep.
"""

from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Round-robin schedule of disjoint pairs (p, q), p < q, covering all pairs once."""
    m = n + (n % 2)
    players = list(range(m))
    out = []
    for _ in range(m - 1):
        p = np.array(players[: m // 2])
        q = np.array(players[m // 2:][::-1])
        keep = (p < n) & (q < n)
        p, q = p[keep], q[keep]
        out.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return out


def off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def _rotate_rows(a: np.ndarray, p, q, c, s) -> None:
    rp = a[p]
    rq = a[q]
    a[p] = rp * c - rq * s
    rp *= s
    rq *= c
    rq += rp
    a[q] = rq


def jacobi_eigh(a, tol: float | None = None, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix.

    Returns ``(values, vectors)`` with values ascending and eigenvectors in
    the columns of ``vectors``. Stops once the off-diagonal Frobenius norm
    falls below ``tol`` (default ``1e-14 * n``); raises ConvergenceError
    after ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-13, rtol=0):
        raise ValueError("matrix must be symmetric")
    if tol is None:
        tol = 1e-14 * n
    if n < 2:
        return np.diag(a).copy(), np.eye(n)

    # entries below `skip` are left alone; n * skip keeps the off-norm under tol
    skip = tol / (10.0 * n)
    a = 0.5 * (a + a.T)
    vt = np.eye(n)              # eigenvectors stored as rows
    rounds = _rounds(n)
    for _sweep in range(max_sweeps):
        if off_norm(a) < tol:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > skip
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = a[p, p], a[q, q]
            with np.errstate(over="ignore"):
                theta = (aqq - app) / (2.0 * apq)
                t = np.sign(theta) / (np.abs(theta) + np.hypot(1.0, theta))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            c, s = c[:, None], s[:, None]
            # J^T A J == J^T (J^T A)^T for symmetric A: two row passes
            _rotate_rows(a, p, q, c, s)
            a = np.ascontiguousarray(a.T)
            _rotate_rows(a, p, q, c, s)
            a[p, q] = 0.0
            a[q, p] = 0.0
            _rotate_rows(vt, p, q, c, s)
    else:
        res = off_norm(a)
        if res >= tol:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {res:.3e})", res)

    w = np.diag(a).copy()
    idx = np.argsort(w, kind="stable")
    return w[idx], vt[idx].T
