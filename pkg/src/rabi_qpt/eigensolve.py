"""Eigenpairs of real symmetric matrices and deflated resolvent solves.

Two routes are kept on purpose: ``diagonalize_full`` (reference, all pairs)
and ``ground_pair`` + ``deflated_solve`` (only what the resolvent form of
the susceptibility needs). Tests cross-check them against each other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateGroundStateError, SolverError

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending energies and column-aligned orthonormal eigenvectors.

    ``vectors`` may have fewer columns than rows when only one symmetry
    sector was diagonalized; ``parities`` holds each column's sector sign
    when known.
    """

    energies: np.ndarray
    vectors: np.ndarray
    parities: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.vectors[:, 0]


def _check_symmetric(h):
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.array_equal(h, h.T):
        raise ValueError("matrix is not symmetric")
    return h


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude component is positive."""
    v = np.array(vectors, dtype=float, copy=True)
    if v.ndim == 1:
        return v if v[np.argmax(np.abs(v))] >= 0 else -v
    pivots = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    v[:, pivots < 0] *= -1
    return v


def _eigh(h):
    try:
        w, v = scipy.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed on a {h.shape[0]}x{h.shape[0]} matrix: {exc}") from exc
    return w, v


def diagonalize_full(h: np.ndarray, parity: np.ndarray | None = None) -> SpectralDecomposition:
    """All eigenpairs of symmetric ``h``.

    With ``parity`` (a diagonal +-1 matrix commuting with ``h``) each sector
    is diagonalized on its own and the results merged, so eigenvectors stay
    parity-pure even where the two sectors are numerically degenerate.
    """
    h = _check_symmetric(h)
    if parity is None:
        w, v = _eigh(h)
        return SpectralDecomposition(w, fix_signs(v))

    signs = np.rint(np.diag(parity)).astype(int)
    d = h.shape[0]
    energies, vectors, pars = [], [], []
    for sign in (-1, 1):
        idx = np.flatnonzero(signs == sign)
        if idx.size == 0:
            continue
        w, vb = _eigh(h[np.ix_(idx, idx)])
        v = np.zeros((d, idx.size))
        v[idx, :] = vb
        energies.append(w)
        vectors.append(v)
        pars.append(np.full(idx.size, sign))
    w = np.concatenate(energies)
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(
        w[order], fix_signs(np.hstack(vectors)[:, order]), np.concatenate(pars)[order]
    )


def ground_pair(h: np.ndarray) -> tuple[float, np.ndarray]:
    """Lowest eigenpair, computing only the two lowest eigenvalues.

    Raises DegenerateGroundStateError when the gap is below 1e-12.
    """
    h = _check_symmetric(h)
    if h.shape[0] == 1:
        return float(h[0, 0]), np.ones(1)
    try:
        w, v = scipy.linalg.eigh(h, subset_by_index=[0, 1])
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed: {exc}") from exc
    if w[1] - w[0] <= DEGENERACY_TOL:
        raise DegenerateGroundStateError(
            f"ground state gap {w[1] - w[0]:.3e} below {DEGENERACY_TOL:g}"
        )
    return float(w[0]), fix_signs(v[:, 0])


def deflated_solve(h: np.ndarray, e0: float, psi0: np.ndarray, rhs: np.ndarray,
                   tol: float = 1e-9) -> np.ndarray:
    """Solve (H - e0) x = Q rhs with x orthogonal to psi0, Q = 1 - psi0 psi0^T.

    ``rhs`` must already be orthogonal to ``psi0`` (to 1e-10 relative); it is
    projected once more before the solve. The rank-one term psi0 psi0^T is
    added to make the shifted operator invertible without changing the
    solution on the orthogonal complement.
    """
    h = np.asarray(h, dtype=float)
    psi0 = np.asarray(psi0, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    norm = np.linalg.norm(rhs)
    if norm == 0:
        return np.zeros_like(rhs)
    if abs(psi0 @ rhs) > 1e-10 * norm:
        raise ValueError("rhs is not orthogonal to the ground state")
    b = rhs - psi0 * (psi0 @ rhs)
    scale = max(1.0, float(np.max(np.abs(h))))
    m = h - e0 * np.eye(h.shape[0]) + scale * np.outer(psi0, psi0)
    try:
        x = scipy.linalg.solve(m, b, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
        raise SolverError(f"deflated solve failed: {exc}", np.linalg.cond(m)) from exc
    x -= psi0 * (psi0 @ x)
    resid = np.linalg.norm(h @ x - e0 * x - b)
    if resid > tol * norm:
        raise SolverError(
            f"deflated solve residual {resid / norm:.2e} exceeds {tol:g}", np.linalg.cond(m)
        )
    return x
