"""Truncated quantum Rabi Hamiltonian in units of the cavity frequency.

Basis ordering is fixed everywhere: index ``k = 2*n + s`` where ``n`` is the
photon number and ``s = 0`` (spin down, sigma_z = -1) or ``s = 1`` (spin up).

    H(g) = a^dag a + (eta/2) sigma_z - (g sqrt(eta)/2) (a + a^dag) sigma_x
         = H0 + g * H1

The driving operator H1 keeps the sqrt(eta) factor, so it depends on eta.
All matrices are dense, real symmetric and returned read-only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Point in parameter space: frequency ratio eta = Omega/omega0, coupling g.

    Negative g is accepted; it is only meaningful for symmetry checks.
    """

    eta: float
    g: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.eta) or self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta!r}")
        if not np.isfinite(self.g):
            raise ValueError(f"g must be finite, got {self.g!r}")


@dataclass(frozen=True)
class Truncation:
    """Fock cutoff: photon numbers 0..n_max, basis dimension 2*(n_max+1)."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a non-negative integer, got {self.n_max!r}")

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def index(self, n: int, s: int) -> int:
        return 2 * n + s


def _check_eta(eta):
    if not np.isfinite(eta) or eta <= 0:
        raise ValueError(f"eta must be positive, got {eta!r}")


def _frozen(m):
    m.setflags(write=False)
    return m


def build_h0(eta: float, trunc: Truncation) -> np.ndarray:
    """Diagonal bare part a^dag a + (eta/2) sigma_z."""
    _check_eta(eta)
    k = np.arange(trunc.dim)
    n, s = np.divmod(k, 2)
    sz = 2.0 * s - 1.0
    return _frozen(np.diag(n + 0.5 * eta * sz))


def build_h1(eta: float, trunc: Truncation) -> np.ndarray:
    """Driving operator -(sqrt(eta)/2) (a + a^dag) sigma_x.

    Couples (s, n) <-> (1-s, n+1) with element -(sqrt(eta)/2) sqrt(n+1).
    """
    _check_eta(eta)
    d = trunc.dim
    h1 = np.zeros((d, d))
    amp = -0.5 * np.sqrt(eta)
    for n in range(trunc.n_max):
        el = amp * np.sqrt(n + 1.0)
        for s in (0, 1):
            i = 2 * n + s
            j = 2 * (n + 1) + (1 - s)
            h1[i, j] = el
            h1[j, i] = el
    return _frozen(h1)


def build_hamiltonian(params: ModelParams, trunc: Truncation) -> np.ndarray:
    h = build_h0(params.eta, trunc) + params.g * build_h1(params.eta, trunc)
    return _frozen(h)


def parity_operator(trunc: Truncation) -> np.ndarray:
    """Z2 parity sigma_z (-1)^{a^dag a}; |down,0> has parity -1."""
    return _frozen(np.diag(parity_signs(trunc).astype(float)))


def parity_signs(trunc: Truncation) -> np.ndarray:
    k = np.arange(trunc.dim)
    n, s = np.divmod(k, 2)
    return (2 * s - 1) * (1 - 2 * (n % 2))


# The Rabi ground state lives in the sector containing |down, 0> for every g.
GROUND_PARITY = -1


def parity_sector(trunc: Truncation, sign: int = GROUND_PARITY) -> np.ndarray:
    """Basis indices of one parity sector, ascending.

    In the ground sector these are |down,0>, |up,1>, |down,2>, ... and the
    Hamiltonian restricted to them is tridiagonal.
    """
    if sign not in (-1, 1):
        raise ValueError("parity sign must be +1 or -1")
    return np.flatnonzero(parity_signs(trunc) == sign)


def restrict(m: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return m[np.ix_(idx, idx)]
