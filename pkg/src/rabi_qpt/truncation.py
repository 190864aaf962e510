"""Adaptive Fock cutoff: grow n_max until the susceptibility stops moving."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import ConvergenceError, SolverError
from .model import ModelParams, Truncation
from .susceptibility import (
    SusceptibilityValue,
    chi_resolvent,
    chi_spectral,
    order_of,
    sector_decomposition,
    sector_matrices,
)
from .eigensolve import ground_pair

log = logging.getLogger(__name__)

E0_REL_TOL = 1e-10


@dataclass(frozen=True)
class ConvergencePolicy:
    n_start: int = 64
    growth: float = 1.5
    rel_tol: float = 1e-8
    n_cap: int = 4096

    def __post_init__(self):
        if int(self.n_start) != self.n_start or self.n_start < 8:
            raise ValueError(f"n_start must be an integer >= 8, got {self.n_start!r}")
        if not 1 < self.growth <= 2:
            raise ValueError(f"growth must lie in (1, 2], got {self.growth!r}")
        if not 0 < self.rel_tol <= 1e-6:
            raise ValueError(f"rel_tol must lie in (0, 1e-6], got {self.rel_tol!r}")
        if int(self.n_cap) != self.n_cap or self.n_cap < self.n_start:
            raise ValueError(f"n_cap must be an integer >= n_start, got {self.n_cap!r}")

    def cutoffs(self):
        n = int(self.n_start)
        while True:
            yield n
            if n >= self.n_cap:
                return
            n = min(int(self.n_cap), max(n + 1, math.ceil(self.growth * n)))


@dataclass(frozen=True)
class Iterate:
    n_max: int
    chi: float
    e0: float


@dataclass(frozen=True)
class ConvergedChi:
    value: SusceptibilityValue
    n_used: int
    converged: bool
    trace: tuple[Iterate, ...] = field(default_factory=tuple)

    @property
    def chi(self) -> float:
        return self.value.value


def chi_at(params: ModelParams, trunc: Truncation, r: int = 0, method: str = "spectral-sum"):
    """(SusceptibilityValue, E0) at a fixed cutoff."""
    if method == "spectral-sum":
        decomp, h1 = sector_decomposition(params, trunc)
        return chi_spectral(decomp, h1, r, trunc.n_max), decomp.ground_energy
    if method == "resolvent":
        h, h1 = sector_matrices(params, trunc)
        e0, psi0 = ground_pair(h)
        try:
            return chi_resolvent(h, e0, psi0, h1, r, trunc.n_max), e0
        except SolverError as exc:
            log.warning("resolvent route failed at eta=%g g=%g (%s); using spectral sum",
                        params.eta, params.g, exc)
            return chi_at(params, trunc, r, "spectral-sum")
    raise ValueError(f"unknown method {method!r}")


def converged_chi(params: ModelParams, r: int = 0, policy: ConvergencePolicy | None = None,
                  method: str = "spectral-sum", strict: bool = False) -> ConvergedChi:
    """Evaluate chi_{2r+2} at growing cutoffs until two successive values agree.

    Both chi and E0 must settle (relative change below ``policy.rel_tol`` and
    1e-10). If the cap is hit first the last value comes back flagged
    ``converged=False``; ``strict=True`` raises ConvergenceError instead.
    """
    policy = policy or ConvergencePolicy()
    order_of(r)
    trace = []
    prev = None
    value = None
    for n in policy.cutoffs():
        value, e0 = chi_at(params, Truncation(n), r, method)
        trace.append(Iterate(n, value.value, e0))
        if prev is not None:
            dchi = abs(value.value - prev.chi)
            chi_ok = dchi == 0 or dchi < policy.rel_tol * abs(value.value)
            e0_ok = abs(e0 - prev.e0) < E0_REL_TOL * abs(e0) or e0 == prev.e0
            if chi_ok and e0_ok:
                return ConvergedChi(value, n, True, tuple(trace))
        prev = trace[-1]
    if strict:
        raise ConvergenceError(
            f"chi_{order_of(r)} at eta={params.eta}, g={params.g} not converged by n_max={policy.n_cap}"
        )
    return ConvergedChi(value, trace[-1].n_max, False, tuple(trace))
