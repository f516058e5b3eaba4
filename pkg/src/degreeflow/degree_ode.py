"""Truncated master equation for the degree distribution.

Integrates the coupled ODE system for p_k(t), 0 <= k <= K_max, that the
generating-function PDE encodes.  This is the package's independent oracle:
it never touches the characteristics solver, so agreement between the two
routes is a genuine two-sided check.  Truncation closes the system with
p_{K_max + 1} = 0; the resulting mass leakage scales with the tail weight at
K_max and is monitored against a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationError, TruncationError, ValidationError
from .model import ProcessRates

__all__ = [
    "TruncatedDistribution",
    "DistributionTrajectory",
    "master_rhs",
    "integrate",
    "gf_eval",
    "first_moment",
]

_NEG_TOL = -1e-10


@dataclass
class TruncatedDistribution:
    """Degree probabilities p_0 .. p_{K_max} at one instant."""

    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        if self.p.ndim != 1 or self.p.size == 0:
            raise ValidationError("p must be a nonempty 1-d array")
        if np.any(~np.isfinite(self.p)):
            raise ValidationError("p must be finite")
        if np.any(self.p < _NEG_TOL):
            raise DomainError(
                f"distribution entry {float(np.min(self.p))!r} is negative beyond {_NEG_TOL}"
            )
        self.p = np.clip(self.p, 0.0, None)

    @property
    def k_max(self) -> int:
        return self.p.size - 1

    @property
    def mass(self) -> float:
        return float(np.sum(self.p))


def _coerce(dist) -> np.ndarray:
    if isinstance(dist, TruncatedDistribution):
        return dist.p
    return np.asarray(dist, dtype=float)


def master_rhs(p, rates: ProcessRates) -> np.ndarray:
    """Time derivative of the truncated degree distribution.

    Builds the three shift operators (degree-biased decrease, uniform
    increase, preferential increase) and combines them with the process
    rates.  Preferential terms divide by the first moment mu; mu = 0 with a
    preferential rate active is a domain error.
    """
    p = _coerce(dist=p)
    k = np.arange(p.size, dtype=float)
    mu = float(k @ p)
    if mu <= 0.0 and (rates.l_p > 0.0 or rates.n_p > 0.0):
        raise DomainError("preferential attachment requires a positive first moment")
    up = np.roll(p, 1)
    up[0] = 0.0  # p_{k-1}, with p_{-1} = 0
    down = np.roll(p, -1)
    down[-1] = 0.0  # p_{k+1}, with p_{K_max+1} = 0
    dec = (k + 1.0) * down - k * p  # a degree-biased end loses one link
    inc_u = up - p  # a uniform node gains one link
    inc_p = (k - 1.0) * up - k * p  # a degree-biased node gains one link
    inv_mu = 1.0 / mu if mu > 0.0 else 0.0
    dp = (
        rates.omega_r * (dec + mu * inc_u)
        + rates.omega_p * (dec + inc_p)
        + rates.l_d * dec
        + 2.0 * rates.l_r * inc_u
        + 2.0 * rates.l_p * inv_mu * inc_p
        + rates.n_d * mu * dec
    )
    if rates.n_r > 0.0 or rates.n_p > 0.0:
        if rates.m >= p.size:
            raise ValidationError(
                f"truncation k_max = {p.size - 1} cannot hold the injection degree m = {rates.m}"
            )
        delta = np.zeros_like(p)
        delta[rates.m] = 1.0
        dp = dp + rates.n_r * (rates.m * inc_u - p + delta)
        dp = dp + rates.n_p * (rates.m * inv_mu * inc_p - p + delta)
    return dp


class DistributionTrajectory:
    """Dense-in-time solution of the truncated master equation."""

    def __init__(self, sol, k_max: int, t_end: float, p0: np.ndarray):
        self._sol = sol
        self.k_max = k_max
        self.t_end = t_end
        self.p0 = p0

    def at(self, t: float) -> TruncatedDistribution:
        if not (0.0 <= t <= self.t_end * (1.0 + 1e-12)):
            raise ValidationError(f"t = {t!r} outside the integrated range [0, {self.t_end!r}]")
        p = self._sol(min(t, self.t_end))
        if np.min(p) < _NEG_TOL:
            raise TruncationError(
                f"negative probability {float(np.min(p))!r} at t = {t!r}; "
                "raise k_max or tighten the tolerance"
            )
        return TruncatedDistribution(np.clip(p, 0.0, None), float(t))

    def mass(self, t: float) -> float:
        return float(np.sum(self._sol(min(t, self.t_end))))

    def first_moment(self, t: float) -> float:
        p = self._sol(min(t, self.t_end))
        return float(np.arange(p.size) @ p)


def integrate(
    p0,
    rates: ProcessRates,
    t_end: float,
    tol: float = 1e-10,
    mass_tol: float = 1e-6,
) -> DistributionTrajectory:
    """Integrate the truncated master equation on [0, t_end].

    ``p0`` fixes the truncation index (k_max = len(p0) - 1, required to be at
    least m + 2).  Mass drift is sampled on a uniform time grid after the
    solve; drift beyond ``mass_tol`` raises TruncationError since it means
    probability reached the truncation boundary.
    """
    p0 = _coerce(p0)
    if np.any(p0 < _NEG_TOL) or abs(float(np.sum(p0)) - 1.0) > 1e-9:
        raise ValidationError("p0 must be a probability vector summing to 1")
    if p0.size < rates.m + 3:
        raise ValidationError(f"k_max must be at least m + 2 = {rates.m + 2}, got {p0.size - 1}")
    if not math.isfinite(t_end) or t_end <= 0.0:
        raise ValidationError(f"t_end must be positive and finite, got {t_end!r}")
    sol = solve_ivp(
        lambda t, p: master_rhs(p, rates),
        (0.0, float(t_end)),
        np.clip(p0, 0.0, None),
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-3,
        dense_output=True,
    )
    if sol.status != 0:
        raise IntegrationError(f"master-equation integration failed: {sol.message}")
    traj = DistributionTrajectory(sol.sol, p0.size - 1, float(t_end), p0.copy())
    probe = np.linspace(0.0, float(t_end), 101)
    masses = np.array([traj.mass(t) for t in probe])
    drift = float(np.max(np.abs(masses - masses[0])))
    if drift > mass_tol:
        raise TruncationError(
            f"mass drift {drift:.3e} exceeds {mass_tol:.1e}; probability is reaching "
            f"the truncation boundary k_max = {p0.size - 1}, raise k_max"
        )
    return traj


def gf_eval(dist, x):
    """Generating function sum_k p_k x^k of a truncated distribution (Horner)."""
    p = _coerce(dist)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for coeff in p[::-1]:
        out = out * x + coeff
    return float(out) if out.ndim == 0 else out


def first_moment(dist) -> float:
    """Mean degree sum_k k p_k."""
    p = _coerce(dist)
    return float(np.arange(p.size) @ p)
