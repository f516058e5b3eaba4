"""Model definitions for randomly evolving networks.

A network evolves under eight elementary processes, each with a nonnegative
rate: link rewiring (uniform ``omega_r`` or degree-preferential ``omega_p``),
link deletion ``l_d``, link addition (uniform ``l_r`` or preferential
``l_p``), node deletion ``n_d`` (degree-biased), and node addition with
``m`` initial links wired to uniform (``n_r``) or preferential (``n_p``)
targets.  The degree distribution's probability generating function
G(x, t) then satisfies a nonlocal first-order PDE whose nonlocality enters
only through the first moment g(t) = G_x(1, t).

This module holds the rate container, the reduction of the PDE's moment
equation to Riccati form, the PDE right-hand side functional H, and the
constants of the stationary equation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

__all__ = [
    "ProcessRates",
    "RiccatiCoefficients",
    "Degeneracy",
    "SteadyConstants",
    "derive_riccati",
    "evaluate_H",
    "steady_constants",
]

_RATE_FIELDS = ("omega_r", "omega_p", "l_d", "l_r", "l_p", "n_d", "n_r", "n_p")


@dataclass(frozen=True)
class ProcessRates:
    """Per-process rates of the network model.

    Parameters
    ----------
    omega_r, omega_p : float
        Uniform and preferential link rewiring rates.
    l_d, l_r, l_p : float
        Link deletion, uniform link addition, preferential link addition.
    n_d, n_r, n_p : float
        Node deletion and node addition (uniform / preferential targets).
    m : int
        Number of links attached to each newly added node.
    """

    omega_r: float = 0.0
    omega_p: float = 0.0
    l_d: float = 0.0
    l_r: float = 0.0
    l_p: float = 0.0
    n_d: float = 0.0
    n_r: float = 0.0
    n_p: float = 0.0
    m: int = 0

    def __post_init__(self):
        for name in _RATE_FIELDS:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValidationError(f"rate {name} must be finite and >= 0, got {value!r}")
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
            raise ValidationError(f"m must be an integer, got {self.m!r}")
        if self.m < 0:
            raise ValidationError(f"m must be >= 0, got {self.m}")

    @property
    def total(self) -> float:
        return sum(getattr(self, name) for name in _RATE_FIELDS)


@dataclass(frozen=True)
class RiccatiCoefficients:
    """Coefficients of the first-moment equation g' = -n_d g^2 - b g + c."""

    n_d: float
    b: float
    c: float


class Degeneracy(enum.Enum):
    """How the long-time first moment behaves."""

    REGULAR = "regular"  # finite positive limit
    UNIFORM = "uniform"  # g -> 0: degrees die out, G* = 1
    DIVERGENT = "divergent"  # g -> infinity: no stationary distribution


@dataclass(frozen=True)
class SteadyConstants:
    """Constants of the stationary generating-function ODE.

    The stationary equation reads
    ``0 = (x-1)(c1 x - c2) G*'(x) + ((x-1) c3 - c4) G*(x) + c4 x^m``
    with all four constants nonnegative.  They are only defined when the
    first moment has a finite positive limit (``degeneracy == REGULAR``);
    otherwise ``c1..c4`` are None and ``g_inf`` is 0 or ``math.inf``.
    """

    g_inf: float
    degeneracy: Degeneracy
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    c4: float | None = None
    m: int = 0


def derive_riccati(rates: ProcessRates) -> RiccatiCoefficients:
    """Map process rates to the closed first-moment equation.

    The mean degree g(t) of the evolving network obeys the scalar Riccati
    equation g' = -n_d g^2 - b g + c with

    ``b = l_d + n_p + n_r``,
    ``c = 2 (l_p + l_r + m (n_p + n_r))``.
    """
    b = rates.l_d + rates.n_p + rates.n_r
    c = 2.0 * (rates.l_p + rates.l_r + rates.m * (rates.n_p + rates.n_r))
    return RiccatiCoefficients(n_d=rates.n_d, b=b, c=c)


def evaluate_H(a, b, c, d, rates: ProcessRates, g):
    """Right-hand side functional of the generating-function PDE.

    Evaluates H(a, b, c, d) where the four slots stand for G_x, G, x and t
    respectively, so that the PDE reads G_t = H(G_x, G, x, t).  ``g`` is the
    first-moment trajectory (a callable of time, positive wherever used).
    Accepts numpy arrays in the first three slots; ``d`` is a scalar time.

    Raises
    ------
    DomainError
        If g(d) is not strictly positive.
    """
    gd = float(g(d))
    if not (gd > 0.0) or not math.isfinite(gd):
        raise DomainError(f"first moment must be positive, got g({d}) = {gd!r}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    adv = rates.omega_p + (2.0 * rates.l_p + rates.n_p * rates.m) / gd
    drift = (c - 1.0) * (c * adv - rates.omega_r - rates.omega_p - rates.l_d - rates.n_d * gd)
    growth = (c - 1.0) * (rates.omega_r * gd + 2.0 * rates.l_r + rates.n_r * rates.m)
    loss = rates.n_r + rates.n_p
    out = drift * a + (growth - loss) * b + loss * c**rates.m
    if out.ndim == 0:
        return float(out)
    return out


def steady_constants(rates: ProcessRates) -> SteadyConstants:
    """Constants of the stationary ODE for the given rates.

    Uses the equilibrium first moment g_inf of the Riccati equation.  When
    g_inf = 0 every degree eventually vanishes (G* = 1, ``UNIFORM``); when
    g_inf diverges there is no stationary distribution (``DIVERGENT``).
    """
    from .riccati import equilibrium  # local import: riccati depends on model

    coeffs = derive_riccati(rates)
    g_inf = equilibrium(coeffs)
    if math.isinf(g_inf):
        return SteadyConstants(g_inf=math.inf, degeneracy=Degeneracy.DIVERGENT, m=rates.m)
    if g_inf == 0.0:
        return SteadyConstants(g_inf=0.0, degeneracy=Degeneracy.UNIFORM, m=rates.m)
    c1 = rates.omega_p + (2.0 * rates.l_p + rates.n_p * rates.m) / g_inf
    c2 = rates.omega_r + rates.omega_p + rates.l_d + rates.n_d * g_inf
    c3 = rates.omega_r * g_inf + 2.0 * rates.l_r + rates.n_r * rates.m
    c4 = rates.n_r + rates.n_p
    # Consistency identity: g_inf * (c4 + c2 - c1) == c3 + c4 * m exactly.
    lhs = g_inf * (c4 + c2 - c1)
    rhs = c3 + c4 * rates.m
    scale = max(1.0, abs(lhs), abs(rhs))
    if abs(lhs - rhs) > 1e-10 * scale:
        raise AssertionError(
            f"steady-constant identity violated: {lhs!r} != {rhs!r} for {rates!r}"
        )
    return SteadyConstants(
        g_inf=g_inf, degeneracy=Degeneracy.REGULAR, c1=c1, c2=c2, c3=c3, c4=c4, m=rates.m
    )
