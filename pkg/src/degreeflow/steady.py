"""Stationary generating functions of the evolving-network PDE.

Stationary profiles G*(x) solve the linear first-order ODE

    0 = (x-1)(c1 x - c2) G*'(x) + ((x-1) c3 - c4) G*(x) + c4 x^m

whose coefficient constants derive from the rates and the equilibrium first
moment.  The equation is singular at x = 1 and (when c1 > 0) at xi = c2/c1,
and the structure of its solution set depends on which constants vanish:
constants-only cases, a one-parameter family with closed form, a purely
algebraic solution, a two-singularity integral construction on the segments
[-1, xi) and (xi, 1], and a series-seeded backward integration when x = 1 is
the only singular point in [-1, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import (
    DegenerateSeedError,
    IntegrationError,
    NoSteadyStateError,
    ValidationError,
)
from .model import Degeneracy, ProcessRates, SteadyConstants, steady_constants

__all__ = [
    "SteadyCaseTag",
    "SteadyCase",
    "SteadyState",
    "explicit_constants",
    "classify",
    "construct",
    "steady_from_rates",
    "build_two_singularity",
    "build_series_seeded",
    "residual",
]

_ZTOL = 1e-12  # tie tolerance for vanishing/coinciding constants


class SteadyCaseTag(enum.Enum):
    ALL_ZERO = "all_zero"  # every continuous function is stationary
    CONSTANTS_ONLY = "constants_only"  # exactly the constant functions
    ZERO_ONLY = "zero_only"  # the zero function is the only solution
    FAMILY = "family"  # one-parameter family, closed form
    ALGEBRAIC = "algebraic"  # no derivative term: pointwise formula
    TWO_SINGULARITY = "two_singularity"  # xi = c2/c1 in [0, 1)
    SERIES_SEEDED = "series_seeded"  # x = 1 is the only singular point
    UNIFORM_LIMIT = "uniform_limit"  # g -> 0: all degrees die out, G* = 1


@dataclass(frozen=True)
class SteadyCase:
    tag: SteadyCaseTag
    constants: SteadyConstants
    singular_points: tuple[float, ...]


@dataclass
class SteadyState:
    """Constructed stationary profile with its certification metadata."""

    case: SteadyCase
    value_at_one: float
    slope_at_one: float | None
    value_at_ratio: float | None
    certified: bool
    note: str
    _eval: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._eval(np.atleast_1d(x))
        return float(out[0]) if x.ndim == 0 else out

    def derivative(self, x, step: float = 1e-5):
        """dG*/dx by differencing the profile.

        Central stencil away from singular points; second-order one-sided
        within 2*step of an interior singularity or of x = 1, where some
        constructions cannot be evaluated on the far side.
        """
        x = np.asarray(x, dtype=float)
        xv = np.atleast_1d(x).astype(float)
        out = (self._eval(xv + step) - self._eval(xv - step)) / (2.0 * step)
        guarded = np.abs(xv - 1.0) < 2.0 * step
        for s in self.case.singular_points:
            if abs(s) < 1.0:
                guarded |= np.abs(xv - s) < 2.0 * step
        if np.any(guarded):
            xg = xv[guarded]
            side = np.ones_like(xg)  # +1: forward stencil, -1: backward
            side[xg > 1.0 - 2.0 * step] = -1.0
            for s in self.case.singular_points:
                if abs(s) < 1.0:
                    near = np.abs(xg - s) < 2.0 * step
                    side[near] = np.where(xg[near] >= s, 1.0, -1.0)
            h = side * step
            out[guarded] = (
                -3.0 * self._eval(xg) + 4.0 * self._eval(xg + h) - self._eval(xg + 2.0 * h)
            ) / (2.0 * h)
        return float(out[0]) if x.ndim == 0 else out


def explicit_constants(c1: float, c2: float, c3: float, c4: float, m: int) -> SteadyConstants:
    """Wrap user-supplied stationary-equation constants.

    The implied equilibrium first moment (c3 + c4 m)/(c4 + c2 - c1) is
    attached when that quotient is defined and positive; otherwise g_inf is
    NaN (the constants are still usable for classification/construction).
    """
    for name, v in (("c1", c1), ("c2", c2), ("c3", c3), ("c4", c4)):
        if not math.isfinite(v) or v < 0.0:
            raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise ValidationError(f"m must be a nonnegative integer, got {m!r}")
    denom = c4 + c2 - c1
    g_inf = (c3 + c4 * m) / denom if denom > _ZTOL else math.nan
    if not (g_inf > 0.0):
        g_inf = math.nan
    return SteadyConstants(
        g_inf=g_inf, degeneracy=Degeneracy.REGULAR, c1=c1, c2=c2, c3=c3, c4=c4, m=int(m)
    )


def _unpack(constants: SteadyConstants) -> tuple[float, float, float, float, int]:
    if constants.degeneracy is not Degeneracy.REGULAR or constants.c1 is None:
        raise ValidationError("stationary constants are only defined for a regular first moment")
    return constants.c1, constants.c2, constants.c3, constants.c4, constants.m


def _near_zero(v: float, scale: float = 1.0) -> bool:
    return abs(v) <= _ZTOL * max(1.0, scale)


def classify(constants: SteadyConstants) -> SteadyCase:
    """Assign the stationary equation to its structural case.

    Vanishing and coinciding constants are decided with a 1e-12 tie
    tolerance.  The singular points list the roots of the derivative
    prefactor that fall inside [-1, 1].
    """
    c1, c2, c3, c4, _ = _unpack(constants)
    scale = max(c1, c2, c3, c4)

    def z(v):
        return _near_zero(v, scale)

    sing: tuple[float, ...]
    if z(c1) and z(c2):
        sing = ()
    else:
        sing = (1.0,)
        if not z(c1):
            xi = c2 / c1
            if xi <= 1.0 - _ZTOL:
                sing = (xi, 1.0)
    if z(c1) and z(c2) and z(c3) and z(c4):
        return SteadyCase(SteadyCaseTag.ALL_ZERO, constants, ())
    if z(c3) and z(c4):
        return SteadyCase(SteadyCaseTag.CONSTANTS_ONLY, constants, sing)
    if z(c4):  # c3 > 0
        if z(c1) and z(c2):
            return SteadyCase(SteadyCaseTag.ZERO_ONLY, constants, sing)
        if c1 < c2 - _ZTOL * max(1.0, scale):
            return SteadyCase(SteadyCaseTag.FAMILY, constants, sing)
        return SteadyCase(SteadyCaseTag.ZERO_ONLY, constants, sing)
    # c4 > 0
    if z(c1) and z(c2):
        return SteadyCase(SteadyCaseTag.ALGEBRAIC, constants, sing)
    if not z(c1) and c2 < c1 - _ZTOL * max(1.0, scale):
        return SteadyCase(SteadyCaseTag.TWO_SINGULARITY, constants, sing)
    return SteadyCase(SteadyCaseTag.SERIES_SEEDED, constants, sing)


# -- constructions ----------------------------------------------------------


def _constant_state(case: SteadyCase, value: float, note: str, certified: bool = False) -> SteadyState:
    return SteadyState(
        case=case,
        value_at_one=value,
        slope_at_one=0.0,
        value_at_ratio=None,
        certified=certified,
        note=note,
        _eval=lambda x, v=value: np.full_like(np.asarray(x, dtype=float), v),
    )


def _analytic_a1(c1, c2, c3, c4, m) -> float | None:
    """Slope at x = 1 of the analytic solution branch, None when resonant."""
    d1 = c4 + c2 - c1
    if abs(d1) <= _ZTOL * max(1.0, c1, c2, c4):
        return None
    return (c3 + c4 * m) / d1


def _regular_slope(c1, c2, c3, c4, m):
    """First two derivatives of the analytic solution branch at x = 1.

    Returns (a1, a2) of G* = 1 + a1 (x-1) + a2 (x-1)^2 + ..., or None when
    the defining denominators vanish (resonant indicial roots).
    """
    a1 = _analytic_a1(c1, c2, c3, c4, m)
    d2 = c4 + 2.0 * (c2 - c1)
    if a1 is None or abs(d2) <= _ZTOL * max(1.0, c1, c2, c4):
        return None
    a2 = ((c1 + c3) * a1 + c4 * m * (m - 1) / 2.0) / d2
    return a1, a2


def _kernel_integral(c_m: int, alpha: float, beta: float, xi: float, lo: float, hi: float) -> float:
    """Integral of s^m (1-s)^(-alpha-1) |s - xi|^(-beta-1) over [lo, hi].

    One endpoint may equal xi; the substitution s = xi -/+ u^(-1/beta)
    absorbs the |s - xi| factor exactly, so the transformed integrand is
    bounded.  Both endpoints must stay strictly below 1.
    """
    if hi <= lo:
        return 0.0
    nu = -1.0 / beta

    def smooth(s):
        return s**c_m * (1.0 - s) ** (-alpha - 1.0)

    if math.isclose(lo, xi, rel_tol=0.0, abs_tol=1e-300) or lo == xi:
        # ascending from xi: s = xi + u^nu
        u_hi = (hi - xi) ** (-beta)
        val, _ = quad(lambda u: nu * smooth(xi + u**nu), 0.0, u_hi, epsabs=1e-14, epsrel=1e-12, limit=300)
        return val
    if hi == xi:
        # ascending to xi: s = xi - u^nu
        u_hi = (xi - lo) ** (-beta)
        val, _ = quad(lambda u: nu * smooth(xi - u**nu), 0.0, u_hi, epsabs=1e-14, epsrel=1e-12, limit=300)
        return val
    val, _ = quad(
        lambda s: smooth(s) * abs(s - xi) ** (-beta - 1.0), lo, hi, epsabs=1e-14, epsrel=1e-12, limit=300
    )
    return val


def build_two_singularity(constants: SteadyConstants, anchor: float | None = None) -> SteadyState:
    """Stationary profile when both x = 1 and xi = c2/c1 lie in [-1, 1].

    The solution is an integral against the homogeneous weight
    (1-x)^alpha (x-xi)^beta with alpha = c4/(c1-c2) > 0 and
    beta = -c3/c1 - alpha < 0; its value at xi is fixed by continuity to
    c4 xi^m / (c4 + (1-xi) c3).  ``anchor`` picks the reference point y of
    the right-segment variation-of-constants form; any y in (xi, 1) yields
    the same profile, and passing it explicitly exercises that cancellation.
    By default the right segment is anchored at xi itself.
    """
    c1, c2, c3, c4, m = _unpack(constants)
    scale = max(c1, c2, c3, c4)
    if _near_zero(c1, scale) or c2 > c1 - _ZTOL * max(1.0, scale) or _near_zero(c4, scale):
        raise ValidationError("two-singularity construction requires c4 > 0 and 0 <= c2 < c1")
    xi = c2 / c1
    alpha = c4 / (c1 - c2)
    beta = -c3 / c1 - alpha
    g_xi = c4 * xi**m / (c4 + (1.0 - xi) * c3)
    if anchor is not None and not (xi < anchor < 1.0):
        raise ValidationError(f"anchor must lie in (xi, 1) = ({xi!r}, 1), got {anchor!r}")

    pref = c4 / c1

    def left(x: float) -> float:
        # (-inf, xi): weight anchored at xi through the kernel integral
        val = _kernel_integral(m, alpha, beta, xi, x, xi)
        return pref * (1.0 - x) ** alpha * (xi - x) ** beta * val

    if anchor is None:

        def right(x: float) -> float:
            val = _kernel_integral(m, alpha, beta, xi, xi, x)
            return pref * (1.0 - x) ** alpha * (x - xi) ** beta * val

    else:
        y = float(anchor)
        w_y = (1.0 - y) ** alpha * (y - xi) ** beta
        g_y = pref * w_y * _kernel_integral(m, alpha, beta, xi, xi, y)

        def right(x: float) -> float:
            # variation of constants anchored at y; no reference back to xi
            kern = lambda s: s**m * (1.0 - s) ** (-alpha - 1.0) * (s - xi) ** (-beta - 1.0)
            j, _ = quad(kern, y, x, epsabs=1e-14, epsrel=1e-12, limit=300)
            w_rel = (1.0 - x) ** alpha * (x - xi) ** beta / w_y
            return w_rel * (g_y + pref * w_y * j)

    def evaluate(x: np.ndarray) -> np.ndarray:
        out = np.empty_like(x)
        for i, xv in enumerate(x):
            if abs(xv - 1.0) <= 1e-12:
                out[i] = 1.0
            elif abs(xv - xi) <= 1e-9:
                out[i] = g_xi
            elif xv < xi:
                out[i] = left(float(xv))
            else:
                out[i] = right(float(xv))
        return out

    a1 = _analytic_a1(c1, c2, c3, c4, m)
    # The singular branch (1-x)^alpha dominates the slope unless alpha > 1.
    slope = a1 if a1 is not None and alpha > 1.0 + 1e-12 else None
    case = classify(constants)
    return SteadyState(
        case=case,
        value_at_one=1.0,
        slope_at_one=slope,
        value_at_ratio=g_xi,
        certified=slope is not None and abs(slope) > _ZTOL,
        note=f"two-singularity integral construction, xi = {xi!r}, alpha = {alpha!r}, beta = {beta!r}",
        _eval=evaluate,
    )


def build_series_seeded(constants: SteadyConstants, eps: float = 1e-5, margin: float = 5e-3) -> SteadyState:
    """Stationary profile when x = 1 is the only singular point in [-1, 1].

    Seeds the analytic branch at x = 1 - eps with its quadratic expansion
    and integrates the explicit ODE backward to -1 - margin.  Backward
    integration is stable here: the homogeneous modes decay away from 1.
    """
    c1, c2, c3, c4, m = _unpack(constants)
    scale = max(c1, c2, c3, c4)
    if _near_zero(c4, scale):
        raise ValidationError("series-seeded construction requires c4 > 0")
    if not (_near_zero(c1, scale) or c2 > c1 - _ZTOL * max(1.0, scale)):
        raise ValidationError("series-seeded construction requires c2 >= c1 (or c1 = 0)")
    seed = _regular_slope(c1, c2, c3, c4, m)
    if seed is None:
        raise DegenerateSeedError(
            f"series seed undefined: resonant denominators for constants {constants!r}"
        )
    a1, a2 = seed

    def rhs(x, y):
        num = (c4 - (x - 1.0) * c3) * y[0] - c4 * x**m
        return [num / ((x - 1.0) * (c1 * x - c2))]

    x_seed = 1.0 - eps
    g_seed = 1.0 - a1 * eps + a2 * eps * eps
    sol = solve_ivp(
        rhs,
        (x_seed, -1.0 - margin),
        [g_seed],
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
    )
    if sol.status != 0:
        raise IntegrationError(f"series-seeded integration failed: {sol.message}")
    dense = sol.sol

    def evaluate(x: np.ndarray) -> np.ndarray:
        out = np.empty_like(x)
        near = x >= x_seed
        u = x[near] - 1.0
        out[near] = 1.0 + a1 * u + a2 * u * u
        far = ~near
        if np.any(far):
            out[far] = dense(x[far])[0]
        return out

    case = classify(constants)
    return SteadyState(
        case=case,
        value_at_one=1.0,
        slope_at_one=a1,
        value_at_ratio=None,
        certified=abs(a1) > _ZTOL,
        note=f"series-seeded backward integration from x = 1 - {eps!r}",
        _eval=evaluate,
    )


def construct(constants: SteadyConstants, anchor: float | None = None) -> SteadyState:
    """Build the stationary profile for the classified case.

    Cases without a unique normalized solution return flagged
    representatives: the unit constant for ALL_ZERO / CONSTANTS_ONLY, the
    zero function for ZERO_ONLY.
    """
    case = classify(constants)
    c1, c2, c3, c4, m = _unpack(constants)
    tag = case.tag
    if tag is SteadyCaseTag.ALL_ZERO:
        return _constant_state(case, 1.0, "all constants vanish: every profile is stationary; unit representative")
    if tag is SteadyCaseTag.CONSTANTS_ONLY:
        return _constant_state(case, 1.0, "only constant profiles are stationary; unit representative")
    if tag is SteadyCaseTag.ZERO_ONLY:
        return _constant_state(case, 0.0, "the zero function is the only stationary profile")
    if tag is SteadyCaseTag.FAMILY:
        if c1 > _ZTOL * max(1.0, c2):
            expo = c3 / c1

            def evaluate(x, c1=c1, c2=c2, expo=expo):
                return ((c2 - c1) / (c2 - c1 * x)) ** expo

            slope = c3 / (c2 - c1)
        else:

            def evaluate(x, rate=c3 / c2):
                return np.exp(rate * (x - 1.0))

            slope = c3 / c2
        return SteadyState(
            case=case,
            value_at_one=1.0,
            slope_at_one=slope,
            value_at_ratio=None,
            certified=abs(slope) > _ZTOL,
            note="one-parameter family; unit-normalized representative in closed form",
            _eval=evaluate,
        )
    if tag is SteadyCaseTag.ALGEBRAIC:

        def evaluate(x, c3=c3, c4=c4, m=m):
            return c4 * np.asarray(x, dtype=float) ** m / (c4 - (np.asarray(x, dtype=float) - 1.0) * c3)

        return SteadyState(
            case=case,
            value_at_one=1.0,
            slope_at_one=m + c3 / c4,
            value_at_ratio=None,
            certified=(m + c3 / c4) > _ZTOL,
            note="no derivative term: pointwise algebraic solution",
            _eval=evaluate,
        )
    if tag is SteadyCaseTag.TWO_SINGULARITY:
        return build_two_singularity(constants, anchor=anchor)
    return build_series_seeded(constants)


def steady_from_rates(rates: ProcessRates, anchor: float | None = None) -> SteadyState:
    """Stationary profile implied by the process rates.

    Raises NoSteadyStateError when the first moment diverges; returns the
    unit profile when the first moment decays to zero.
    """
    constants = steady_constants(rates)
    if constants.degeneracy is Degeneracy.DIVERGENT:
        raise NoSteadyStateError(
            "the first moment grows without bound; no stationary distribution exists"
        )
    if constants.degeneracy is Degeneracy.UNIFORM:
        case = SteadyCase(SteadyCaseTag.UNIFORM_LIMIT, constants, ())
        return _constant_state(
            case, 1.0, "first moment decays to zero: all degrees die out, G* = 1", certified=False
        )
    return construct(constants, anchor=anchor)


def residual(state: SteadyState, constants: SteadyConstants, x, h: float = 1e-4):
    """Pointwise defect of the stationary ODE with a central-difference slope.

    The evaluator must be defined on [x - h, x + h]; the constructions all
    extend slightly past -1 so endpoint stencils stay valid.
    """
    c1, c2, c3, c4, m = _unpack(constants)
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x)
    slope = (state(xs + h) - state(xs - h)) / (2.0 * h)
    val = state(xs)
    res = (xs - 1.0) * (c1 * xs - c2) * slope + ((xs - 1.0) * c3 - c4) * val + c4 * xs**m
    return float(res[0]) if x.ndim == 0 else res
