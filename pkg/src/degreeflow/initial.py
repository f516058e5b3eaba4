"""Initial degree distributions given through their generating functions.

Supported shapes: finitely supported distributions (polynomial h), scaled
geometric distributions p_k = a rho^-k (radius of convergence rho > 1), and
an explicit head vector with an optional geometric tail.  All evaluators are
closed-form so they stay exact on the whole interval the solver needs.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ValidationError

__all__ = ["InitialCondition"]

_NORM_TOL = 1e-12


class InitialCondition:
    """Probability generating function h(x) of the t = 0 degree distribution.

    Construct through :meth:`polynomial`, :meth:`geometric`,
    :meth:`explicit`, or :meth:`delta`.  Instances are callable (h itself)
    and expose the derivative, the coefficient sequence, and the radius of
    convergence.
    """

    def __init__(self, kind: str, head: np.ndarray, tail: tuple[float, float] | None):
        self.kind = kind
        self.head = np.asarray(head, dtype=float)
        self.tail = tail
        self._scale = 1.0
        if self.head.ndim != 1:
            raise ValidationError("coefficient vector must be a 1-d sequence")
        if self.head.size == 0 and tail is None:
            raise ValidationError("initial condition needs coefficients or a tail")
        if np.any(~np.isfinite(self.head)):
            raise ValidationError("coefficients must be finite")
        if np.any(self.head < -_NORM_TOL) or np.any(self.head > 1.0 + _NORM_TOL):
            raise ValidationError("coefficients must lie in [0, 1]")
        self.head = np.clip(self.head, 0.0, 1.0)
        if tail is not None:
            a, rho = tail
            if not math.isfinite(rho) or not (rho > 1.0):
                raise ValidationError(f"tail ratio rho must exceed 1, got {rho!r}")
            if not (0.0 < a <= 1.0):
                raise ValidationError(f"tail scale a must lie in (0, 1], got {a!r}")
        total = float(self(1.0))
        if abs(total - 1.0) > _NORM_TOL:
            raise ValidationError(f"generating function must satisfy h(1) = 1, got {total!r}")
        # Absorb rounding slack so h(1) = 1 to machine precision.
        self._scale = 1.0 / total

    # -- constructors ------------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs) -> "InitialCondition":
        """Finitely supported distribution: h(x) = sum_k coeffs[k] x^k."""
        return cls("polynomial", np.asarray(coeffs, dtype=float), None)

    @classmethod
    def geometric(cls, rho: float, a: float | None = None) -> "InitialCondition":
        """Scaled geometric distribution p_k = a rho^-k; a defaults to (rho-1)/rho."""
        rho = float(rho)
        if a is None:
            if not (rho > 1.0):
                raise ValidationError(f"rho must exceed 1, got {rho!r}")
            a = (rho - 1.0) / rho
        return cls("geometric", np.array([]), (float(a), rho))

    @classmethod
    def explicit(cls, head, tail: tuple[float, float] | None = None) -> "InitialCondition":
        """Explicit coefficient head, optionally continued by a geometric tail."""
        return cls("explicit", np.asarray(head, dtype=float), tail)

    @classmethod
    def delta(cls, m: int) -> "InitialCondition":
        """Point mass at degree m: h(x) = x^m."""
        if m < 0:
            raise ValidationError(f"degree must be >= 0, got {m}")
        coeffs = np.zeros(m + 1)
        coeffs[m] = 1.0
        return cls.polynomial(coeffs)

    # -- evaluation --------------------------------------------------------

    @property
    def radius(self) -> float:
        """Radius of convergence of the coefficient series."""
        return self.tail[1] if self.tail is not None else math.inf

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = P.polyval(x, self.head) if self.head.size else np.zeros_like(x)
        if self.tail is not None:
            a, rho = self.tail
            k0 = self.head.size
            out = out + a * rho ** (1 - k0) * x**k0 / (rho - x)
        out = out * self._scale
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        """h'(x); h'(1) is the initial mean degree."""
        x = np.asarray(x, dtype=float)
        if self.head.size > 1:
            out = P.polyval(x, P.polyder(self.head))
        else:
            out = np.zeros_like(x)
        if self.tail is not None:
            a, rho = self.tail
            k0 = self.head.size
            if k0 == 0:
                out = out + a * rho / (rho - x) ** 2
            else:
                out = out + a * rho ** (1 - k0) * x ** (k0 - 1) * (k0 * (rho - x) + x) / (rho - x) ** 2
        out = out * self._scale
        return float(out) if out.ndim == 0 else out

    @property
    def mean_degree(self) -> float:
        return float(self.derivative(1.0))

    def coefficients(self, k_max: int) -> np.ndarray:
        """Degree probabilities p_0 .. p_{k_max} (geometric tails extended exactly)."""
        if k_max < 0:
            raise ValidationError(f"k_max must be >= 0, got {k_max}")
        out = np.zeros(k_max + 1)
        n = min(self.head.size, k_max + 1)
        out[:n] = self.head[:n]
        if self.tail is not None and self.head.size <= k_max:
            a, rho = self.tail
            k = np.arange(self.head.size, k_max + 1, dtype=float)
            out[self.head.size :] = a * rho**-k
        return out * self._scale

    def __repr__(self):
        if self.kind == "geometric" and self.tail is not None:
            a, rho = self.tail
            return f"InitialCondition.geometric(rho={rho!r}, a={a!r})"
        return f"InitialCondition({self.kind!r}, head={self.head!r}, tail={self.tail!r})"
