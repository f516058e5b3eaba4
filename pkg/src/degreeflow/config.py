"""INI experiment configuration: parsing, validation, canonical hashing.

One config file drives every CLI subcommand.  All values have defaults
except the process rates, so a minimal file is just a [rates] section.  The
canonical hash covers the fully resolved configuration (after defaults and
command-line overrides), and is echoed into every output file so that a
result can always be traced to the exact inputs that produced it.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .initial import InitialCondition
from .model import ProcessRates

__all__ = ["ExperimentConfig", "parse_config", "default_config"]

_RATE_KEYS = ("omega_r", "omega_p", "l_d", "l_r", "l_p", "n_d", "n_r", "n_p")


@dataclass(frozen=True)
class ExperimentConfig:
    rates: ProcessRates
    initial_kind: str = "polynomial"
    initial_coeffs: tuple[float, ...] = ()
    initial_rho: float = 0.0
    initial_a: float | None = None
    x_min: float = -1.0
    x_max: float = 1.0
    x_points: int = 41
    t_max: float = 1.0
    t_points: int = 11
    solver_tol: float = 1e-8
    oracle_k_max: int = 200
    oracle_tol: float = 1e-10
    oracle_mass_tol: float = 1e-6
    steady_constants: tuple[float, float, float, float, int] | None = None
    steady_anchor: float | None = None
    mc_nodes: int = 2000
    mc_replicas: int = 20
    mc_seed: int = 12345
    mc_graph: str = "regular"
    mc_graph_degree: float = 2.0
    mc_k_max: int = 60
    mc_sample_times: tuple[float, ...] = (0.05, 0.1, 0.2)
    fit_t_min: float = 1.0
    fit_t_max: float | None = None
    fit_norm: str = "sup"
    bend_jump: float = 0.1
    out_dir: str = "out"

    def initial(self) -> InitialCondition:
        """Build (and validate) the initial generating function."""
        kind = self.initial_kind
        if kind == "polynomial":
            if not self.initial_coeffs:
                raise ValidationError("[initial] coeffs required for kind = polynomial")
            return InitialCondition.polynomial(self.initial_coeffs)
        if kind == "geometric":
            return InitialCondition.geometric(self.initial_rho, self.initial_a)
        if kind == "explicit":
            tail = None
            if self.initial_rho > 0.0:
                if self.initial_a is None:
                    raise ValidationError("[initial] a required when a tail rho is given")
                tail = (self.initial_a, self.initial_rho)
            return InitialCondition.explicit(self.initial_coeffs, tail)
        raise ValidationError(f"unknown initial kind {kind!r}")

    def x_grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.x_points)

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.t_points)

    def canonical(self) -> str:
        """Stable text form of the resolved configuration.

        The output directory is excluded: it locates results but does not
        change them, and the hash identifies the experiment itself.
        """
        parts = []
        for name in sorted(self.__dataclass_fields__):
            if name == "out_dir":
                continue
            value = getattr(self, name)
            if isinstance(value, ProcessRates):
                value = tuple(getattr(value, k) for k in (*_RATE_KEYS, "m"))
            parts.append(f"{name}={value!r}")
        return ";".join(parts)

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def override(self, **kwargs) -> "ExperimentConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self


def _get(parser, section, key, conv, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _floats(raw: str) -> tuple[float, ...]:
    items = [s.strip() for s in raw.replace(",", " ").split()]
    return tuple(float(s) for s in items if s)


def default_config(rates: ProcessRates) -> ExperimentConfig:
    return ExperimentConfig(rates=rates)


def parse_config(path: str) -> ExperimentConfig:
    """Read and validate an experiment INI file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from exc
    except configparser.Error as exc:
        raise ValidationError(f"malformed config {path!r}: {exc}") from exc
    if not parser.has_section("rates"):
        raise ValidationError("config needs a [rates] section")

    kwargs = {}
    for key in _RATE_KEYS:
        kwargs[key] = _get(parser, "rates", key, float, 0.0)
    kwargs["m"] = _get(parser, "rates", "m", int, 0)
    rates = ProcessRates(**kwargs)

    cfg = ExperimentConfig(
        rates=rates,
        initial_kind=_get(parser, "initial", "kind", str, "polynomial"),
        initial_coeffs=_get(parser, "initial", "coeffs", _floats, ()),
        initial_rho=_get(parser, "initial", "rho", float, 0.0),
        initial_a=_get(parser, "initial", "a", float, None),
        x_min=_get(parser, "grid", "x_min", float, -1.0),
        x_max=_get(parser, "grid", "x_max", float, 1.0),
        x_points=_get(parser, "grid", "x_points", int, 41),
        t_max=_get(parser, "grid", "t_max", float, 1.0),
        t_points=_get(parser, "grid", "t_points", int, 11),
        solver_tol=_get(parser, "solver", "tol", float, 1e-8),
        oracle_k_max=_get(parser, "oracle", "k_max", int, 200),
        oracle_tol=_get(parser, "oracle", "tol", float, 1e-10),
        oracle_mass_tol=_get(parser, "oracle", "mass_tol", float, 1e-6),
        steady_constants=_get(parser, "steady", "constants", _parse_constants, None),
        steady_anchor=_get(parser, "steady", "anchor", float, None),
        mc_nodes=_get(parser, "mc", "nodes", int, 2000),
        mc_replicas=_get(parser, "mc", "replicas", int, 20),
        mc_seed=_get(parser, "mc", "seed", int, 12345),
        mc_graph=_get(parser, "mc", "graph", str, "regular"),
        mc_graph_degree=_get(parser, "mc", "graph_degree", float, 2.0),
        mc_k_max=_get(parser, "mc", "k_max", int, 60),
        mc_sample_times=_get(parser, "mc", "sample_times", _floats, (0.05, 0.1, 0.2)),
        fit_t_min=_get(parser, "analysis", "fit_t_min", float, 1.0),
        fit_t_max=_get(parser, "analysis", "fit_t_max", float, None),
        fit_norm=_get(parser, "analysis", "norm", str, "sup"),
        bend_jump=_get(parser, "analysis", "bend_jump", float, 0.1),
        out_dir=_get(parser, "output", "dir", str, "out"),
    )
    _validate(cfg)
    return cfg


def _parse_constants(raw: str) -> tuple[float, float, float, float, int]:
    vals = _floats(raw)
    if len(vals) != 5:
        raise ValidationError(f"constants need 5 values c1,c2,c3,c4,m, got {len(vals)}")
    c1, c2, c3, c4, m = vals
    if m != int(m) or m < 0:
        raise ValidationError(f"constants m must be a nonnegative integer, got {m!r}")
    return (c1, c2, c3, c4, int(m))


def _validate(cfg: ExperimentConfig) -> None:
    if not (-1.0 - 1e-12 <= cfg.x_min < cfg.x_max <= 1.0 + 1e-12):
        raise ValidationError(f"[grid] needs -1 <= x_min < x_max <= 1, got [{cfg.x_min}, {cfg.x_max}]")
    if cfg.x_points < 2 or cfg.t_points < 1:
        raise ValidationError("[grid] x_points must be >= 2 and t_points >= 1")
    if cfg.t_max <= 0.0:
        raise ValidationError(f"[grid] t_max must be positive, got {cfg.t_max}")
    if cfg.solver_tol <= 0.0 or cfg.oracle_tol <= 0.0 or cfg.oracle_mass_tol <= 0.0:
        raise ValidationError("tolerances must be positive")
    if cfg.oracle_k_max < cfg.rates.m + 2:
        raise ValidationError(f"[oracle] k_max must be >= m + 2 = {cfg.rates.m + 2}")
    if cfg.fit_norm not in ("sup", "l2"):
        raise ValidationError(f"[analysis] norm must be sup or l2, got {cfg.fit_norm!r}")
    cfg.initial()  # validates the initial condition eagerly
