"""Configuration, validation and initial-condition presets.

Every other module consumes a :class:`SimConfig`. The flat ``section.key = value``
text format used by the CLI is read and written here as well.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigParseError, InvalidParameter, ValidationError

FORCE_EVALUATIONS = ("half_step", "end_step")
IC_PRESETS = ("example1", "example2", "file")


@dataclass(frozen=True)
class PhysicalParams:
    rho1: float = 1.0
    rho2: float = 1.0
    k1: float = 10.0
    k2: float = 2.0
    L: float = 1.0


@dataclass(frozen=True)
class FractionalParams:
    alpha: float = 0.5
    eta: float = 1.0
    damping_enabled: bool = True


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform nodes x_j = j*dx, j = -J..J; node 0 sits on the interface."""

    J: int
    L: float

    @property
    def dx(self) -> float:
        return self.L / self.J

    @property
    def node_count(self) -> int:
        return 2 * self.J + 1

    @property
    def x(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1) * self.dx


@dataclass(frozen=True)
class QuadratureGrid:
    """Rectangle rule on (0, R] for the xi-integral of the diffusive representation.

    The weight ``2*dxi`` folds in the evenness of the integrand in xi, so the
    full-line integral is ``sum(w * f(xi))``.
    """

    R: float
    M: int
    alpha: float
    eta: float

    @property
    def dxi(self) -> float:
        return self.R / self.M

    @cached_property
    def xi(self) -> np.ndarray:
        return self.dxi * np.arange(1, self.M + 1, dtype=float)

    @cached_property
    def w(self) -> np.ndarray:
        return np.full(self.M, 2.0 * self.dxi)

    @cached_property
    def mu(self) -> np.ndarray:
        return self.xi ** ((2.0 * self.alpha - 1.0) / 2.0)

    @cached_property
    def d(self) -> np.ndarray:
        return self.xi**2 + self.eta

    @property
    def frak_c(self) -> float:
        return math.sin(self.alpha * math.pi) / math.pi


@dataclass(frozen=True)
class TimeGrid:
    T: float = 1.0
    N: int = 1000
    newmark_beta: float = 0.25
    newmark_gamma: float = 0.5

    @property
    def dt(self) -> float:
        return self.T / self.N


@dataclass(frozen=True)
class SpaceParams:
    J: int = 100


@dataclass(frozen=True)
class QuadParams:
    R: float = 10.0
    M: int = 200


@dataclass(frozen=True)
class InitialCondition:
    preset: str = "example1"
    path: str = ""
    epsilon: float | None = None


@dataclass(frozen=True)
class OutputParams:
    energy_stride: int = 1
    snapshot_stride: int = 100
    dir: str = "out"


@dataclass(frozen=True)
class SimConfig:
    physical: PhysicalParams = field(default_factory=PhysicalParams)
    fractional: FractionalParams = field(default_factory=FractionalParams)
    space: SpaceParams = field(default_factory=SpaceParams)
    quad: QuadParams = field(default_factory=QuadParams)
    time: TimeGrid = field(default_factory=TimeGrid)
    ic: InitialCondition = field(default_factory=InitialCondition)
    output: OutputParams = field(default_factory=OutputParams)
    force_evaluation: str = "half_step"

    @property
    def grid(self) -> SpatialGrid:
        return SpatialGrid(self.space.J, self.physical.L)

    @property
    def quadrature(self) -> QuadratureGrid:
        return QuadratureGrid(self.quad.R, self.quad.M, self.fractional.alpha, self.fractional.eta)


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate(config: SimConfig) -> SimConfig:
    """Return ``config`` unchanged if every invariant holds.

    Raises :class:`ValidationError` listing all violations otherwise.
    """
    bad: list[InvalidParameter] = []

    def check(ok: bool, name: str, value, constraint: str) -> None:
        if not ok:
            bad.append(InvalidParameter(name, value, constraint))

    p = config.physical
    for name in ("rho1", "rho2", "k1", "k2", "L"):
        v = getattr(p, name)
        check(_finite(v) and v > 0, f"physical.{name}", v, f"{name} > 0")

    fr = config.fractional
    check(_finite(fr.alpha) and 0 < fr.alpha < 1, "fractional.alpha", fr.alpha, "0 < α < 1")
    check(_finite(fr.eta) and fr.eta >= 0, "fractional.eta", fr.eta, "η ≥ 0")
    check(isinstance(fr.damping_enabled, bool), "fractional.damping_enabled",
          fr.damping_enabled, "boolean")

    J = config.space.J
    check(isinstance(J, int) and not isinstance(J, bool) and J >= 2, "space.J", J, "J ≥ 2")

    q = config.quad
    check(_finite(q.R) and q.R > 0, "quad.R", q.R, "R > 0")
    check(isinstance(q.M, int) and not isinstance(q.M, bool) and q.M >= 1, "quad.M", q.M, "M ≥ 1")

    t = config.time
    check(_finite(t.T) and t.T > 0, "time.T", t.T, "T > 0")
    check(isinstance(t.N, int) and not isinstance(t.N, bool) and t.N >= 1, "time.N", t.N, "N ≥ 1")
    check(_finite(t.newmark_beta) and 0 <= t.newmark_beta <= 0.5, "time.newmark_beta",
          t.newmark_beta, "0 ≤ β ≤ 1/2")
    check(_finite(t.newmark_gamma) and 0 <= t.newmark_gamma <= 1, "time.newmark_gamma",
          t.newmark_gamma, "0 ≤ γ ≤ 1")

    ic = config.ic
    check(ic.preset in IC_PRESETS, "ic.preset", ic.preset, "one of " + ", ".join(IC_PRESETS))
    check(ic.preset != "file" or bool(ic.path), "ic.path", ic.path, "non-empty when ic.preset = file")
    check(ic.epsilon is None or (_finite(ic.epsilon) and ic.epsilon > 0), "ic.epsilon",
          ic.epsilon, "ε > 0")

    o = config.output
    for name in ("energy_stride", "snapshot_stride"):
        v = getattr(o, name)
        check(isinstance(v, int) and not isinstance(v, bool) and v >= 1, f"output.{name}", v,
              f"{name} ≥ 1")

    check(config.force_evaluation in FORCE_EVALUATIONS, "stepper.force_evaluation",
          config.force_evaluation, "one of half_step, end_step")

    if bad:
        raise ValidationError(bad)
    return config


# -- initial conditions -------------------------------------------------------

def _sech2(z):
    # sech^2 via exp(-|z|): no overflow for large arguments
    e = np.exp(-np.abs(z))
    return (2.0 * e / (1.0 + e * e)) ** 2


def initial_condition_example1(x, x0: float = -0.5, epsilon: float = 0.005):
    """Gaussian wavefront in the left medium, right medium at rest.

    Returns ``(u0, u1, v0, v1)`` evaluated at ``x``.
    """
    x = np.asarray(x, dtype=float)
    u0 = np.exp(-((x - x0) ** 2) / epsilon)
    zero = np.zeros_like(x)
    return u0, zero, zero.copy(), zero.copy()


def initial_condition_example2(x, x0: float = 0.5, epsilon: float = 0.005):
    """Antisymmetric pair of sech^2 bumps centred at -x0 and +x0."""
    x = np.asarray(x, dtype=float)
    u0 = _sech2(-((x + x0) ** 2) / epsilon)
    v0 = -_sech2(-((x - x0) ** 2) / epsilon)
    zero = np.zeros_like(x)
    return u0, zero, v0, zero.copy()


def _glue(x: np.ndarray, left, right) -> np.ndarray:
    # node 0 takes the left trace
    return np.where(x <= 0.0, left, right)


def load_tabulated_ic(path: str | Path, grid: SpatialGrid) -> tuple[np.ndarray, np.ndarray]:
    """Read a CSV with header ``x,w0,w1`` and interpolate it onto the grid nodes."""
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise ConfigParseError(f"cannot read initial-condition file {path}: {exc}") from exc
    missing = {"x", "w0", "w1"} - set(data.dtype.names or ())
    if missing:
        raise ConfigParseError(f"{path}: missing columns {sorted(missing)}")
    order = np.argsort(data["x"])
    xs = data["x"][order]
    x = grid.x
    return np.interp(x, xs, data["w0"][order]), np.interp(x, xs, data["w1"][order])


def initial_fields(config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Nodal displacement and velocity vectors at t = 0."""
    grid = config.grid
    x = grid.x
    ic = config.ic
    if ic.preset == "file":
        U, V = load_tabulated_ic(ic.path, grid)
    else:
        if ic.preset == "example1":
            kw = {} if ic.epsilon is None else {"epsilon": ic.epsilon}
            u0, u1, v0, v1 = initial_condition_example1(x, **kw)
        elif ic.preset == "example2":
            kw = {} if ic.epsilon is None else {"epsilon": ic.epsilon}
            u0, u1, v0, v1 = initial_condition_example2(x, **kw)
        else:
            raise InvalidParameter("ic.preset", ic.preset, "one of " + ", ".join(IC_PRESETS))
        U = _glue(x, u0, v0)
        V = _glue(x, u1, v1)
    return np.ascontiguousarray(U, dtype=float), np.ascontiguousarray(V, dtype=float)


# -- presets -----------------------------------------------------------------

def _reference_physics() -> PhysicalParams:
    return PhysicalParams(rho1=1.0, rho2=1.0, k1=10.0, k2=2.0, L=1.0)


PRESETS: dict[str, SimConfig] = {
    "example1": SimConfig(
        physical=_reference_physics(),
        fractional=FractionalParams(alpha=0.5, eta=1.0),
        space=SpaceParams(J=500),
        quad=QuadParams(R=10.0, M=10000),
        time=TimeGrid(T=1.0, N=500),
        ic=InitialCondition(preset="example1"),
        output=OutputParams(energy_stride=1, snapshot_stride=50),
    ),
    "example1_desk": SimConfig(
        physical=_reference_physics(),
        fractional=FractionalParams(alpha=0.5, eta=1.0),
        space=SpaceParams(J=100),
        quad=QuadParams(R=10.0, M=200),
        time=TimeGrid(T=1.0, N=1000),
        ic=InitialCondition(preset="example1"),
        output=OutputParams(energy_stride=1, snapshot_stride=100),
    ),
    "example2": SimConfig(
        physical=_reference_physics(),
        fractional=FractionalParams(alpha=0.5, eta=0.0),
        space=SpaceParams(J=500),
        quad=QuadParams(R=10.0, M=10000),
        time=TimeGrid(T=1.0e4, N=100000),
        ic=InitialCondition(preset="example2"),
        output=OutputParams(energy_stride=10, snapshot_stride=10000),
    ),
    "example2_desk": SimConfig(
        physical=_reference_physics(),
        fractional=FractionalParams(alpha=0.5, eta=0.0),
        space=SpaceParams(J=100),
        quad=QuadParams(R=10.0, M=500),
        # dt = 0.01; at dt = 0.1 the short waves are under-resolved (c dt / dx ~ 30)
        # and stay almost undamped, which flattens the late-time decay
        time=TimeGrid(T=2000.0, N=200000),
        ic=InitialCondition(preset="example2"),
        output=OutputParams(energy_stride=10, snapshot_stride=20000),
    ),
}


def preset(name: str, **overrides) -> SimConfig:
    """Return a named preset, optionally with flat ``section_key`` overrides.

    >>> preset("example1_desk", fractional_eta=0.0).fractional.eta
    0.0
    """
    try:
        cfg = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    for key, value in overrides.items():
        section, _, attr = key.partition("_")
        cfg = with_value(cfg, section, attr, value)
    return cfg


def with_value(config: SimConfig, section: str, key: str, value) -> SimConfig:
    """Copy of ``config`` with one nested field replaced."""
    if section == "stepper" and key == "force_evaluation":
        return replace(config, force_evaluation=value)
    attr = "physical" if section == "physical" else section
    sub = getattr(config, attr)
    return replace(config, **{attr: replace(sub, **{key: value})})


# -- flat key/value config files ---------------------------------------------

def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_int(s: str) -> int:
    f = float(s)
    if not f.is_integer():
        raise ValueError(f"not an integer: {s!r}")
    return int(f)


def _parse_opt_float(s: str) -> float | None:
    return None if s.strip().lower() in ("", "none") else float(s)


# flat key -> value parser
_KEYS = {
    "physical.rho1": float,
    "physical.rho2": float,
    "physical.k1": float,
    "physical.k2": float,
    "physical.L": float,
    "fractional.alpha": float,
    "fractional.eta": float,
    "fractional.damping_enabled": _parse_bool,
    "space.J": _parse_int,
    "quad.R": float,
    "quad.M": _parse_int,
    "time.T": float,
    "time.N": _parse_int,
    "time.newmark_beta": float,
    "time.newmark_gamma": float,
    "ic.preset": str,
    "ic.path": str,
    "ic.epsilon": _parse_opt_float,
    "output.energy_stride": _parse_int,
    "output.snapshot_stride": _parse_int,
    "output.dir": str,
    "stepper.force_evaluation": str,
}
CONFIG_KEYS = tuple(_KEYS)


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse ``section.key = value`` lines; ``#`` starts a comment.

    Keys not present keep the value from ``base`` (defaults if omitted).
    """
    cfg = base if base is not None else SimConfig()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigParseError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigParseError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            parsed = _KEYS[key](value)
        except ValueError as exc:
            raise ConfigParseError(f"line {lineno}: bad value for {key}: {exc}") from None
        section, attr = key.split(".", 1)
        cfg = with_value(cfg, section, attr, parsed)
    return cfg


def load_config(path: str | Path) -> SimConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config(text)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_config(config: SimConfig) -> str:
    """Inverse of :func:`parse_config`; the output parses back to ``config``."""
    lines = []
    for key in CONFIG_KEYS:
        section, attr = key.split(".", 1)
        if section == "stepper":
            v = config.force_evaluation
        else:
            v = getattr(getattr(config, section), attr)
        lines.append(f"{key} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


def config_as_dict(config: SimConfig) -> dict:
    return dataclasses.asdict(config)
