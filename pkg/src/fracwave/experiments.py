"""Reusable numerical experiments shared by the CLI and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gamma, gammainc

from .analysis import (
    DecayFit,
    Snapshot,
    fit_decay_series,
    impedance_reflection,
    reflection_coefficient,
)
from .assembly import assemble
from .fractional import caputo_convolution_series, diffusive_scalar_driver
from .model import (
    FractionalParams,
    InitialCondition,
    PhysicalParams,
    QuadParams,
    QuadratureGrid,
    SimConfig,
    SpaceParams,
    TimeGrid,
    validate,
)
from .stepper import initial_state, run


# -- fractional derivative of f(t) = t -----------------------------------------

def caputo_of_identity(t, alpha: float, eta: float):
    """Closed form of the weighted Caputo derivative of f(t) = t."""
    t = np.asarray(t, dtype=float)
    if eta == 0.0:
        return t ** (1.0 - alpha) / gamma(2.0 - alpha)
    return gammainc(1.0 - alpha, eta * t) / eta ** (1.0 - alpha)


@dataclass(frozen=True)
class CaseResult:
    name: str
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def _rel_err(approx, exact) -> float:
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    scale = np.maximum(np.abs(exact), np.finfo(float).tiny)
    return float(np.max(np.abs(approx - exact) / scale))


def identity_derivative_errors(alpha: float, eta: float, R: float, M: int, *,
                               t_lo: float = 0.5, t_hi: float = 5.0,
                               dt: float = 0.01) -> tuple[float, float]:
    """Max relative errors of (diffusive, oracle) against the closed form on [t_lo, t_hi]."""
    n = int(round(t_hi / dt))
    t = dt * np.arange(n + 1)
    quad = QuadratureGrid(R, M, alpha, eta)
    diffusive = diffusive_scalar_driver(np.ones(n + 1), quad, dt)
    oracle = caputo_convolution_series(t, alpha, eta, dt)
    exact = caputo_of_identity(t, alpha, eta)
    sel = (t >= t_lo - 1e-12) & (t <= t_hi + 1e-12)
    return _rel_err(diffusive[sel], exact[sel]), _rel_err(oracle[sel], exact[sel])


def validate_fractional_battery(R: float = 10.0, M: int = 10000) -> list[CaseResult]:
    results = []
    quad = QuadratureGrid(R, M, 0.5, 1.0)
    dt = 0.01
    const = diffusive_scalar_driver(np.zeros(101), quad, dt)
    oracle_const = caputo_convolution_series(np.full(101, 3.0), 0.5, 1.0, dt)
    results.append(CaseResult("f=const diffusive", float(np.max(np.abs(const))), 0.0))
    results.append(CaseResult("f=const oracle", float(np.max(np.abs(oracle_const))), 0.0))
    for eta, tol in ((1.0, 0.02), (0.0, 0.03)):
        e_diff, e_orc = identity_derivative_errors(0.5, eta, R, M)
        results.append(CaseResult(f"f=t alpha=0.5 eta={eta:g} diffusive R={R:g} M={M}",
                                  e_diff, tol))
        results.append(CaseResult(f"f=t alpha=0.5 eta={eta:g} oracle", e_orc, 1e-4))
    return results


# -- reflection at the interface -----------------------------------------------

@dataclass(frozen=True)
class ReflectionResult:
    measured: float
    expected: float
    incident: Snapshot
    reflected: Snapshot

    @property
    def rel_error(self) -> float:
        if self.expected == 0.0:
            return abs(self.measured)
        return abs(self.measured - self.expected) / abs(self.expected)


def reflection_experiment(k1: float = 10.0, k2: float = 2.0, rho1: float = 1.0,
                          rho2: float = 1.0, J: int = 400, *, x0: float = -0.5,
                          epsilon: float = 0.005, courant: float = 0.5) -> ReflectionResult:
    """Send a right-moving Gaussian into the interface without damping.

    The reflected pulse is measured when it has travelled back to ``x0``.
    """
    phys = PhysicalParams(rho1=rho1, rho2=rho2, k1=k1, k2=k2, L=1.0)
    c1 = math.sqrt(k1 / rho1)
    c_max = max(c1, math.sqrt(k2 / rho2))
    dx = phys.L / J
    t_end = 2.0 * abs(x0) / c1
    N = max(1, math.ceil(t_end / (courant * dx / c_max)))
    cfg = validate(SimConfig(
        physical=phys,
        fractional=FractionalParams(damping_enabled=False),
        space=SpaceParams(J=J),
        quad=QuadParams(R=10.0, M=1),
        time=TimeGrid(T=t_end, N=N),
        ic=InitialCondition(preset="example1", epsilon=epsilon),
    ))
    grid = cfg.grid
    x = grid.x
    g = np.where(x < 0, np.exp(-((x - x0) ** 2) / epsilon), 0.0)
    # u(x, t) = g(x - c1 t)  =>  u_t = -c1 g'(x)
    V0 = c1 * 2.0 * (x - x0) / epsilon * g
    ops = assemble(phys, grid)
    state0 = initial_state(ops, 1, g, V0)
    result = run(cfg, state=state0)
    incident = Snapshot(0.0, x, g)
    reflected = Snapshot(result.state.t, x, result.state.U)
    measured = reflection_coefficient(incident, reflected)
    return ReflectionResult(measured, impedance_reflection(k1, rho1, k2, rho2), incident, reflected)


# -- temporal convergence -------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceResult:
    steps: tuple[int, ...]
    errors: tuple[float, ...]

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(a / b for a, b in zip(self.errors, self.errors[1:]))


def temporal_convergence(J: int = 50, T: float = 0.5, N: int = 200, levels: int = 2,
                         refine: int = 8, epsilon: float = 0.05) -> ConvergenceResult:
    """Final-time displacement errors of the conservative scheme for N, 2N, ...

    The reference solution uses ``refine * N`` steps.
    """
    base = SimConfig(
        fractional=FractionalParams(damping_enabled=False),
        space=SpaceParams(J=J),
        quad=QuadParams(R=10.0, M=1),
        time=TimeGrid(T=T, N=N),
        ic=InitialCondition(preset="example1", epsilon=epsilon),
    )

    def final(n: int) -> np.ndarray:
        cfg = validate(replace(base, time=replace(base.time, N=n)))
        return run(cfg).state.U

    ref = final(refine * N)
    steps = tuple(N * 2**i for i in range(levels))
    errors = tuple(float(np.linalg.norm(final(n) - ref) / np.linalg.norm(ref)) for n in steps)
    return ConvergenceResult(steps, errors)


# -- decay sweeps ---------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    eta: float
    fit: DecayFit | None
    E_end: float
    error: str = ""


def decay_run(config: SimConfig, window=None) -> SweepRow:
    result = run(validate(config))
    series = result.energy
    return SweepRow(config.fractional.eta, fit_decay_series(series, window),
                    float(series.E_raw[-1]))


def eta_sweep(base: SimConfig, etas, window=None) -> list[SweepRow]:
    rows = []
    for eta in dict.fromkeys(float(e) for e in etas):
        cfg = replace(base, fractional=replace(base.fractional, eta=eta))
        rows.append(decay_run(cfg, window))
    return rows
