"""Coupled Newmark / Crank-Nicolson time integration.

Displacement, velocity and acceleration follow the Newmark family, the
diffusive modes follow Crank-Nicolson. The equation of motion is imposed as
the average of its values at t_n and t_{n+1}, with the damping force taken
at the half step. With (beta, gamma) = (1/4, 1/2) this makes

    E^{n+1} - E^n = -dt * C * sum_l w_l d_l |phi_l^{n+1/2}|^2

hold to round-off. Substituting the closed-form mode update leaves one
symmetric tridiagonal system per step whose matrix never changes, so it is
factored once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np
from scipy.linalg import lapack

from .analysis import EnergySeries, energy_raw
from .assembly import SpatialOperators, apply_operator, assemble
from .errors import NonFiniteState, SolveFailure
from .fractional import ModeCoefficients, phi_step, precompute_mode_coefficients, step_dissipation
from .model import QuadratureGrid, SimConfig, TimeGrid, initial_fields

log = logging.getLogger(__name__)


@dataclass
class SimState:
    U: np.ndarray
    V: np.ndarray
    A: np.ndarray
    Phi: np.ndarray
    t: float = 0.0
    n: int = 0
    # running sum of the dissipation increments up to step n
    dissipated: float = 0.0

    def scaled(self, s: float) -> "SimState":
        return replace(self, U=s * self.U, V=s * self.V, A=s * self.A, Phi=s * self.Phi,
                       dissipated=s * s * self.dissipated)


@dataclass
class StepOperator:
    """Factored system matrix M + gamma dt c I + beta dt^2 K and force weights."""

    diag: np.ndarray
    off: np.ndarray
    factor_d: np.ndarray
    factor_e: np.ndarray
    c_eff: float
    g: np.ndarray
    time: TimeGrid
    damping: bool
    quad: QuadratureGrid = field(repr=False)
    _work: np.ndarray | None = field(default=None, repr=False)

    def scratch(self, shape: tuple[int, int]) -> np.ndarray:
        if self._work is None or self._work.shape != shape:
            self._work = np.empty(shape)
        return self._work

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x, info = lapack.dpttrs(self.factor_d, self.factor_e, rhs)
        if info != 0:
            raise SolveFailure(f"tridiagonal solve failed (info={info})")
        return x


def factor_spd_tridiagonal(diag: np.ndarray, off: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """L D L^T factorization; raises SolveFailure unless the matrix is SPD."""
    d, e, info = lapack.dpttrf(diag, off)
    if info != 0:
        raise SolveFailure(f"system matrix is not positive definite (info={info})")
    return d, e


def build_step_operator(ops: SpatialOperators, coeff: ModeCoefficients, quad: QuadratureGrid,
                        time: TimeGrid, *, damping: bool = True,
                        force_evaluation: str = "half_step") -> StepOperator:
    dt = time.dt
    if not damping:
        c_eff = 0.0
        g = np.zeros(quad.M)
    elif force_evaluation == "half_step":
        c_eff = coeff.c_half
        g = quad.frak_c * quad.w * quad.mu * 0.5 * (1.0 + coeff.a)
    elif force_evaluation == "end_step":
        # force from phi^{n+1} = a phi^n + b v_half alone
        c_eff = 2.0 * coeff.c_half
        g = quad.frak_c * quad.w * quad.mu * coeff.a
    else:
        raise ValueError(f"unknown force_evaluation {force_evaluation!r}")
    beta, gamma_ = time.newmark_beta, time.newmark_gamma
    K = ops.stiffness
    diag = ops.mass.diag + gamma_ * dt * c_eff + beta * dt * dt * K.main
    off = beta * dt * dt * K.off
    fd, fe = factor_spd_tridiagonal(diag, off)
    return StepOperator(diag, off, fd, fe, c_eff, g, time, damping, quad)


def newmark_predict(state: SimState, time: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
    dt = time.dt
    U_pred = state.U + dt * state.V + (0.5 - time.newmark_beta) * dt * dt * state.A
    V_pred = state.V + (1.0 - time.newmark_gamma) * dt * state.A
    return U_pred, V_pred


def initial_state(ops: SpatialOperators, M: int, U0: np.ndarray, V0: np.ndarray) -> SimState:
    """Rest modes and the acceleration consistent with M A + K U = 0."""
    U0 = np.array(U0, dtype=float)
    V0 = np.array(V0, dtype=float)
    A0 = -apply_operator(ops.stiffness, U0) / ops.mass.diag
    return SimState(U0, V0, A0, np.zeros((U0.size, M)))


def step(state: SimState, ops: SpatialOperators, coeff: ModeCoefficients,
         sop: StepOperator, phi_out: np.ndarray | None = None) -> SimState:
    """Advance one time step and return the new state.

    The input state is left untouched. ``phi_out`` optionally receives the new
    mode field (it must not be ``state.Phi``).
    """
    time = sop.time
    dt = time.dt
    K = ops.stiffness
    U_pred, V_pred = newmark_predict(state, time)

    rhs = -(ops.mass.diag * state.A) - apply_operator(K, state.U + U_pred)
    if sop.damping:
        rhs -= sop.c_eff * (state.V + V_pred) + 2.0 * (state.Phi @ sop.g)
    X = sop.solve(rhs)

    V = V_pred + time.newmark_gamma * dt * X
    U = U_pred + time.newmark_beta * dt * dt * X
    if sop.damping:
        v_half = 0.5 * (state.V + V)
        work = sop.scratch(state.Phi.shape)
        Phi = phi_step(state.Phi, v_half, coeff, out=phi_out, work=work)
        D = step_dissipation(state.Phi, Phi, sop.quad, dt, work=work)
    else:
        Phi = state.Phi
        D = 0.0

    n = state.n + 1
    if not (np.isfinite(U).all() and np.isfinite(V).all() and np.isfinite(X).all()
            and np.isfinite(D)):
        raise NonFiniteState(n)
    return SimState(U, V, X, Phi, t=n * dt, n=n, dissipated=state.dissipated + D)


Observer = Callable[[int, float, SimState], None]


@dataclass
class RunResult:
    state: SimState
    energy: EnergySeries
    ops: SpatialOperators


def run(config: SimConfig, observers: Iterable[tuple[int, Observer]] = (), *,
        state: SimState | None = None, steps: int | None = None) -> RunResult:
    """Integrate ``config`` for ``time.N`` steps (or ``steps`` if given).

    Energy is recorded every ``output.energy_stride`` steps and at the last
    step. Each ``(stride, callback)`` observer is called as
    ``callback(n, t, state)`` at n = 0, every ``stride`` steps, and at the end.
    Mode-field buffers are recycled between steps, so callbacks that keep
    ``state.Phi`` must copy it.
    """
    ops = assemble(config.physical, config.grid)
    quad = config.quadrature
    time = config.time
    coeff = precompute_mode_coefficients(quad, time.dt)
    sop = build_step_operator(ops, coeff, quad, time, damping=config.fractional.damping_enabled,
                              force_evaluation=config.force_evaluation)
    if state is None:
        U0, V0 = initial_fields(config)
        state = initial_state(ops, quad.M, U0, V0)
    else:
        state = replace(state, Phi=state.Phi.copy())
    n_steps = time.N if steps is None else steps
    observers = list(observers)
    e_stride = config.output.energy_stride

    recorder = EnergySeries.recorder(ops, quad)
    recorder.add(state)
    for _, cb in observers:
        cb(state.n, state.t, state)
    n0 = state.n
    spare = np.empty_like(state.Phi) if sop.damping else None
    for k in range(1, n_steps + 1):
        try:
            prev_phi = state.Phi
            state = step(state, ops, coeff, sop, phi_out=spare)
            if sop.damping:
                spare = prev_phi
        except NonFiniteState:
            log.error("non-finite state at step %d", n0 + k)
            raise
        last = k == n_steps
        if k % e_stride == 0 or last:
            recorder.add(state)
        for stride, cb in observers:
            if k % stride == 0 or last:
                cb(state.n, state.t, state)
    return RunResult(state, recorder.finish(dx=ops.grid.dx), ops)


def total_energy(state: SimState, ops: SpatialOperators, quad: QuadratureGrid) -> float:
    return energy_raw(state.U, state.V, state.Phi, ops, quad)
