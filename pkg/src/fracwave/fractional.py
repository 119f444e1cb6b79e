"""Diffusive realization of the exponentially weighted Caputo derivative.

The derivative of order alpha with weight exp(-eta t) is written as

    C * integral over xi of mu(xi) phi(t, xi),

where every mode phi(., xi) solves phi' + (xi^2 + eta) phi = mu(xi) f'(t),
phi(0) = 0, mu(xi) = |xi|^((2 alpha - 1)/2) and C = sin(alpha pi)/pi.
Modes are advanced with Crank-Nicolson and the xi-integral is the rectangle
rule held by :class:`~fracwave.model.QuadratureGrid`.

:func:`caputo_convolution_oracle` evaluates the same derivative directly
from its convolution definition and shares no code with the diffusive path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, roots_jacobi, roots_legendre

from .errors import InsufficientHistory, ShapeMismatch
from .model import QuadratureGrid


@dataclass(frozen=True)
class ModeCoefficients:
    """Closed-form Crank-Nicolson factors, phi_new = a*phi + b*v_half.

    ``c_half`` is the coefficient of v_half in the half-step damping force
    once the mode update is substituted into it.
    """

    a: np.ndarray
    b: np.ndarray
    c_half: float
    dt: float


def precompute_mode_coefficients(quad: QuadratureGrid, dt: float) -> ModeCoefficients:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    dd = dt * quad.d
    a = (2.0 - dd) / (2.0 + dd)
    b = 2.0 * dt * quad.mu / (2.0 + dd)
    c_half = 0.5 * quad.frak_c * math.fsum(quad.w * quad.mu * b)
    return ModeCoefficients(a, b, c_half, dt)


def _check_field(phi: np.ndarray, M: int) -> None:
    if phi.ndim != 2 or phi.shape[1] != M:
        raise ShapeMismatch(f"mode field of shape {phi.shape}, expected (nodes, {M})")


def phi_step(phi: np.ndarray, v_half: np.ndarray, coeff: ModeCoefficients,
             out: np.ndarray | None = None, work: np.ndarray | None = None) -> np.ndarray:
    """Advance every (node, mode) pair one Crank-Nicolson step.

    ``out`` and ``work`` are optional preallocated arrays shaped like ``phi``;
    ``out`` must not alias ``phi``.
    """
    _check_field(phi, coeff.a.size)
    v_half = np.asarray(v_half, dtype=float)
    if v_half.shape != (phi.shape[0],):
        raise ShapeMismatch(f"velocity of shape {v_half.shape} for {phi.shape[0]} nodes")
    out = np.multiply(phi, coeff.a, out=out)
    out += np.multiply.outer(v_half, coeff.b, out=work)
    return out


def damping_force(phi_a: np.ndarray, phi_b: np.ndarray, quad: QuadratureGrid) -> np.ndarray:
    """Quadrature of C * int mu phi dxi at the average of two time levels.

    Pass the same field twice for the force at a single level.
    """
    _check_field(phi_a, quad.M)
    if phi_b.shape != phi_a.shape:
        raise ShapeMismatch(f"mode fields of shapes {phi_a.shape} and {phi_b.shape}")
    weights = quad.frak_c * quad.w * quad.mu
    if phi_a is phi_b:
        return phi_a @ weights
    return (0.5 * (phi_a + phi_b)) @ weights


def mode_energy(phi: np.ndarray, quad: QuadratureGrid) -> float:
    """(C/2) * sum_l w_l |phi_l|^2 with the Euclidean norm over nodes."""
    return 0.5 * quad.frak_c * float(np.einsum("jl,jl->l", phi, phi) @ quad.w)


def mode_dissipation(phi_half: np.ndarray, quad: QuadratureGrid, dt: float) -> float:
    """dt * C * sum_l w_l d_l |phi_l|^2, the energy removed over one step."""
    return dt * quad.frak_c * float(np.einsum("jl,jl->l", phi_half, phi_half) @ (quad.w * quad.d))


def step_dissipation(phi_old: np.ndarray, phi_new: np.ndarray, quad: QuadratureGrid, dt: float,
                     work: np.ndarray | None = None) -> float:
    """:func:`mode_dissipation` at the midpoint of two levels."""
    s = np.add(phi_old, phi_new, out=work)
    return 0.25 * mode_dissipation(s, quad, dt)


def diffusive_scalar_driver(f_dot: np.ndarray, quad: QuadratureGrid, dt: float) -> np.ndarray:
    """Drive a single node with velocity samples ``f_dot[n] = f'(n dt)``.

    Returns the diffusive derivative at every sample time; entry 0 is zero
    because the modes start at rest.
    """
    f_dot = np.asarray(f_dot, dtype=float)
    if f_dot.ndim != 1:
        raise ShapeMismatch(f"expected a 1-D series, got shape {f_dot.shape}")
    coeff = precompute_mode_coefficients(quad, dt)
    out = np.zeros(f_dot.size)
    phi = np.zeros((1, quad.M))
    for n in range(f_dot.size - 1):
        v_half = 0.5 * (f_dot[n] + f_dot[n + 1])
        phi = phi_step(phi, np.array([v_half]), coeff)
        out[n + 1] = damping_force(phi, phi, quad)[0]
    return out


# -- direct convolution oracle -----------------------------------------------

_NODES = 32


def _kernel_integrals(n: int, alpha: float, eta: float, dt: float) -> np.ndarray:
    """W[k] = int_{k dt}^{(k+1) dt} exp(-eta s) s^(-alpha) ds / Gamma(1 - alpha)."""
    k = np.arange(n, dtype=float)
    if eta == 0.0:
        p = 1.0 - alpha
        W = dt**p * ((k + 1.0) ** p - k**p) / p
    else:
        # first interval carries the s^-alpha singularity: Gauss-Jacobi with that weight
        xj, wj = roots_jacobi(_NODES, 0.0, -alpha)
        s = 0.5 * dt * (1.0 + xj)
        first = (0.5 * dt) ** (1.0 - alpha) * np.sum(wj * np.exp(-eta * s))
        xl, wl = roots_legendre(_NODES)
        s = dt * (k[1:, None] + 0.5 * (1.0 + xl[None, :]))
        rest = 0.5 * dt * np.sum(wl * np.exp(-eta * s) * s ** (-alpha), axis=1)
        W = np.concatenate(([first], rest))
    return W / gamma(1.0 - alpha)


def caputo_convolution_oracle(samples, alpha: float, eta: float, dt: float) -> float:
    """Derivative at the last sample time from uniformly spaced samples.

    f' is taken piecewise constant (forward differences) and integrated
    against the exact kernel on each interval.
    """
    f = np.asarray(samples, dtype=float)
    n = f.size - 1
    if n < 1:
        raise InsufficientHistory("need at least two samples (n >= 1)")
    slopes = np.diff(f) / dt
    W = _kernel_integrals(n, alpha, eta, dt)
    # interval i = [t_i, t_{i+1}] sits at lag n - 1 - i
    return float(W[::-1] @ slopes)


def caputo_convolution_series(samples, alpha: float, eta: float, dt: float) -> np.ndarray:
    """Oracle evaluated at every sample time (entry 0 is zero)."""
    f = np.asarray(samples, dtype=float)
    n = f.size - 1
    if n < 1:
        raise InsufficientHistory("need at least two samples (n >= 1)")
    slopes = np.diff(f) / dt
    W = _kernel_integrals(n, alpha, eta, dt)
    out = np.zeros(n + 1)
    for m in range(1, n + 1):
        out[m] = W[:m][::-1] @ slopes[:m]
    return out
