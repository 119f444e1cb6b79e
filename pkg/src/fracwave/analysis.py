"""Discrete energy bookkeeping, decay-rate fits and interface diagnostics."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .assembly import SpatialOperators, apply_operator
from .errors import InsufficientData, PulseNotFound, ShapeMismatch
from .fractional import mode_energy
from .model import QuadratureGrid


def energy_raw(U: np.ndarray, V: np.ndarray, Phi: np.ndarray, ops: SpatialOperators,
               quad: QuadratureGrid) -> float:
    """1/2 V'MV + 1/2 U'KU + (C/2) sum_l w_l |Phi_l|^2."""
    n = ops.mass.diag.size
    if U.shape != (n,) or V.shape != (n,) or Phi.shape != (n, quad.M):
        raise ShapeMismatch(f"state shapes {U.shape}, {V.shape}, {Phi.shape} for {n} nodes")
    kinetic = 0.5 * float(V @ (ops.mass.diag * V))
    potential = 0.5 * float(U @ apply_operator(ops.stiffness, U))
    return kinetic + potential + mode_energy(Phi, quad)


def energy(state, ops: SpatialOperators, quad: QuadratureGrid) -> tuple[float, float]:
    """(E_raw, E_phys) for a state; E_phys = dx * E_raw."""
    e = energy_raw(state.U, state.V, state.Phi, ops, quad)
    return e, ops.grid.dx * e


@dataclass(frozen=True)
class EnergyRecord:
    n: int
    t: float
    E_raw: float
    E_phys: float
    D: float
    residual: float


@dataclass
class EnergySeries:
    """Energy records as parallel arrays.

    ``D[i]`` is the dissipation accumulated between records i and i+1 and
    ``residual[i] = E_raw[i+1] - E_raw[i] + D[i]``; both are 0 on the last record.
    """

    n: np.ndarray
    t: np.ndarray
    E_raw: np.ndarray
    E_phys: np.ndarray
    D: np.ndarray
    residual: np.ndarray

    def __len__(self) -> int:
        return self.n.size

    def __iter__(self) -> Iterator[EnergyRecord]:
        for i in range(len(self)):
            yield EnergyRecord(int(self.n[i]), float(self.t[i]), float(self.E_raw[i]),
                               float(self.E_phys[i]), float(self.D[i]), float(self.residual[i]))

    @staticmethod
    def recorder(ops: SpatialOperators, quad: QuadratureGrid) -> "_Recorder":
        return _Recorder(ops, quad)

    @classmethod
    def from_cumulative(cls, n, t, E, dissipated, dx: float) -> "EnergySeries":
        E = np.asarray(E, dtype=float)
        D = np.zeros_like(E)
        D[:-1] = np.diff(np.asarray(dissipated, dtype=float))
        res = np.zeros_like(E)
        res[:-1] = E[1:] - E[:-1] + D[:-1]
        return cls(np.asarray(n, dtype=int), np.asarray(t, dtype=float), E, dx * E, D, res)

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        buf.write("n,t,E_raw,E_phys,D,residual\n")
        for i in range(len(self)):
            buf.write(f"{self.n[i]:d},{self.t[i]:.17g},{self.E_raw[i]:.17g},"
                      f"{self.E_phys[i]:.17g},{self.D[i]:.17g},{self.residual[i]:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def read_csv(cls, path: str | Path) -> "EnergySeries":
        data = np.genfromtxt(path, delimiter=",", names=True, ndmin=1)
        return cls(data["n"].astype(int), data["t"], data["E_raw"], data["E_phys"], data["D"],
                   data["residual"])


class _Recorder:
    def __init__(self, ops: SpatialOperators, quad: QuadratureGrid):
        self.ops, self.quad = ops, quad
        self.n, self.t, self.E, self.cum = [], [], [], []

    def add(self, state) -> None:
        self.n.append(state.n)
        self.t.append(state.t)
        self.E.append(energy_raw(state.U, state.V, state.Phi, self.ops, self.quad))
        self.cum.append(state.dissipated)

    def finish(self, dx: float) -> EnergySeries:
        return EnergySeries.from_cumulative(self.n, self.t, self.E, self.cum, dx)


def identity_residual(series: EnergySeries) -> float:
    """max_n |E^{n+1} - E^n + D^n| / E^0."""
    if len(series) < 2:
        return 0.0
    return float(np.max(np.abs(series.residual[:-1])) / series.E_raw[0])


def energy_drift(series: EnergySeries) -> float:
    """max_n |E^n - E^0| / E^0."""
    return float(np.max(np.abs(series.E_raw - series.E_raw[0])) / series.E_raw[0])


# -- decay fits --------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    t_lo: float
    t_hi: float
    slope: float
    intercept: float
    rms: float
    count: int

    @property
    def C(self) -> float:
        return math.exp(self.intercept)

    def report(self) -> str:
        return (f"slope={self.slope:.17g}, C={self.C:.17g}, rms={self.rms:.17g}, "
                f"window=[{self.t_lo:.17g}, {self.t_hi:.17g}]")


def fit_decay(t, E, window: tuple[float, float] | None = None, min_records: int = 10) -> DecayFit:
    """Least-squares line log E = log C + p log t over ``window``.

    The default window is the last two decades, [t_max/100, t_max].
    """
    t = np.asarray(t, dtype=float)
    E = np.asarray(E, dtype=float)
    if window is None:
        t_hi = float(t.max())
        window = (t_hi / 100.0, t_hi)
    lo, hi = window
    keep = (t >= lo) & (t <= hi) & (t > 0) & (E > 0)
    if keep.sum() < min_records:
        raise InsufficientData(f"{int(keep.sum())} usable records in [{lo}, {hi}], "
                               f"need {min_records}")
    x = np.log(t[keep])
    y = np.log(E[keep])
    A = np.column_stack([np.ones_like(x), x])
    (c0, p), *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((y - (c0 + p * x)) ** 2)))
    return DecayFit(float(lo), float(hi), float(p), float(c0), rms, int(keep.sum()))


def fit_decay_series(series: EnergySeries, window=None) -> DecayFit:
    return fit_decay(series.t, series.E_raw, window)


# -- snapshots and reflection ------------------------------------------------

@dataclass(frozen=True)
class Snapshot:
    t: float
    x: np.ndarray
    w: np.ndarray

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        buf.write("t,x,w\n")
        for xi, wi in zip(self.x, self.w):
            buf.write(f"{self.t:.17g},{xi:.17g},{wi:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def peak(x: np.ndarray, w: np.ndarray, threshold: float | None = 1e-3) -> tuple[float, float]:
    """Signed extremum of ``w`` (largest |w|) refined by a three-point parabola.

    Raises PulseNotFound when the extremum is below ``threshold`` (None disables the check).
    """
    if w.size == 0:
        raise PulseNotFound("empty snapshot")
    i = int(np.argmax(np.abs(w)))
    if threshold is not None and abs(w[i]) < threshold:
        raise PulseNotFound(f"peak amplitude {abs(w[i]):.3g} below threshold {threshold}")
    if 0 < i < w.size - 1:
        y0, y1, y2 = w[i - 1], w[i], w[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            s = 0.5 * (y0 - y2) / denom
            if abs(s) <= 1.0:
                h = x[i + 1] - x[i]
                return x[i] + s * h, y1 - 0.25 * (y0 - y2) * s
    return float(x[i]), float(w[i])


def reflection_coefficient(incident: Snapshot, reflected: Snapshot,
                           threshold: float = 1e-3) -> float:
    """Signed ratio of the reflected to the incident pulse peak in the left medium.

    Both snapshots are restricted to x < 0; the incident one must hold only the
    incoming pulse and the later one only the reflected pulse there. The
    amplitude threshold applies to the incident pulse; a vanishing reflection
    (matched impedances) yields a ratio near zero rather than an error.
    """
    left_i = incident.x < 0
    left_r = reflected.x < 0
    _, a_inc = peak(incident.x[left_i], incident.w[left_i], threshold)
    _, a_ref = peak(reflected.x[left_r], reflected.w[left_r], None)
    return a_ref / a_inc


def impedance_reflection(k1: float, rho1: float, k2: float, rho2: float) -> float:
    """(Z1 - Z2)/(Z1 + Z2) with Z = sqrt(k rho)."""
    z1 = math.sqrt(k1 * rho1)
    z2 = math.sqrt(k2 * rho2)
    return (z1 - z2) / (z1 + z2)
