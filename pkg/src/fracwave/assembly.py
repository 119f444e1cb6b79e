"""Finite-volume mass and stiffness operators for the two-material bar.

Unknowns are ordered j = -J..J. Left of the interface the material is
(rho1, k1), right of it (rho2, k2); node 0 carries the interface balance.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .model import PhysicalParams, SpatialGrid


@dataclass(frozen=True)
class MassMatrix:
    diag: np.ndarray

    def __len__(self) -> int:
        return self.diag.size

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.diag * x

    def dense(self) -> np.ndarray:
        return np.diag(self.diag)


@dataclass(frozen=True)
class StiffnessMatrix:
    """Symmetric tridiagonal storage: ``main`` (n) and ``off`` (n-1)."""

    main: np.ndarray
    off: np.ndarray

    def __len__(self) -> int:
        return self.main.size

    def dense(self) -> np.ndarray:
        return np.diag(self.main) + np.diag(self.off, 1) + np.diag(self.off, -1)


@dataclass(frozen=True)
class SpatialOperators:
    mass: MassMatrix
    stiffness: StiffnessMatrix
    grid: SpatialGrid


def assemble_mass(p: PhysicalParams, g: SpatialGrid) -> MassMatrix:
    J = g.J
    diag = np.empty(2 * J + 1)
    diag[:J] = p.rho1
    diag[J] = 0.5 * (p.rho1 + p.rho2)
    diag[J + 1:] = p.rho2
    return MassMatrix(diag)


def assemble_stiffness(p: PhysicalParams, g: SpatialGrid) -> StiffnessMatrix:
    """K such that the semi-discrete motion reads M U'' + K U + F = 0.

    Zero ghost values beyond j = +-J give the 2k/dx^2 diagonal on the
    extreme rows; row 0 is (-k1, k1 + k2, -k2)/dx^2.
    """
    J = g.J
    h2 = g.dx * g.dx
    main = np.empty(2 * J + 1)
    main[:J] = 2.0 * p.k1 / h2
    main[J] = (p.k1 + p.k2) / h2
    main[J + 1:] = 2.0 * p.k2 / h2
    off = np.empty(2 * J)
    off[:J] = -p.k1 / h2
    off[J:] = -p.k2 / h2
    return StiffnessMatrix(main, off)


def assemble(p: PhysicalParams, g: SpatialGrid) -> SpatialOperators:
    return SpatialOperators(assemble_mass(p, g), assemble_stiffness(p, g), g)


def apply_operator(K: StiffnessMatrix, x: np.ndarray) -> np.ndarray:
    """Tridiagonal product K @ x in O(n)."""
    x = np.asarray(x, dtype=float)
    if x.shape != K.main.shape:
        raise ShapeMismatch(f"vector of shape {x.shape} for operator of size {K.main.size}")
    y = K.main * x
    y[:-1] += K.off * x[1:]
    y[1:] += K.off * x[:-1]
    return y


def rows_csv(K: StiffnessMatrix | MassMatrix) -> str:
    """Dense rows as CSV text, for fixtures and debugging."""
    buf = io.StringIO()
    np.savetxt(buf, K.dense(), delimiter=",", fmt="%.17g")
    return buf.getvalue()
