"""All roots of f and the close-root processes nu_f."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _aberth

log = logging.getLogger(__name__)

Interval = tuple[float, float]


def _as_intervals(U) -> list[Interval]:
    if len(U) == 2 and np.isscalar(U[0]):
        return [(float(U[0]), float(U[1]))]
    return [(float(a), float(b)) for a, b in U]


@dataclass
class PointProcess:
    """Finite counting measure on the real line, with optional per-point extended marks.

    ``extended`` rows are (theta, x, y, x', y').
    """

    marks: np.ndarray
    extended: np.ndarray | None = None

    def __post_init__(self):
        self.marks = np.asarray(self.marks, dtype=float).ravel()
        if self.extended is not None:
            self.extended = np.asarray(self.extended, dtype=float).reshape(-1, 5)
            if len(self.extended) != len(self.marks):
                raise ValueError("one extended mark per point")

    def __len__(self):
        return self.marks.size

    def count(self, U) -> int:
        """Number of marks in U: an interval (a, b) or a list of disjoint closed intervals."""
        total = 0
        for a, b in _as_intervals(U):
            total += int(np.count_nonzero((self.marks >= a) & (self.marks <= b)))
        return total

    def __add__(self, other: "PointProcess") -> "PointProcess":
        ext = None
        if self.extended is not None and other.extended is not None:
            ext = np.vstack([self.extended, other.extended])
        return PointProcess(np.concatenate([self.marks, other.marks]), ext)


class RootFindingError(RuntimeError):
    def __init__(self, message: str, worst_residual: float):
        super().__init__(f"{message} (worst residual {worst_residual:.3e})")
        self.worst_residual = worst_residual


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residuals: np.ndarray
    sweeps: int = 0

    @property
    def degree(self) -> int:
        return self.roots.size

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    def is_conjugate_closed(self, tol: float = 1e-8) -> bool:
        z = self.roots
        cz = np.conj(z)
        used = np.zeros(z.size, dtype=bool)
        for i in np.argsort(z.real):
            if used[i]:
                continue
            d = np.abs(z - cz[i])
            d[used] = np.inf
            j = int(np.argmin(d))
            if d[j] > tol * max(1.0, abs(z[i])):
                return False
            used[i] = used[j] = True
        return True


# real roots come back with imaginary parts at rounding level
REAL_SNAP = 1e-10


def initial_guesses(n: int, radius: float = 1.0) -> np.ndarray:
    """Points on the circles radius * (1 -/+ 1/n), alternating, rotated off the real axis."""
    j = np.arange(n)
    r = radius * np.where(j % 2 == 0, 1.0 - 1.0 / n, 1.0 + 1.0 / n)
    ang = 2.0 * np.pi * (j + 0.5) / n + 0.7 / n
    return r * np.exp(1j * ang)


def find_all_roots(coeffs: Sequence[float] | np.ndarray, tol: float = 1e-14, max_sweeps: int = 200,
                   residual_gate: float = 1e-8) -> RootSet:
    """All roots of sum_k c_k z^k by Aberth-Ehrlich iteration plus one Newton polish.

    Trailing zero coefficients are trimmed, so the degree may drop. Raises
    :class:`RootFindingError` if the sweep limit is hit or a residual exceeds
    ``residual_gate``.
    """
    c = np.asarray(getattr(coeffs, "coeffs", coeffs), dtype=float)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("zero polynomial")
    c = c[: nz[-1] + 1]
    n = c.size - 1
    if n == 0:
        return RootSet(np.empty(0, complex), np.empty(0))
    # geometric mean of the root moduli, about 1 for Kac polynomials
    z = initial_guesses(n, math.exp((math.log(abs(c[0])) - math.log(abs(c[-1]))) / n) if c[0] != 0 else 1.0)
    sweeps = _aberth.aberth(c, z, tol, max_sweeps)
    res = _aberth.polish_and_residuals(c, z)
    worst = float(res.max())
    if sweeps < 0:
        raise RootFindingError(f"no convergence after {max_sweeps} sweeps", worst)
    if not worst <= residual_gate:
        raise RootFindingError("residual gate failed", worst)
    real = np.abs(z.imag) <= REAL_SNAP * np.maximum(1.0, np.abs(z))
    z = np.where(real, z.real + 0j, z)
    return RootSet(z, res, sweeps)


def build_nu(rootset: RootSet, grid, samples=None, sign: int = 1):
    """(nu_sharp, nu_flat) from roots with Im z >= 0 inside some annulus C_alpha.

    Marks are sign * n^2 (|z| - 1). With ``samples`` (grid field samples), the
    extended marks carry X'(theta_alpha)/n and Y'(theta_alpha)/n; y is NaN.
    """
    n = grid.n
    z = rootset.roots
    r = np.abs(z)
    keep = (z.imag >= 0) & (np.abs(1.0 - r) <= math.log(n) / n**2)
    z, r = z[keep], r[keep]
    alpha = grid.locate(np.angle(z))
    inside = alpha >= 0
    z, r, alpha = z[inside], r[inside], alpha[inside]
    marks = sign * n * n * (r - 1.0)
    theta = np.pi * alpha / grid.N
    if samples is not None:
        dx, dy = samples.dX[alpha] / n, samples.dY[alpha] / n
    else:
        dx = dy = np.full(alpha.size, np.nan)
    ext = np.column_stack([theta, marks, np.full(alpha.size, np.nan), dx, dy])
    sm = grid.smooth_mask[alpha]
    return PointProcess(marks[sm], ext[sm]), PointProcess(marks[~sm], ext[~sm])


def nearest_distance(rootset: RootSet, n: int | None = None) -> float:
    """n^2 times the distance from the unit circle to the nearest root."""
    if rootset.degree == 0:
        raise ValueError("empty root set")
    n = rootset.degree if n is None else n
    return float(n * n * np.min(np.abs(1.0 - np.abs(rootset.roots))))
