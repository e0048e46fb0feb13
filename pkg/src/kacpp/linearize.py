"""Local affine model of the field at grid angles and the linearized process mu_f.

For a sample (X, Y, X', Y') at theta the model is

    F(dt, rho) = (X, Y) + [[X', Y'], [Y', -X']] (dt, rho)

whose zero (tau - theta, rho) predicts the nearest root (1 + rho) e^{i tau}.
Events that fail are simply not emitted (an "infinite" mark never lands in a
finite window).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import FieldSample, GridSamples, KacPolynomial, batch_eval_grid
from .grid import SampleGrid
from .roots import PointProcess


@dataclass(frozen=True)
class LinearModel:
    theta: float
    offset: tuple[float, float]
    matrix: np.ndarray

    @classmethod
    def from_sample(cls, sample: FieldSample) -> "LinearModel":
        a, b = sample.dX, sample.dY
        return cls(sample.t, (sample.X, sample.Y), np.array([[a, b], [b, -a]]))

    def __call__(self, dt: float, rho: float) -> np.ndarray:
        return np.asarray(self.offset) + self.matrix @ np.array([dt, rho])

    @property
    def determinant(self) -> float:
        return float(self.matrix[0, 0] * self.matrix[1, 1] - self.matrix[0, 1] ** 2)

    @property
    def inverse_norm(self) -> float:
        # the matrix is sqrt(a^2 + b^2) times a reflection
        return 1.0 / math.hypot(self.matrix[0, 0], self.matrix[0, 1])


@dataclass(frozen=True)
class PredictedRoot:
    alpha: int
    rho: float
    tau: float
    Z: float
    extended_mark: tuple[float, float, float, float]


@dataclass(frozen=True)
class EventFlags:
    a_prime: bool
    a_doubleprime: bool

    @property
    def a(self) -> bool:
        return self.a_prime and self.a_doubleprime


def _solve(X, Y, dX, dY, theta):
    d2 = dX * dX + dY * dY
    rho = (dX * Y - X * dY) / d2
    tau = theta - (X * dX + Y * dY) / d2
    return rho, tau


def predict(sample: FieldSample, theta: float, alpha: int = -1, N: int | None = None) -> PredictedRoot | None:
    """Zero of the affine model; ``None`` when the derivative vector vanishes (or underflows)."""
    if sample.dX * sample.dX + sample.dY * sample.dY == 0.0:
        return None
    rho, tau = _solve(sample.X, sample.Y, sample.dX, sample.dY, theta)
    n = sample.n
    Ny = (N * (theta - tau)) if N is not None else math.nan
    return PredictedRoot(alpha, float(rho), float(tau), n * n * float(rho),
                         (n * n * float(rho), float(Ny), sample.dX / n, sample.dY / n))


def _doubleprime(X, Y, dX, dY, n: int, K0: float):
    L = math.log(n)
    small = n ** (-2.0 / 3.0)
    lo, hi = n * L ** (-2.0 * K0), n * L**2
    adX, adY = np.abs(dX), np.abs(dY)
    return ((np.abs(X) <= small) & (np.abs(Y) <= small)
            & (adX >= lo) & (adX <= hi) & (adY >= lo) & (adY <= hi))


def _prime(alpha, rho, tau, grid: SampleGrid):
    n = grid.n
    return grid.in_interval(alpha, tau) & (n * n * np.abs(rho) <= math.log(n))


def evaluate_events(pred: PredictedRoot | None, sample: FieldSample, grid: SampleGrid) -> EventFlags:
    app = bool(_doubleprime(sample.X, sample.Y, sample.dX, sample.dY, grid.n, grid.K0))
    if pred is None:
        return EventFlags(False, False)
    ap = bool(_prime(pred.alpha, pred.rho, pred.tau, grid))
    return EventFlags(ap, app)


@dataclass(frozen=True)
class LinearizedEvents:
    """All grid indices where the good event holds, with their predictions."""

    alpha: np.ndarray
    rho: np.ndarray
    tau: np.ndarray
    dX: np.ndarray
    dY: np.ndarray
    smooth: np.ndarray
    grid: SampleGrid

    @property
    def theta(self) -> np.ndarray:
        return np.pi * self.alpha / self.grid.N

    @property
    def Z(self) -> np.ndarray:
        return self.grid.n**2 * self.rho

    def extended(self) -> np.ndarray:
        """Rows (theta, n^2 rho, N(theta - tau), X'/n, Y'/n)."""
        n, N = self.grid.n, self.grid.N
        return np.column_stack([self.theta, self.Z, N * (self.theta - self.tau),
                                self.dX / n, self.dY / n])


def linearized_events(poly: KacPolynomial, grid: SampleGrid, samples: GridSamples | None = None) -> LinearizedEvents:
    if poly.n != grid.n:
        raise ValueError("polynomial degree and grid degree differ")
    s = samples if samples is not None else batch_eval_grid(poly, grid)
    # the cheap |X|,|Y| cut first; it removes all but a handful of indices
    cand = np.flatnonzero(_doubleprime(s.X, s.Y, s.dX, s.dY, grid.n, grid.K0))
    X, Y, dX, dY = s.X[cand], s.Y[cand], s.dX[cand], s.dY[cand]
    rho, tau = _solve(X, Y, dX, dY, grid.angles[cand])
    keep = _prime(cand, rho, tau, grid)
    a = cand[keep]
    return LinearizedEvents(a, rho[keep], tau[keep], dX[keep], dY[keep], grid.smooth_mask[a], grid)


def build_mu(poly: KacPolynomial, grid: SampleGrid, events: LinearizedEvents | None = None):
    """(mu_sharp, mu_flat): marks n^2 rho_alpha split by smoothness of theta_alpha."""
    ev = events if events is not None else linearized_events(poly, grid)
    ext = ev.extended()
    sm = ev.smooth
    return (PointProcess(ev.Z[sm], ext[sm]), PointProcess(ev.Z[~sm], ext[~sm]))


@dataclass(frozen=True)
class SeparationAudit:
    adjacent_pairs: int
    adjacent_violations: int
    close_pairs_window: tuple[int, int]
    close_violations: int

    @property
    def violations(self) -> int:
        return self.adjacent_violations + self.close_violations


def separation_audit(ev: LinearizedEvents) -> SeparationAudit:
    """Count breaches of the two separation rules among smooth event indices.

    (i) neighbours alpha, alpha+1 both firing need |tau_alpha - theta_alpha| in
    [h (1 - 1/log^K0 n), h] with h = pi/2N; (ii) no two firing indices with
    pi/N < |theta - theta'| <= 1/(n log^{4 K0} n).
    """
    g = ev.grid
    n, N, K0 = g.n, g.N, g.K0
    L = math.log(n)
    h = g.half_width
    sm = ev.smooth
    a = ev.alpha[sm]
    off = np.abs(ev.tau[sm] - ev.theta[sm])
    order = np.argsort(a)
    a, off = a[order], off[order]
    nbr = np.flatnonzero(np.diff(a) == 1)
    lo = h * (1.0 - L ** (-K0))
    bad_i = int(np.count_nonzero((off[nbr] < lo) | (off[nbr] > h)))
    dmax = math.floor(N / (math.pi * n * L ** (4 * K0)))
    bad_ii = 0
    if dmax >= 2:
        for i in range(a.size):
            j = np.searchsorted(a, a[i] + dmax, side="right")
            d = a[i + 1:j] - a[i]
            bad_ii += int(np.count_nonzero(d >= 2))
    return SeparationAudit(int(nbr.size), bad_i, (2, dmax), bad_ii)
