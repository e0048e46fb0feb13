"""The normalized field X + iY = f / sqrt(n) on and near the unit circle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .grid import SampleGrid


@dataclass(frozen=True)
class KacPolynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("need at least two coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.size - 1


@dataclass(frozen=True)
class FieldSample:
    """Field and its angular derivative at angle ``t``.

    ``dX``/``dY`` are the raw t-derivatives of the normalized field (size ~ n);
    :attr:`W` gives the order-one vector (X, Y, dX/n, dY/n).
    """

    t: float
    X: float
    Y: float
    dX: float
    dY: float
    n: int

    @property
    def normalized_derivative(self) -> tuple[float, float]:
        return self.dX / self.n, self.dY / self.n

    @property
    def W(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.dX / self.n, self.dY / self.n])


@dataclass(frozen=True)
class GEventReport:
    passed: bool
    worst_ratio: float


def _horner(coeffs: np.ndarray, z):
    """f(z) and f'(z) by Horner's scheme (vectorized over z)."""
    z = np.asarray(z, dtype=complex)
    p = np.full(z.shape, coeffs[-1], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    for c in coeffs[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def eval_field(poly: KacPolynomial, rho, t):
    """(X, Y) at z = (1 + rho) e^{it}."""
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) > 0.5):
        raise ValueError("|rho| must be at most 1/2")
    z = (1.0 + rho) * np.exp(1j * np.asarray(t, dtype=float))
    f, _ = _horner(poly.coeffs, z)
    f = f / math.sqrt(poly.n)
    return f.real, f.imag


def eval_sample(poly: KacPolynomial, t: float) -> FieldSample:
    z = np.exp(1j * t)
    f, df = _horner(poly.coeffs, z)
    s = math.sqrt(poly.n)
    # d/dt f(e^{it}) = i z f'(z)
    dt = 1j * z * df / s
    return FieldSample(float(t), float(f.real / s), float(f.imag / s), float(dt.real), float(dt.imag), poly.n)


def radial_partials(poly: KacPolynomial, t: float) -> tuple[float, float]:
    """(dX/drho, dY/drho) at rho = 0, computed from f' directly."""
    z = np.exp(1j * t)
    _, df = _horner(poly.coeffs, z)
    v = z * df / math.sqrt(poly.n)
    return float(v.real), float(v.imag)


def _half_circle_dft(a: np.ndarray, N: int) -> np.ndarray:
    """sum_k a_k exp(i pi alpha k / N) for alpha = 0..N."""
    L = 2 * N
    if a.size > L:
        # e^{i pi alpha k/N} has period 2N in k
        folded = np.zeros(L)
        np.add.at(folded, np.arange(a.size) % L, a)
        a = folded
    return np.conj(scipy.fft.rfft(a, n=L))


@dataclass(frozen=True)
class GridSamples:
    """Columns X, Y, dX, dY on the grid angles, same conventions as FieldSample."""

    theta: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    dX: np.ndarray
    dY: np.ndarray
    n: int

    def __len__(self):
        return self.theta.size

    def __getitem__(self, i) -> FieldSample:
        return FieldSample(float(self.theta[i]), float(self.X[i]), float(self.Y[i]),
                           float(self.dX[i]), float(self.dY[i]), self.n)


def batch_eval_grid(poly: KacPolynomial, grid: SampleGrid) -> GridSamples:
    """Field samples at every grid angle pi*alpha/N via two real FFTs of length 2N."""
    N = grid.N
    expected = np.pi * np.arange(N + 1) / N
    if grid.angles.shape != expected.shape or not np.allclose(grid.angles, expected, rtol=0, atol=1e-12):
        raise ValueError("batch evaluation needs the uniform grid pi*alpha/N")
    xi = poly.coeffs
    k = np.arange(xi.size, dtype=float)
    s = math.sqrt(poly.n)
    f = _half_circle_dft(xi, N) / s
    g = _half_circle_dft(k * xi, N) / s  # sum k xi_k e^{ik theta}; d/dt f = i g
    return GridSamples(grid.angles, f.real, f.imag, -g.imag, g.real, poly.n)


def check_event_G(poly: KacPolynomial) -> GEventReport:
    """Derivative bounds of order 0, 1, 2 on the circles 1 +- log n / n^2.

    Values are taken on 8n equispaced angles; by Bernstein's inequality the sup
    over the circle is at most twice the grid max, so ratios carry a factor 2.
    """
    n = poly.n
    L = math.log(n) if n > 1 else 1.0
    M = 8 * n
    k = np.arange(n + 1, dtype=float)
    worst = 0.0
    for R in (1.0 - L / n**2, 1.0 + L / n**2):
        a = poly.coeffs * R**k
        # all of f, f', f'' and the polar partials are trigonometric sums of these
        s0 = np.abs(scipy.fft.fft(a, M))
        s1 = np.abs(scipy.fft.fft(k * a, M))
        s2 = np.abs(scipy.fft.fft(k * k * a, M))
        s11 = np.abs(scipy.fft.fft(k * (k - 1) * a, M))
        order = {
            0: [s0],
            # f' = s1/z, df/dtheta = i s1, df/drho = s1/R
            1: [s1 / R, s1, s1 / R],
            # f'' = s11/z^2, d2f/dtheta2 = -s2, d2f/dtheta drho = i s2/R, d2f/drho2 = s11/R^2
            2: [s11 / R**2, s2, s2 / R, s11 / R**2],
        }
        for kk, vals in order.items():
            thr = n ** (kk + 0.5) * L**2
            for v in vals:
                worst = max(worst, 2.0 * float(v.max()) / thr)
    return GEventReport(worst <= 1.0, worst)
