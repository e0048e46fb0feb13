"""Sampling grid theta_alpha = pi*alpha/N, arcs I_alpha, smooth points and spread tuples."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft


def natural_grid_size(n: int, K0: float) -> int:
    """floor(n^2 / log^K0 n)."""
    return math.floor(n * n / math.log(n) ** K0)


def desk_grid_size(n: int) -> int:
    """Grid size fine enough for the |X|,|Y| <= n^{-2/3} cut at desk-scale n.

    A root at angular offset d from the anchor gives |(X, Y)| ~ n s d with s the
    normalized derivative modulus; d <= pi/2N keeps this below n^{-2/3} for all
    s <= 1 once N >= (pi/2) n^{5/3}. Rounded up to a 5-smooth size for the FFT.
    """
    return scipy.fft.next_fast_len(math.ceil(0.5 * math.pi * n ** (5.0 / 3.0)), real=True)


@dataclass(frozen=True)
class SampleGrid:
    n: int
    N: int
    K0: float
    kappa: float
    P_max: int
    angles: np.ndarray = field(repr=False)
    smooth_mask: np.ndarray = field(repr=False)

    @property
    def half_width(self) -> float:
        return math.pi / (2 * self.N)

    @property
    def gamma(self) -> float:
        return self.n**self.kappa

    def interval(self, alpha: int) -> tuple[float, float]:
        th = math.pi * alpha / self.N
        return th - self.half_width, th + self.half_width

    def locate(self, t):
        """Index alpha with t in I_alpha (half-open, last arc closed); -1 outside [-pi/2N, pi + pi/2N]."""
        t = np.asarray(t, dtype=float)
        a = np.floor(t * self.N / math.pi + 0.5).astype(np.int64)
        a = np.where((a == self.N + 1) & (t <= math.pi + self.half_width), self.N, a)
        return np.where((a >= 0) & (a <= self.N), a, -1)

    def in_interval(self, alpha, t):
        """t in I_alpha under the half-open convention."""
        alpha = np.asarray(alpha)
        t = np.asarray(t, dtype=float)
        th = math.pi * alpha / self.N
        h = self.half_width
        upper = np.where(alpha == self.N, t <= th + h, t < th + h)
        return (t >= th - h) & upper


def _smooth_mask(n: int, N: int, gamma: float, P_max: int) -> np.ndarray:
    # ||p0 alpha / N|| = min(r, N - r)/N with r = p0*alpha mod N: exact in integers
    alpha = np.arange(N + 1, dtype=np.int64)
    ok = np.ones(N + 1, dtype=bool)
    for p0 in range(1, P_max + 2):
        r = (p0 * alpha) % N
        dist = np.minimum(r, N - r)
        ok &= dist * n > gamma * N
    return ok


def build_grid(n: int, K0: float = 2.0, kappa: float = 0.1, P_max: int = 4,
               N_override: int | None = None) -> SampleGrid:
    if n < 16:
        raise ValueError("grid needs n >= 16")
    if P_max < 0:
        raise ValueError("P_max must be non-negative")
    if N_override is None:
        N = natural_grid_size(n, K0)
        if N < 4 * n:
            raise ValueError(f"N = {N} < 4n; the linearization regime needs a finer grid (use N_override)")
    else:
        N = int(N_override)
        if N < 1:
            raise ValueError("N_override must be positive")
    angles = np.pi * np.arange(N + 1) / N
    angles[-1] = np.pi
    mask = _smooth_mask(n, N, n**kappa, P_max)
    return SampleGrid(n, N, K0, kappa, P_max, angles, mask)


def is_smooth(t: float, gamma: float, n: int, P_max: int) -> bool:
    """||p0 t/pi||_{R/Z} > gamma/n for every integer p0 in [1, P_max + 1]."""
    for p0 in range(1, P_max + 2):
        x = p0 * t / math.pi
        if abs(x - round(x)) <= gamma / n:
            return False
    return True


def is_spread(ts: Sequence[float], gamma: float, n: int) -> bool:
    """Pairwise gaps >= gamma/n among ts and the sentinels 0, pi (the sentinel pair excluded)."""
    ts = np.asarray(ts, dtype=float)
    if ts.size == 0:
        return True
    thr = gamma / n
    if np.any(ts < thr) or np.any(math.pi - ts < thr):
        return False
    s = np.sort(ts)
    return bool(np.all(np.diff(s) >= thr))


def bad_arc_fraction(grid: SampleGrid) -> float:
    return float(np.count_nonzero(~grid.smooth_mask)) / (grid.N + 1)
