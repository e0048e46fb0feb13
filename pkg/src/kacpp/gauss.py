"""Gaussian side: covariances of W(t) = (X, Y, X'/n, Y'/n), the phase-space domain D_{U,V,r}
and its Lebesgue and Gaussian measures, plus Monte Carlo cross-checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sampler import SeedSpec, make_rng


def sigma0() -> np.ndarray:
    """Limiting covariance of W(t) away from t = 0, pi."""
    return np.array([
        [1 / 2, 0, 0, 1 / 4],
        [0, 1 / 2, -1 / 4, 0],
        [0, -1 / 4, 1 / 6, 0],
        [1 / 4, 0, 0, 1 / 6],
    ])


def covariance_single(t: float, n: int) -> np.ndarray:
    """Exact covariance of W(t) for standard coefficients, summed term by term over k = 0..n."""
    k = np.arange(n + 1, dtype=float)
    c2, s2, sn2 = np.cos(k * t) ** 2, np.sin(k * t) ** 2, np.sin(2 * k * t)
    q = k / n
    S = np.empty((4, 4))
    S[0, 0] = c2.sum()
    S[1, 1] = s2.sum()
    S[2, 2] = (q * q * s2).sum()
    S[3, 3] = (q * q * c2).sum()
    S[0, 1] = S[1, 0] = 0.5 * sn2.sum()
    S[0, 2] = S[2, 0] = -0.5 * (q * sn2).sum()
    S[0, 3] = S[3, 0] = (q * c2).sum()
    S[1, 2] = S[2, 1] = -(q * s2).sum()
    S[1, 3] = S[3, 1] = 0.5 * (q * sn2).sum()
    S[2, 3] = S[3, 2] = -0.5 * (q * q * sn2).sum()
    return S / n


def _loadings(ts: Sequence[float], n: int) -> np.ndarray:
    """Rows express each W component as a linear form in the coefficients."""
    k = np.arange(n + 1, dtype=float)
    q = k / n
    rows = []
    for t in ts:
        c, s = np.cos(k * t), np.sin(k * t)
        rows += [c, s, -q * s, q * c]
    return np.array(rows) / math.sqrt(n)


def covariance_joint(ts: Sequence[float], n: int) -> np.ndarray:
    """4k x 4k covariance of (W(t_1), ..., W(t_k))."""
    A = _loadings(ts, n)
    S = A @ A.T
    return 0.5 * (S + S.T)


def min_eigenvalue_diagnostic(ts: Sequence[float], n: int) -> float:
    """Smallest eigenvalue of the joint covariance."""
    return float(np.linalg.eigvalsh(covariance_joint(ts, n))[0])


def is_psd(S: np.ndarray, rtol: float = 1e-10) -> bool:
    return bool(np.linalg.eigvalsh(S)[0] >= -rtol * max(np.trace(S), 0.0))


def sample_gaussian_W(cov: np.ndarray, count: int, seed: SeedSpec | np.random.Generator) -> np.ndarray:
    """``count`` centred Gaussian vectors with covariance ``cov`` (rows)."""
    cov = np.asarray(cov, dtype=float)
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, stream=7)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(cov)
        if w[0] < -1e-10 * max(np.trace(cov), 0.0) or not np.all(np.isfinite(w)):
            raise
        L = V * np.sqrt(np.clip(w, 0.0, None))
    return rng.standard_normal((count, cov.shape[0])) @ L.T


@dataclass(frozen=True)
class DomainSpec:
    """D_{U,V,r}: predicted radial mark in U, angular mark in V, normalized derivative radius below r."""

    U: tuple[float, float]
    V: tuple[float, float] = (-math.pi / 2, math.pi / 2)
    r: float = math.inf
    N: int = 10_000
    n: int = 100

    def __post_init__(self):
        if not (math.isfinite(self.U[1] - self.U[0]) and math.isfinite(self.V[1] - self.V[0])):
            raise ValueError("U and V must be bounded")
        if self.U[1] < self.U[0] or self.V[1] < self.V[0]:
            raise ValueError("empty interval")
        if self.r < 0:
            raise ValueError("r must be non-negative")

    @property
    def U_len(self) -> float:
        return self.U[1] - self.U[0]

    @property
    def V_len(self) -> float:
        return self.V[1] - self.V[0]

    def contains(self, W: np.ndarray) -> np.ndarray:
        """Membership for rows (x, y, x', y')."""
        W = np.atleast_2d(W)
        x, y, xp, yp = W[:, 0], W[:, 1], W[:, 2], W[:, 3]
        z2 = xp * xp + yp * yp
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.n * (y * xp - x * yp) / z2
            v = (self.N / self.n) * (x * xp + y * yp) / z2
        return ((u >= self.U[0]) & (u <= self.U[1]) & (v >= self.V[0]) & (v <= self.V[1])
                & (z2 < self.r * self.r) & (z2 > 0))


def lebesgue_measure(D: DomainSpec) -> float:
    """pi r^4 |U| |V| / (2N); independent of n since the U/n and nV/N scalings cancel."""
    if not math.isfinite(D.r):
        raise ValueError("infinite measure for r = inf")
    return math.pi * D.r**4 * D.U_len * D.V_len / (2 * D.N)


def radial_integral(r: float) -> float:
    """int_{|z|<=r} |z|^2 exp(-12|z|^2) dm(z) in closed form."""
    if math.isinf(r):
        return math.pi / 144
    a = 12.0 * r * r
    return (math.pi / 144) * -math.expm1(-a) - (math.pi / 144) * a * math.exp(-a)


def gaussian_prob_closed_form(D: DomainSpec) -> float:
    """Leading-order Gaussian probability of W in D: (12/pi^2) (|U||V|/N) I(r)."""
    return (12 / math.pi**2) * D.U_len * D.V_len / D.N * radial_integral(D.r)


@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    samples: int


def mc_volume(D: DomainSpec, count: int, seed: SeedSpec, chunk: int = 1_000_000) -> MCEstimate:
    """Lebesgue volume of D by uniform sampling in a bounding box."""
    if not math.isfinite(D.r):
        raise ValueError("bounded r required")
    rng = make_rng(seed, stream=11)
    umax = max(abs(D.U[0]), abs(D.U[1])) / D.n
    vmax = max(abs(D.V[0]), abs(D.V[1])) * D.n / D.N
    # |w| <= |z| (|u| + |v|) bounds both coordinates of w
    B = D.r * (umax + vmax)
    box = (2 * D.r) ** 2 * (2 * B) ** 2
    hits, done = 0, 0
    while done < count:
        m = min(chunk, count - done)
        W = np.column_stack([rng.uniform(-B, B, m), rng.uniform(-B, B, m),
                             rng.uniform(-D.r, D.r, m), rng.uniform(-D.r, D.r, m)])
        hits += int(np.count_nonzero(D.contains(W)))
        done += m
    p = hits / count
    return MCEstimate(box * p, box * math.sqrt(p * (1 - p) / count), count)


def gaussian_mc_probability(domains: Sequence[DomainSpec], count: int, seed: SeedSpec,
                            cov: np.ndarray | None = None, chunk: int = 1_000_000) -> list[MCEstimate]:
    """P(W in D) for each domain from one shared stream of Gaussian draws (default covariance Sigma_0)."""
    cov = sigma0() if cov is None else cov
    rng = make_rng(seed, stream=13)
    hits = np.zeros(len(domains), dtype=np.int64)
    done = 0
    while done < count:
        m = min(chunk, count - done)
        W = sample_gaussian_W(cov, m, rng)
        for i, D in enumerate(domains):
            hits[i] += np.count_nonzero(D.contains(W))
        done += m
    out = []
    for h in hits:
        p = h / count
        out.append(MCEstimate(p, math.sqrt(max(p * (1 - p), 1.0 / count) / count), count))
    return out


@dataclass(frozen=True)
class DefectEstimate:
    defect: float
    std_error: float
    joint: float
    product: float


def _in_box(W: np.ndarray, box) -> np.ndarray:
    box = np.asarray(box, dtype=float)
    return np.all((W >= box[:, 0]) & (W <= box[:, 1]), axis=1)


def decorrelation_defect(ts: Sequence[float], boxes, n: int, count: int = 1_000_000,
                         seed: SeedSpec = SeedSpec(0)) -> DefectEstimate:
    """|P(W(t_i) in box_i for all i) - prod_i P(W_0 in box_i)| by Gaussian Monte Carlo.

    Each box is a (4, 2) array of [low, high] per coordinate.
    """
    k = len(ts)
    if len(boxes) != k:
        raise ValueError("one box per angle")
    rng = make_rng(seed, stream=17)
    J = sample_gaussian_W(covariance_joint(ts, n), count, rng)
    joint_hit = np.ones(count, dtype=bool)
    for i, b in enumerate(boxes):
        joint_hit &= _in_box(J[:, 4 * i:4 * i + 4], b)
    pj = joint_hit.mean()
    S0 = sigma0()
    ps = []
    for b in boxes:
        ps.append(_in_box(sample_gaussian_W(S0, count, rng), b).mean())
    ps = np.array(ps)
    prod = float(np.prod(ps))
    var = pj * (1 - pj) / count
    for i in range(k):
        others = np.prod(np.delete(ps, i))
        var += others**2 * ps[i] * (1 - ps[i]) / count
    return DefectEstimate(abs(pj - prod), math.sqrt(var), float(pj), prod)
