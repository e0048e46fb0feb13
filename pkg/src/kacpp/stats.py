"""Estimators and goodness-of-fit checks over per-trial summaries."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import stats as sps


@dataclass
class TrialSummary:
    """Counts of each process in each configured interval for one trial.

    Root-based fields stay ``None`` for experiments that skip root finding.
    """

    trial_index: int
    mu_sharp: list[int]
    mu_flat: list[int]
    mu_flat_total: int
    G_passed: bool
    mu_sharp_total: int = 0
    nu_sharp: list[int] | None = None
    nu_flat: list[int] | None = None
    nu_flat_total: int | None = None
    nearest_distance: float | None = None
    separation_violations: int = 0
    adjacent_pairs: int = 0
    max_residual: float | None = None

    def __post_init__(self):
        for name in ("mu_sharp", "mu_flat", "nu_sharp", "nu_flat"):
            v = getattr(self, name)
            if v is not None and any(c < 0 for c in v):
                raise ValueError(f"negative count in {name}")

    @property
    def agreement(self) -> bool | None:
        if self.nu_sharp is None:
            return None
        return self.mu_sharp[0] == self.nu_sharp[0]

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["agreement"] = self.agreement
        return d


def falling_factorial(x: int, k: int) -> int:
    """max(0, x (x-1) ... (x-k+1))."""
    if k < 1:
        raise ValueError("k must be at least 1")
    out = 1
    for j in range(k):
        out *= x - j
    return max(0, out)


@dataclass(frozen=True)
class MomentReport:
    k: int
    estimate: float
    std_error: float
    target: float
    trials: int

    @property
    def z(self) -> float:
        return (self.estimate - self.target) / self.std_error if self.std_error > 0 else math.inf


def empirical_factorial_moments(counts: Sequence[int], k: int, U_length: float) -> MomentReport:
    """Mean and standard error of (count)_k against the Poisson value (|U|/12)^k."""
    counts = list(counts)
    if len(counts) < 2:
        raise ValueError("need at least two trials")
    v = np.array([falling_factorial(int(c), k) for c in counts], dtype=float)
    se = v.std(ddof=1) / math.sqrt(v.size)
    if se == 0:
        # all-equal samples: report the resolution of one trial rather than zero
        se = 1.0 / v.size
    return MomentReport(k, float(v.mean()), float(se), (U_length / 12.0) ** k, v.size)


def ks_exponential(samples: Sequence[float], rate: float = 1 / 6) -> float:
    """Kolmogorov-Smirnov distance to the CDF 1 - exp(-rate x)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    return float(sps.kstest(x, "expon", args=(0.0, 1.0 / rate)).statistic)


def agreement_rate(summaries: Sequence[TrialSummary]) -> float:
    flags = [s.agreement for s in summaries]
    if any(f is None for f in flags):
        raise ValueError("agreement needs root-based counts")
    return float(np.mean(flags))


def flat_mass_rate(summaries: Sequence[TrialSummary]) -> tuple[float, float | None]:
    mu = float(np.mean([s.mu_flat_total > 0 for s in summaries]))
    if any(s.nu_flat_total is None for s in summaries):
        return mu, None
    return mu, float(np.mean([s.nu_flat_total > 0 for s in summaries]))


def radius_cdf(s):
    """CDF of s = |(x', y')| under density proportional to s^3 exp(-12 s^2)."""
    a = 12.0 * np.asarray(s, dtype=float) ** 2
    return -np.expm1(-a) - a * np.exp(-a)


def extended_intensity_check(marks: np.ndarray, U: tuple[float, float] | None = None,
                             bins: int = 6, alpha: float = 1e-3, min_marks: int = 100) -> dict[str, Any]:
    """Shape tests for pooled extended marks (theta, x, y, x', y').

    theta is tested against uniform on [0, pi], x for constant intensity on U
    (chi-square over equal bins), and the derivative radius against the
    s^3 exp(-12 s^2) law. The y coordinate is only summarized.
    """
    marks = np.asarray(marks, dtype=float).reshape(-1, 5)
    report: dict[str, Any] = {"marks": int(len(marks))}
    if len(marks) < min_marks:
        report["status"] = "inconclusive"
        return report
    theta, x, y, xp, yp = marks.T
    th = sps.kstest(theta, "uniform", args=(0.0, math.pi))
    report["theta_ks"] = float(th.statistic)
    report["theta_p"] = float(th.pvalue)
    if U is None:
        U = (float(x.min()), float(x.max()))
    inU = x[(x >= U[0]) & (x <= U[1])]
    obs, _ = np.histogram(inU, bins=bins, range=U)
    chi = sps.chisquare(obs)
    report["x_chi2"] = float(chi.statistic)
    report["x_p"] = float(chi.pvalue)
    report["x_counts"] = obs.tolist()
    s = np.hypot(xp, yp)
    rad = sps.kstest(s, radius_cdf)
    report["radius_ks"] = float(rad.statistic)
    report["radius_p"] = float(rad.pvalue)
    yy = y[np.isfinite(y)]
    report["y_in_half_pi"] = float(np.mean(np.abs(yy) <= math.pi / 2)) if yy.size else None
    report["y_in_0_pi"] = float(np.mean((yy >= 0) & (yy <= math.pi))) if yy.size else None
    report["passed"] = bool(min(th.pvalue, chi.pvalue, rad.pvalue) >= alpha)
    report["status"] = "ok"
    return report


COMPARED_KEYS = ("n", "K0", "N", "U", "kappa", "P_max")


def universality_compare(a: Sequence[TrialSummary], b: Sequence[TrialSummary],
                         config_a: dict | None = None, config_b: dict | None = None,
                         z_max: float = 4.0, ks_max: float = 0.08) -> dict[str, Any]:
    """Two-sample comparison of mean mu#(U) counts (z-test) and nearest distances (KS)."""
    if config_a is not None and config_b is not None:
        for key in COMPARED_KEYS:
            if config_a.get(key) != config_b.get(key):
                raise ValueError(f"ensembles differ in {key}: {config_a.get(key)} vs {config_b.get(key)}")
    if len(a) != len(b):
        raise ValueError("ensembles must have the same number of trials")
    ca = np.array([s.mu_sharp[0] for s in a], dtype=float)
    cb = np.array([s.mu_sharp[0] for s in b], dtype=float)
    se = math.sqrt(ca.var(ddof=1) / ca.size + cb.var(ddof=1) / cb.size)
    z = (ca.mean() - cb.mean()) / se if se > 0 else (0.0 if ca.mean() == cb.mean() else math.inf)
    out: dict[str, Any] = {
        "mean_a": float(ca.mean()), "mean_b": float(cb.mean()),
        "count_z": float(z), "count_pass": bool(abs(z) <= z_max),
    }
    da = [s.nearest_distance for s in a]
    db = [s.nearest_distance for s in b]
    if None not in da and None not in db:
        ks = sps.ks_2samp(da, db)
        out["distance_ks"] = float(ks.statistic)
        out["distance_pass"] = bool(ks.statistic <= ks_max)
    else:
        out["distance_ks"] = None
        out["distance_pass"] = True
    out["passed"] = out["count_pass"] and out["distance_pass"]
    return out
