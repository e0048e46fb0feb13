"""Experiment configs, the per-trial pipeline and parallel execution."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .field import KacPolynomial, batch_eval_grid, check_event_G
from .gauss import (DomainSpec, covariance_single, gaussian_mc_probability, gaussian_prob_closed_form,
                    min_eigenvalue_diagnostic, sigma0)
from .grid import SampleGrid, bad_arc_fraction, build_grid, desk_grid_size
from .linearize import build_mu, linearized_events, separation_audit
from .roots import RootFindingError, build_nu, find_all_roots, nearest_distance
from .sampler import CoefficientLaw, SeedSpec, draw_coefficients
from .stats import (TrialSummary, agreement_rate, empirical_factorial_moments, extended_intensity_check,
                    flat_mass_rate, ks_exponential, universality_compare)

log = logging.getLogger(__name__)

KINDS = ("mu-poisson", "nu-poisson", "mu-nu-compare", "covariance", "gauss-oracle",
         "universality", "extended-intensity", "separation-audit")
TRIAL_KINDS = ("mu-poisson", "nu-poisson", "mu-nu-compare", "universality",
               "extended-intensity", "separation-audit")
ROOT_KINDS = ("nu-poisson", "mu-nu-compare", "universality")
SIGNS = {"outward": 1, "inward": -1}
MAX_GATE_FAILURES = 0.01
RUNTIME_KEYS = ("workers", "out", "csv", "roots_csv", "plots")


class ConfigError(ValueError):
    pass


class RunAborted(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    kind: str = "mu-poisson"
    n: int = 1024
    K0: float = 2.0
    N_override: int | str | None = None   # integer, "desk", or None for the natural size
    kappa: float = 0.1
    P_max: int = 4
    law: str = "gaussian"
    law_params: list[float] = field(default_factory=list)
    law_b: str = "rademacher"             # second ensemble for universality
    U: list[list[float]] = field(default_factory=lambda: [[-3.0, 3.0]])
    M: int = 100
    master_seed: int = 20240101
    workers: int = 1
    max_k: int = 2
    sign_convention: str = "outward"
    extended: bool = False
    # covariance
    t: float = math.pi / 2
    # gauss-oracle
    V: list[float] = field(default_factory=lambda: [-math.pi / 2, math.pi / 2])
    r_values: list[float] = field(default_factory=lambda: [0.2, 1.0, math.inf])
    N_oracle: int = 10_000
    n_oracle: int = 100
    mc_samples: int = 1_000_000
    # outputs
    out: str | None = None
    csv: str | None = None
    roots_csv: str | None = None
    plots: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.n < 16:
            raise ConfigError("n must be at least 16")
        if self.M < 1 and self.kind in TRIAL_KINDS:
            raise ConfigError("need at least one trial")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.max_k < 1:
            raise ConfigError("max_k must be at least 1")
        if self.sign_convention not in SIGNS:
            raise ConfigError(f"sign_convention must be one of {sorted(SIGNS)}")
        if not self.U or any(len(u) != 2 or u[0] > u[1] for u in self.U):
            raise ConfigError("U must be a nonempty list of [lo, hi] pairs")
        if isinstance(self.N_override, str) and self.N_override != "desk":
            raise ConfigError("N_override must be an integer, 'desk' or null")
        CoefficientLaw.from_name(self.law, self.law_params or None)
        if self.kind == "universality":
            CoefficientLaw.from_name(self.law_b)
        if self.kind in TRIAL_KINDS:
            # builds nothing heavy; raises for N < 4n without override
            if self.grid_N() is None:
                from .grid import natural_grid_size
                if natural_grid_size(self.n, self.K0) < 4 * self.n:
                    raise ConfigError("natural grid size below 4n; set N_override")
        for p in (self.out, self.csv, self.roots_csv, self.plots):
            if p is not None:
                parent = Path(p).resolve().parent
                if not parent.is_dir() or not os.access(parent, os.W_OK):
                    raise ConfigError(f"output path not writable: {p}")
        return self

    def grid_N(self) -> int | None:
        if self.N_override == "desk":
            return desk_grid_size(self.n)
        return None if self.N_override is None else int(self.N_override)

    def echo(self) -> dict[str, Any]:
        """Every key that can change results; worker count and output paths cannot."""
        d = asdict(self)
        for k in RUNTIME_KEYS:
            d.pop(k)
        d["r_values"] = [str(r) if math.isinf(r) else r for r in self.r_values]
        return d

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.echo(), sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        bad = set(d) - names
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
        d = dict(d)
        if "r_values" in d:
            d["r_values"] = [float(r) for r in d["r_values"]]
        if "U" in d and d["U"] and not isinstance(d["U"][0], (list, tuple)):
            d["U"] = [list(d["U"])]
        return cls(**d)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ExperimentConfig":
        with open(path) as fh:
            d = yaml.safe_load(fh) or {}
        if not isinstance(d, dict):
            raise ConfigError("config file must be a flat mapping")
        return cls.from_dict(d)


@dataclass
class TrialOutput:
    summary: TrialSummary | None
    extended: np.ndarray | None = None
    roots: np.ndarray | None = None
    residuals: np.ndarray | None = None
    gate_failure: float | None = None


# per-process grid cache, keyed by grid parameters
_GRIDS: dict[tuple, SampleGrid] = {}


def _grid(cfg: ExperimentConfig) -> SampleGrid:
    key = (cfg.n, cfg.K0, cfg.kappa, cfg.P_max, cfg.grid_N())
    if key not in _GRIDS:
        _GRIDS.clear()
        _GRIDS[key] = build_grid(cfg.n, cfg.K0, cfg.kappa, cfg.P_max, cfg.grid_N())
    return _GRIDS[key]


def run_trial(cfg: ExperimentConfig, trial_index: int, law_name: str | None = None,
              seed_offset: int = 0) -> TrialOutput:
    """Full pipeline for one polynomial: grid samples, mu, and roots/nu when needed."""
    law = CoefficientLaw.from_name(law_name or cfg.law, None if law_name else (cfg.law_params or None))
    grid = _grid(cfg)
    U = [tuple(u) for u in cfg.U]
    xi = draw_coefficients(law, cfg.n, SeedSpec(cfg.master_seed + seed_offset, trial_index))
    poly = KacPolynomial(xi)
    samples = batch_eval_grid(poly, grid)
    ev = linearized_events(poly, grid, samples)
    mu_s, mu_f = build_mu(poly, grid, ev)
    audit = separation_audit(ev)
    G = check_event_G(poly)
    summary = TrialSummary(
        trial_index=trial_index,
        mu_sharp=[mu_s.count(u) for u in U],
        mu_flat=[mu_f.count(u) for u in U],
        mu_flat_total=len(mu_f),
        G_passed=G.passed,
        mu_sharp_total=len(mu_s),
        separation_violations=audit.violations,
        adjacent_pairs=audit.adjacent_pairs,
    )
    out = TrialOutput(summary, extended=mu_s.extended if cfg.extended else None)
    if cfg.kind not in ROOT_KINDS:
        return out
    try:
        rs = find_all_roots(xi)
    except RootFindingError as e:
        return TrialOutput(None, gate_failure=e.worst_residual)
    nu_s, nu_f = build_nu(rs, grid, samples, sign=SIGNS[cfg.sign_convention])
    summary.nu_sharp = [nu_s.count(u) for u in U]
    summary.nu_flat = [nu_f.count(u) for u in U]
    summary.nu_flat_total = len(nu_f)
    summary.nearest_distance = nearest_distance(rs, cfg.n)
    summary.max_residual = rs.max_residual
    if cfg.roots_csv:
        out.roots, out.residuals = rs.roots, rs.residuals
    return out


def _run_chunk(args) -> list[TrialOutput]:
    cfg, indices, law_name, offset = args
    return [run_trial(cfg, i, law_name, offset) for i in indices]


def run_trials(cfg: ExperimentConfig, law_name: str | None = None, seed_offset: int = 0) -> list[TrialOutput]:
    """All M trials, in trial-index order, whatever the worker count."""
    idx = list(range(cfg.M))
    if cfg.workers == 1:
        return _run_chunk((cfg, idx, law_name, seed_offset))
    # static interleaved partition, reassembled by index
    parts = [idx[w::cfg.workers] for w in range(cfg.workers)]
    with ProcessPoolExecutor(cfg.workers) as ex:
        chunks = list(ex.map(_run_chunk, [(cfg, p, law_name, seed_offset) for p in parts]))
    out: list[TrialOutput | None] = [None] * cfg.M
    for p, ch in zip(parts, chunks):
        for i, o in zip(p, ch):
            out[i] = o
    return out  # type: ignore[return-value]


def _split(outputs: list[TrialOutput], cfg: ExperimentConfig):
    kept = [o for o in outputs if o.summary is not None]
    excluded = [i for i, o in enumerate(outputs) if o.summary is None]
    for i in excluded:
        log.warning("trial %d excluded: root residual %.3g above gate", i, outputs[i].gate_failure)
    if cfg.kind in ROOT_KINDS and len(excluded) > MAX_GATE_FAILURES * len(outputs):
        raise RunAborted(f"{len(excluded)} of {len(outputs)} trials failed the root-finder gate")
    return kept, excluded


def _moments(counts, k_max, U_len) -> list[dict]:
    return [asdict(empirical_factorial_moments(counts, k, U_len)) for k in range(1, k_max + 1)] \
        if len(counts) >= 2 else []


def aggregate(summaries: list[TrialSummary], cfg: ExperimentConfig) -> dict[str, Any]:
    """Aggregate reports recomputable from per-trial summaries."""
    agg: dict[str, Any] = {"trials": len(summaries)}
    G = [s for s in summaries if s.G_passed]
    agg["G_pass_rate"] = len(G) / len(summaries) if summaries else None
    agg["separation_violations_G"] = int(sum(s.separation_violations for s in G))
    agg["adjacent_pairs_G"] = int(sum(s.adjacent_pairs for s in G))
    mu_rate, nu_rate = flat_mass_rate(summaries)
    agg["mu_flat_rate"], agg["nu_flat_rate"] = mu_rate, nu_rate
    per_U = []
    for j, u in enumerate(cfg.U):
        L = u[1] - u[0]
        row: dict[str, Any] = {"U": list(u),
                               "mu_sharp_moments": _moments([s.mu_sharp[j] for s in summaries], cfg.max_k, L)}
        if summaries and summaries[0].nu_sharp is not None:
            row["nu_sharp_moments"] = _moments([s.nu_sharp[j] for s in summaries], cfg.max_k, L)
            row["agreement_rate"] = float(np.mean([s.mu_sharp[j] == s.nu_sharp[j] for s in summaries]))
        per_U.append(row)
    agg["intervals"] = per_U
    if summaries and summaries[0].nu_sharp is not None:
        agg["agreement_rate"] = agreement_rate(summaries)
        nd = [s.nearest_distance for s in summaries]
        agg["nearest_ks"] = ks_exponential(nd)
        agg["nearest_mean"] = float(np.mean(nd))
        agg["max_residual"] = float(max(s.max_residual for s in summaries))
    return agg


@dataclass
class RunResult:
    config: dict[str, Any]
    config_hash: str
    version: str
    aggregates: dict[str, Any]
    trials: list[dict[str, Any]] | None = None
    excluded_trials: list[int] = field(default_factory=list)
    wall_time: float = 0.0

    def to_json(self, with_wall_time: bool = True) -> str:
        d = asdict(self)
        if not with_wall_time:
            d.pop("wall_time")
        return json.dumps(_clean(d), indent=1, sort_keys=True)


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _covariance(cfg: ExperimentConfig) -> dict[str, Any]:
    S = covariance_single(cfg.t, cfg.n)
    S0 = sigma0()
    return {"t": cfg.t, "Sigma_t": S.tolist(), "Sigma0": S0.tolist(),
            "max_entry_deviation": float(np.abs(S - S0).max()),
            "min_eigenvalue": float(min_eigenvalue_diagnostic([cfg.t], cfg.n))}


def _gauss_oracle(cfg: ExperimentConfig) -> dict[str, Any]:
    doms = [DomainSpec(tuple(u), tuple(cfg.V), r, cfg.N_oracle, cfg.n_oracle)
            for u in cfg.U for r in cfg.r_values]
    est = gaussian_mc_probability(doms, cfg.mc_samples, SeedSpec(cfg.master_seed, 0))
    rows = []
    for D, e in zip(doms, est):
        cf = gaussian_prob_closed_form(D)
        rows.append({"U": list(D.U), "r": D.r, "closed_form": cf, "mc": e.value, "std_error": e.std_error,
                     "z": (e.value - cf) / e.std_error if e.std_error > 0 else math.inf})
    return {"domains": rows, "samples": cfg.mc_samples}


def run(cfg: ExperimentConfig, keep_trials: bool = True) -> tuple[RunResult, list[TrialOutput]]:
    """Execute one experiment. Returns the result and the raw trial outputs."""
    cfg.validate()
    t0 = time.perf_counter()
    outputs: list[TrialOutput] = []
    trials = None
    excluded: list[int] = []
    if cfg.kind == "covariance":
        agg = _covariance(cfg)
    elif cfg.kind == "gauss-oracle":
        agg = _gauss_oracle(cfg)
    else:
        grid = _grid(cfg)
        outputs = run_trials(cfg)
        kept, excluded = _split(outputs, cfg)
        summaries = [o.summary for o in kept]
        agg = aggregate(summaries, cfg)
        agg["grid"] = {"N": grid.N, "bad_arc_fraction": bad_arc_fraction(grid)}
        if cfg.kind == "extended-intensity" or cfg.extended:
            marks = np.concatenate([o.extended for o in kept]) if kept else np.empty((0, 5))
            agg["extended_intensity"] = extended_intensity_check(marks, tuple(cfg.U[0]))
        if cfg.kind == "universality":
            other = run_trials(cfg, law_name=cfg.law_b, seed_offset=1)
            kept_b, excl_b = _split(other, cfg)
            sb = [o.summary for o in kept_b]
            m = min(len(summaries), len(sb))
            agg["ensemble_b"] = aggregate(sb, cfg)
            agg["comparison"] = universality_compare(summaries[:m], sb[:m])
            agg["excluded_b"] = excl_b
        if keep_trials:
            trials = [s.to_dict() for s in summaries]
    res = RunResult(cfg.echo(), cfg.hash(), __version__, agg, trials, excluded, time.perf_counter() - t0)
    return res, outputs


def write_outputs(cfg: ExperimentConfig, res: RunResult, outputs: list[TrialOutput]) -> None:
    if cfg.out:
        Path(cfg.out).write_text(res.to_json())
    if cfg.csv and res.trials:
        _write_trial_csv(cfg.csv, res)
    if cfg.roots_csv:
        with open(cfg.roots_csv, "w", newline="") as fh:
            fh.write(f"# config_hash {res.config_hash}\n")
            w = csv.writer(fh)
            w.writerow(["trial", "re", "im", "residual"])
            for i, o in enumerate(outputs):
                if o.roots is None:
                    continue
                for z, r in zip(o.roots, o.residuals):
                    w.writerow([i, repr(float(z.real)), repr(float(z.imag)), repr(float(r))])
    if cfg.plots:
        from .plots import write_plots
        write_plots(cfg.plots, res, outputs)


def _write_trial_csv(path: str, res: RunResult) -> None:
    rows = res.trials or []
    cols = [k for k in rows[0] if k not in ("mu_sharp", "mu_flat", "nu_sharp", "nu_flat")]
    nU = len(rows[0]["mu_sharp"])
    lists = [k for k in ("mu_sharp", "mu_flat", "nu_sharp", "nu_flat") if rows[0].get(k) is not None]
    header = cols + [f"{k}_{j}" for k in lists for j in range(nU)]
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash {res.config_hash}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([r[c] for c in cols] + [r[k][j] for k in lists for j in range(nU)])
