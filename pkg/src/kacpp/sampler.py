"""Seeded coefficient laws.

Every stream is a Philox counter-based generator keyed by the master seed; the
trial index occupies the top word of the 256-bit counter, so two trials never
touch the same counter block and results do not depend on execution order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_SQRT3 = math.sqrt(3.0)
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if not 0 <= self.trial_index <= _MASK64:
            raise ValueError("trial_index must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class CoefficientLaw:
    """Mean-zero, unit-variance law for the coefficients.

    ``kind`` is one of ``gaussian``, ``rademacher``, ``uniform`` (uniform on
    [-sqrt 3, sqrt 3]) or ``discrete`` (``values``/``probs`` required).
    """

    kind: str = "gaussian"
    values: tuple[float, ...] = field(default=())
    probs: tuple[float, ...] = field(default=())

    KINDS = ("gaussian", "rademacher", "uniform", "discrete")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown coefficient law {self.kind!r}")
        if self.kind == "discrete":
            v = np.asarray(self.values, dtype=float)
            p = np.asarray(self.probs, dtype=float)
            if v.shape != p.shape or v.ndim != 1:
                raise ValueError("discrete law needs equally long values and probs")
            if np.any(p < 0):
                raise ValueError("negative probability")
            support = np.unique(v[p > 0])
            tol = 1e-12
            if abs(p.sum() - 1) > tol:
                raise ValueError("probabilities must sum to 1")
            if abs(p @ v) > tol:
                raise ValueError("discrete law must have mean 0")
            if abs(p @ v**2 - 1) > tol:
                raise ValueError("discrete law must have variance 1")
            if support.size < 2:
                raise ValueError("degenerate discrete law")
        elif self.values or self.probs:
            raise ValueError(f"law {self.kind!r} takes no parameters")

    @classmethod
    def from_name(cls, name: str, params: Sequence[float] | None = None) -> "CoefficientLaw":
        """Build a law from a config name; ``discrete`` takes ``v1, p1, v2, p2, ...``."""
        name = name.lower()
        if name == "discrete":
            params = list(params or [])
            if len(params) % 2:
                raise ValueError("discrete law parameters come in (value, prob) pairs")
            return cls("discrete", tuple(params[0::2]), tuple(params[1::2]))
        return cls(name)

    @property
    def fourth_moment(self) -> float:
        if self.kind == "gaussian":
            return 3.0
        if self.kind == "rademacher":
            return 1.0
        if self.kind == "uniform":
            return 9.0 / 5.0
        v = np.asarray(self.values)
        return float(np.asarray(self.probs) @ v**4)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "rademacher":
            return 2.0 * rng.integers(0, 2, size).astype(float) - 1.0
        if self.kind == "uniform":
            return rng.uniform(-_SQRT3, _SQRT3, size)
        return rng.choice(np.asarray(self.values, float), size=size, p=np.asarray(self.probs))


def make_bitgen(seed: SeedSpec, stream: int = 0) -> np.random.Philox:
    """Philox generator for one trial. ``stream`` separates independent uses within a trial."""
    return np.random.Philox(key=seed.master_seed, counter=[0, 0, stream, seed.trial_index])


def make_rng(seed: SeedSpec, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(make_bitgen(seed, stream))


def draw_coefficients(law: CoefficientLaw, n: int, seed: SeedSpec) -> np.ndarray:
    """Return (xi_0, ..., xi_n), i.i.d. from ``law``; a pure function of (law, n, seed)."""
    if n < 1:
        raise ValueError("degree must be at least 1")
    return law.sample(make_rng(seed), n + 1)
