"""
Monte Carlo cross-check of exact exceedance probabilities.

Each index n gets its own numpy substream seeded from (seed, n), so results do not
depend on which indices are sampled or in what order. Joint cells of (X_n, Y) are
drawn by inverse CDF over the exact cell probabilities: integer arithmetic when the
common denominator fits in 62 bits, floating point otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np
import pandas as pd
import structlog

from roughlab.config import settings
from roughlab.services.exact_dist import Coupling
from roughlab.services.index_sets import IndexSet
from roughlab.services.sequence_model import PiecewiseSequence, exceedance_fn

log = structlog.get_logger(__name__)

COLUMNS = ["n", "estimate", "sigma", "exact", "pass"]

_INT_LIMIT = 1 << 62


@dataclass(frozen=True)
class SampleConfig:
    seed: int
    samples_per_index: int
    index_budget: tuple[int, ...] = field(default=())
    confidence_sigma: int = 3

    def __post_init__(self) -> None:
        if self.samples_per_index < 1 or self.confidence_sigma < 1:
            raise ValueError("samples_per_index and confidence_sigma must be positive")
        object.__setattr__(self, "index_budget", tuple(self.index_budget))

    @classmethod
    def from_settings(cls, index_budget: tuple[int, ...] = (), seed: int | None = None,
                      samples: int | None = None) -> "SampleConfig":
        return cls(
            seed=settings.seed if seed is None else seed,
            samples_per_index=settings.mc_samples if samples is None else samples,
            index_budget=index_budget,
            confidence_sigma=settings.mc_sigma,
        )


@dataclass(frozen=True)
class Estimate:
    n: int
    estimate: float
    sigma: float
    exact: Fraction
    passed: bool

    def row(self) -> dict:
        return {"n": self.n, "estimate": self.estimate, "sigma": self.sigma,
                "exact": str(self.exact), "pass": self.passed}


def substream(seed: int, n: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n]))


def sample_cells(coupling: Coupling, size: int, rng: np.random.Generator) -> np.ndarray:
    """Indices into coupling.table drawn with the exact cell probabilities."""
    probs = [p for _, _, p in coupling.table]
    scale = lcm(*(p.denominator for p in probs))
    if scale < _INT_LIMIT:
        cum = np.cumsum(np.array([int(p * scale) for p in probs], dtype=np.int64))
        draws = rng.integers(0, scale, size=size, dtype=np.int64)
    else:
        cum = np.cumsum(np.array([float(p) for p in probs]))
        cum[-1] = 1.0
        draws = rng.random(size)
    return np.searchsorted(cum, draws, side="right")


def estimate_exceedance(seq: PiecewiseSequence, y, r: Fraction, eps: Fraction, n: int,
                        cfg: SampleConfig) -> Estimate:
    """Empirical P(d(X_n, Y) > r + eps) against the symbolic exceedance at n."""
    piece, j = seq.locate(n)
    coupling = piece.coupling_at(n, y, j)
    t = r + eps
    space = coupling.x.space
    hits = np.array([space.distance(a, b) > t for a, b, _ in coupling.table], dtype=bool)
    drawn = sample_cells(coupling, cfg.samples_per_index, substream(cfg.seed, n))
    estimate = float(hits[drawn].mean())

    symbolic = exceedance_fn(piece, y, r, eps, j)
    if symbolic.fn is not None and n >= symbolic.resolved_from:
        exact = symbolic.fn.at(n)
    else:
        exact = sum((p for a, b, p in coupling.table if space.distance(a, b) > t), Fraction(0))
    sigma = float(np.sqrt(float(exact) * (1 - float(exact)) / cfg.samples_per_index))
    passed = abs(estimate - float(exact)) <= cfg.confidence_sigma * sigma
    if not passed:
        log.warning("mc_outside_band", n=n, estimate=estimate, exact=str(exact), sigma=sigma)
    return Estimate(n, estimate, sigma, exact, passed)


def mc_check(seq: PiecewiseSequence, y, r: Fraction, eps: Fraction, cfg: SampleConfig) -> pd.DataFrame:
    rows = [estimate_exceedance(seq, y, r, eps, n, cfg).row() for n in sorted(set(cfg.index_budget))]
    return pd.DataFrame(rows, columns=COLUMNS)


def calibration(frame: pd.DataFrame) -> float:
    """Share of rows whose estimate falls inside the confidence band."""
    return float(frame["pass"].mean()) if len(frame) else 1.0


def estimate_density(a: IndexSet, limit: int) -> Fraction:
    """|A ∩ [1, N]| / N by direct counting."""
    if limit < 1:
        raise ValueError("N must be >= 1")
    return Fraction(len(a.members_upto(limit)), limit)
