"""Precision selection and lattice-point sampling.

Work happens on the scaled integer grid 10^-preci * Z^n.  The precision is
chosen so every polytope in the union holds an inscribed ball that is large
*in lattice units*: gamma = (16 n / eta) * sqrt(log(4 r / eta)) with r the
total facet count, and preci = ceil(log10(max_i gamma / gamma_hat_i)),
clamped to >= 0 and capped at 18 so integer keys stay in 64-bit range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import DegenerateInputError, LatticeTooCoarseError, PrecisionOverflowError
from .polytope import Prepared, contains_many
from .volume import BatchWalker

PRECI_CAP = 18
_LOG = {"e": math.log, "2": math.log2, "10": math.log10}


@dataclass(frozen=True)
class LatticePoint:
    """Grid point k * 10^-preci; equality and hashing use the integers only."""

    k: tuple[int, ...]
    preci: int = field(compare=False)

    def embedding(self) -> np.ndarray:
        return np.asarray(self.k, dtype=float) / 10.0**self.preci


@dataclass
class PrecisionReport:
    preci: int
    gamma: float
    gamma_hats: list[float]
    max_ratio: float
    facet_total: int
    eta: float
    log_base: str = "e"


def get_precision(preps: list[Prepared], eta: float, log_base: str = "e") -> PrecisionReport:
    """Pick the shared lattice precision for a union of prepared polytopes.

    gamma is loop-invariant, so it is computed once.  The natural-log default
    is overridable (`log_base`) because the underlying bound leaves the base
    unspecified.
    """
    if not (0.0 < eta <= 1.0):
        raise ValueError("eta must lie in (0, 1]")
    if not preps:
        raise ValueError("need at least one polytope")
    log = _LOG[log_base]
    n = preps[0].poly.dim
    facet_total = sum(p.poly.facets for p in preps)
    gamma = (16.0 * n / eta) * math.sqrt(log(4.0 * facet_total / eta))
    gamma_hats = []
    max_ratio = 1.0
    for p in preps:
        if p.radius <= 0.0:
            raise DegenerateInputError(
                "get_precision requires non-degenerate polytopes")
        gamma_hats.append(p.radius)
        max_ratio = max(max_ratio, gamma / p.radius)
    preci = max(0, math.ceil(math.log10(max_ratio)))
    if preci > PRECI_CAP:
        raise PrecisionOverflowError(
            f"precision {preci} exceeds cap {PRECI_CAP}; lattice keys would "
            "overflow 64-bit coordinates (an exact-integer build would be needed)")
    return PrecisionReport(preci, gamma, gamma_hats, max_ratio, facet_total, eta, log_base)


def round_to_lattice(x, preci: int, rng) -> LatticePoint:
    """Randomized rounding, unbiased per coordinate.

    With s = x_j * 10^preci and f = s - floor(s), the coordinate rounds up
    with probability f, so E[k_j * 10^-preci] = x_j and the shift never
    exceeds one cell.
    """
    s = np.asarray(x, dtype=float) * 10.0**preci
    base = np.floor(s)
    up = rng.random(s.shape[0]) < (s - base)
    k = (base + up).astype(np.int64)
    return LatticePoint(tuple(int(v) for v in k), preci)


def _round_batch(pts, preci, rng):
    s = pts * 10.0**preci
    base = np.floor(s)
    up = rng.random(pts.shape) < (s - base)
    return (base + up).astype(np.int64)


def generate_samples(prep: Prepared, N: int, preci: int, rng,
                     tol: Tolerances = DEFAULT_TOL, walkers: int = 256) -> list[LatticePoint]:
    """Draw N lattice points from poly ∩ grid, approximately uniformly.

    Each sample is an n-step hit-and-run continuous point, randomized-rounded
    onto the grid and accepted when the embedding stays inside the polytope;
    rounding is retried up to 8 times, after which the chain simply keeps
    walking.  Samples are drawn with replacement.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    if prep.status != "ok":
        raise DegenerateInputError(f"cannot sample a {prep.status} polytope")
    if N == 0:
        return []
    poly = prep.poly
    n = poly.dim
    W = min(max(1, N), walkers)
    walker = BatchWalker(poly.A, poly.b, prep.center, n, W, rng)
    scale = 10.0**preci
    out: list[LatticePoint] = []
    attempts = accepts = 0
    while len(out) < N:
        walker.run_rounds(1)
        pts = walker.X.T.copy()  # (W, n) continuous samples
        pending = np.arange(W)
        chosen = np.zeros((W, n), dtype=np.int64)
        delivered = np.zeros(W, dtype=bool)
        for _ in range(8):
            if pending.size == 0:
                break
            k = _round_batch(pts[pending], preci, rng)
            ok = contains_many(poly, k.astype(float) / scale, tol)
            attempts += pending.size
            accepts += int(ok.sum())
            got = pending[ok]
            chosen[got] = k[ok]
            delivered[got] = True
            pending = pending[~ok]
            if attempts >= 1000:
                if accepts < 0.01 * attempts:
                    raise LatticeTooCoarseError(
                        f"rounding acceptance {accepts}/{attempts}: lattice too "
                        "coarse for body (precision underestimated)")
                attempts = accepts = 0
        for w in range(W):
            if delivered[w]:
                out.append(LatticePoint(tuple(int(v) for v in chosen[w]), preci))
                if len(out) == N:
                    break
    return out
