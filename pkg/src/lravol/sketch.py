"""Streaming union estimator over lattice-discretized polytopes.

The sketch holds a bounded multiset X of lattice points kept at a dyadic rate
p = 2^-j.  Per polytope: points covered by the body are removed (all copies),
the rate halves while p >= thresh/t, a Poisson(t*p) number of fresh samples
is drawn (re-halving whenever the capacity would overflow), and the samples
are appended as copies.  The final estimate is |X| / p.

All probabilistic removals act per copy (binomial thinning per key); the
multiset semantics is load-bearing for the distributional equivalences the
estimator relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import DegenerateInputError
from .lattice import LatticePoint, generate_samples
from .polytope import Prepared, contains_many

EPS_PRIME_DIV = 12.0  # eps' = eps / 12
ETA_DIV = 8.0         # precision selection runs at eta = eps / 8


def thresh(eps: float, delta: float, m: int) -> float:
    """Sketch capacity max(24 ln(24/d) / ((1-e')e'^2), 6 (ln(6/d) + ln m)).

    e' = eps/12; note the first term uses delta itself, not delta' = delta/2m.
    """
    if not (0.0 < eps <= 1.0) or not (0.0 < delta <= 1.0):
        raise ValueError("eps and delta must lie in (0, 1]")
    if m < 1:
        raise ValueError("m must be >= 1")
    eps_p = eps / EPS_PRIME_DIV
    term1 = 24.0 * math.log(24.0 / delta) / ((1.0 - eps_p) * eps_p * eps_p)
    term2 = 6.0 * (math.log(6.0 / delta) + math.log(m))
    return max(term1, term2)


def poisson(lam: float, rng) -> int:
    """Exact Poisson draw: sequential-search inversion for lam <= 10,
    Hormann's transformed rejection (PTRS) above."""
    if lam < 0.0 or not math.isfinite(lam):
        raise ValueError("lambda must be finite and >= 0")
    if lam == 0.0:
        return 0
    if lam <= 10.0:
        p = math.exp(-lam)
        cum = p
        k = 0
        u = rng.random()
        while u > cum:
            k += 1
            p *= lam / k
            cum += p
            if k > 2000:  # float underflow guard; unreachable for lam <= 10
                break
        return k
    # PTRS
    b = 0.931 + 2.53 * math.sqrt(lam)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    log_lam = math.log(lam)
    while True:
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        k = int(math.floor((2.0 * a / us + b) * u + lam + 0.43))
        if us >= 0.07 and v <= v_r:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v * inv_alpha / (a / (us * us) + b))
                <= k * log_lam - lam - math.lgamma(k + 1.0)):
            return k


@dataclass
class Sketch:
    thresh: float
    preci: int
    m: int
    rng: object                      # stream for Poisson draws and thinning
    counts: dict[LatticePoint, int] = field(default_factory=dict)
    j: int = 0                       # p = 2^-j, exact exponent arithmetic
    size: int = 0                    # total copy count
    trace: list[dict] = field(default_factory=list)

    @property
    def p(self) -> float:
        return 2.0 ** (-self.j)

    def _halve(self):
        """Halve the rate; keep each copy independently with probability 1/2."""
        self.j += 1
        new_counts = {}
        new_size = 0
        for key in sorted(self.counts, key=lambda lp: lp.k):
            kept = int(self.rng.binomial(self.counts[key], 0.5))
            if kept:
                new_counts[key] = kept
                new_size += kept
        self.counts = new_counts
        self.size = new_size

    def _remove_covered(self, prep: Prepared, tol: Tolerances):
        """Drop every copy of every key inside the polytope."""
        if not self.counts:
            return
        keys = list(self.counts.keys())
        pts = np.array([k.k for k in keys], dtype=float) / 10.0**self.preci
        inside = contains_many(prep.poly, pts, tol)
        for key, hit in zip(keys, inside):
            if hit:
                self.size -= self.counts.pop(key)

    def process_polytope(self, prep: Prepared, t: float, sample_rng,
                         tol: Tolerances = DEFAULT_TOL) -> dict:
        """One sketch update per Alg-style step ordering; returns the trace entry.

        t = 0 flags a degenerate/empty body: the whole step is skipped,
        removal included (a measure-zero body is deliberately not allowed to
        delete boundary keys).
        """
        if t < 0.0:
            raise ValueError("volume must be >= 0")
        n_drawn = 0
        if t > 0.0:
            self._remove_covered(prep, tol)
            while t * self.p >= self.thresh:
                self._halve()
            n_drawn = poisson(t * self.p, self.rng)
            while n_drawn + self.size > self.thresh:
                self._halve()
                n_drawn = poisson(t * self.p, self.rng)
            if n_drawn:
                for pt in generate_samples(prep, n_drawn, self.preci, sample_rng, tol):
                    self.counts[pt] = self.counts.get(pt, 0) + 1
                self.size += n_drawn
        if self.size > self.thresh:
            raise AssertionError("sketch exceeded its capacity")
        entry = {"t": t, "n_sampled": n_drawn, "size": self.size, "p_exp": self.j}
        self.trace.append(entry)
        return entry

    def estimate(self) -> float:
        return self.size * 2.0**self.j


def estimate_union(preps: list[Prepared], volumes: list[float], eps: float,
                   delta: float, preci: int, seed: int,
                   tol: Tolerances = DEFAULT_TOL,
                   on_polytope: Optional[Callable[[int, dict], None]] = None) -> tuple[float, Sketch]:
    """Run the sketch over prepared polytopes with precomputed volumes.

    Processing order is list order; draws are deterministic given the seed
    (the sketch stream is separate from the per-polytope sampler streams).
    """
    m = len(preps)
    if m == 0:
        raise ValueError("no polytopes")
    if len(volumes) != m:
        raise ValueError("volumes and polytopes differ in length")
    sk = Sketch(thresh=thresh(eps, delta, m), preci=preci, m=m,
                rng=np.random.default_rng(np.random.SeedSequence([seed, 3, 0])))
    for i, (prep, t) in enumerate(zip(preps, volumes)):
        srng = np.random.default_rng(np.random.SeedSequence([seed, 2, i]))
        entry = sk.process_polytope(prep, t, srng, tol)
        if on_polytope is not None:
            on_polytope(i, entry)
    return sk.estimate(), sk
