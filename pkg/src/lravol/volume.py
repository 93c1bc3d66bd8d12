"""Multiphase Monte Carlo volume of one convex polytope.

The body is translated so its Chebyshev center sits at the origin, then
sandwiched between the inscribed ball and a circumscribing ball read off the
bounding box.  Each annealing phase grows the ball radius by 2^(1/n) (ball
volume doubles) and estimates the shrink ratio vol(K_{i-1})/vol(K_i) from
hit-and-run samples in K_i.  Sample counts per phase start at ceil(400/eps^2)
and double until the running ratio stops moving; walk length is n steps per
delivered sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import walk_batch
from .config import DEFAULT_TOL, Tolerances
from .errors import DegenerateInputError, SamplerPinchError, VolumeConvergenceError
from .polytope import Polytope, Prepared, STATUS_OK, prepare

MAX_DOUBLINGS = 6
_WALKERS = 512
_CHUNK_STEPS = 2048  # per kernel call, bounds the uniform-buffer size


@dataclass
class VolumeEstimate:
    value: float
    phases: int
    samples_per_phase: int
    converged: bool = True


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def hit_and_run_step(poly, x, rng, ball_radius=None, direction=None,
                     tol: Tolerances = DEFAULT_TOL):
    """One hit-and-run step in poly ∩ ball(0, ball_radius); either part optional.

    Chooses a uniform direction on the unit sphere, intersects the chord with
    every facet (and the ball quadratic when present) and returns a uniform
    point on it.  Chords shorter than the pinch tolerance trigger a direction
    resample, at most 100 times.
    """
    if poly is None and ball_radius is None:
        raise ValueError("need a polytope or a ball")
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    for _ in range(100):
        if direction is None:
            d = rng.standard_normal(n)
            norm = np.linalg.norm(d)
            if norm == 0.0:
                continue
            d /= norm
        else:
            d = np.asarray(direction, dtype=float)
            d = d / np.linalg.norm(d)
        lo, hi = -math.inf, math.inf
        if ball_radius is not None:
            xd = float(x @ d)
            disc = xd * xd - (float(x @ x) - ball_radius * ball_radius)
            if disc < 0.0:
                disc = 0.0
            sq = math.sqrt(disc)
            lo, hi = -xd - sq, -xd + sq
        if poly is not None:
            ad = poly.A @ d
            slack = poly.b - poly.A @ x
            pos = ad > 1e-300
            neg = ad < -1e-300
            if pos.any():
                hi = min(hi, float(np.min(slack[pos] / ad[pos])))
            if neg.any():
                lo = max(lo, float(np.max(slack[neg] / ad[neg])))
        lo, hi = min(lo, 0.0), max(hi, 0.0)
        if hi - lo >= tol.chord_min:
            return x + (lo + rng.random() * (hi - lo)) * d
        if direction is not None:
            break
    raise SamplerPinchError("no usable chord after 100 direction resamples")


class BatchWalker:
    """W persistent chains in a fixed body, advanced n steps per sample."""

    def __init__(self, A, b, start, walk_len, walkers, rng, ball_radius=None):
        self.A = np.ascontiguousarray(A, dtype=float)
        self.b = np.ascontiguousarray(b, dtype=float)
        self.walk_len = walk_len
        self.rng = rng
        self.W = walkers
        self.X = np.ascontiguousarray(
            np.repeat(np.asarray(start, float)[:, None], walkers, axis=1))
        self.AX = self.A @ self.X
        self.ball_radius = ball_radius

    def set_ball(self, radius):
        self.ball_radius = radius

    def run_rounds(self, rounds, r_in=0.0):
        """Deliver rounds*W samples; returns hits within ball(0, r_in)."""
        n = self.X.shape[0]
        r_out2 = -1.0 if self.ball_radius is None else self.ball_radius ** 2
        r_in2 = r_in * r_in
        hits = 0
        todo = rounds * self.walk_len
        max_rounds = max(1, _CHUNK_STEPS // self.walk_len)
        while todo > 0:
            steps = min(todo, max_rounds * self.walk_len)
            dirs = self.rng.standard_normal((steps, n))
            dirs /= np.linalg.norm(dirs, axis=1)[:, None]
            unifs = self.rng.random((steps, self.W))
            hits += walk_batch(self.A, self.b, self.X, self.AX, dirs, unifs,
                               r_out2, r_in2, self.walk_len)
            self.AX = self.A @ self.X  # kill incremental drift
            todo -= steps
        return hits


def _phase_count(n, r, R):
    l = 0
    while r * 2.0 ** (l / n) < R:
        l += 1
    return l


def compute_volume(poly, eps: float, delta: float, rng,
                   tol: Tolerances = DEFAULT_TOL, walkers: int = _WALKERS) -> VolumeEstimate:
    """Estimate vol(poly) for a preprocessed, non-degenerate, bounded body.

    `delta` is recorded by callers for bookkeeping but does not steer the
    schedule; the doubling convergence criterion governs the run length.
    Deterministic given the rng state.
    """
    if not (0.0 < eps <= 1.0) or not (0.0 < delta <= 1.0):
        raise ValueError("eps and delta must lie in (0, 1]")
    prep = poly if isinstance(poly, Prepared) else prepare(poly, tol)
    if prep.status != STATUS_OK:
        raise DegenerateInputError(f"cannot sample a {prep.status} polytope")
    n = prep.poly.dim
    r = prep.radius
    center = prep.center
    # circumradius bound: farthest bounding-box corner from the center
    span = np.maximum(np.abs(prep.lo - center), np.abs(prep.hi - center))
    R = float(np.linalg.norm(span))
    phases = _phase_count(n, r, R)
    b_shift = prep.poly.b - prep.poly.A @ center

    base = int(math.ceil(400.0 / (eps * eps)))
    walker = BatchWalker(prep.poly.A, b_shift, np.zeros(n), n, walkers, rng)
    move_tol = eps / (2.0 * phases) if phases else math.inf
    ratios = []
    max_samples = 0

    def current_value():
        v = unit_ball_volume(n) * r**n
        for q in ratios:
            v /= q
        return v

    for i in range(1, phases + 1):
        r_out = r * 2.0 ** (i / n)
        r_in = r * 2.0 ** ((i - 1) / n)
        walker.set_ball(r_out)
        rounds0 = max(1, math.ceil(base / walkers))
        hits = walker.run_rounds(rounds0, r_in)
        delivered = rounds0 * walkers
        est = hits / delivered
        converged = False
        for _ in range(MAX_DOUBLINGS):
            rounds = max(1, math.ceil(delivered / walkers))
            hits += walker.run_rounds(rounds, r_in)
            delivered += rounds * walkers
            new_est = hits / delivered
            moved = abs(new_est - est)
            est = new_est
            if moved < move_tol:
                converged = True
                break
        max_samples = max(max_samples, delivered)
        if est <= 0.0:
            raise VolumeConvergenceError(
                f"phase {i}/{phases}: no samples landed in the inner body",
                VolumeEstimate(current_value(), phases, max_samples, False))
        if not converged:
            ratios.append(est)
            raise VolumeConvergenceError(
                f"phase {i}/{phases}: ratio still moving after {MAX_DOUBLINGS} doublings",
                VolumeEstimate(current_value(), phases, max_samples, False))
        ratios.append(est)
        _assert_inside(walker, b_shift, r_out, tol)

    return VolumeEstimate(current_value(), phases, max_samples, True)


def _assert_inside(walker, b_shift, r_out, tol):
    slack = b_shift + tol.contains_tol * (1.0 + np.abs(b_shift))
    if not np.all(walker.AX <= slack[:, None]):
        raise AssertionError("chain left the polytope")
    norms2 = np.sum(walker.X * walker.X, axis=0)
    if not np.all(norms2 <= r_out * r_out * (1.0 + 1e-9) + 1e-12):
        raise AssertionError("chain left the phase ball")
