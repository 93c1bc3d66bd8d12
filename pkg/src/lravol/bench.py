"""Synthetic benchmark generation and independent ground-truth oracles.

Instances are disjunctions of m rotated boxes or simplices; consecutive
bodies are placed half a diameter apart so they overlap about half the time.
The exact box-union oracle (inclusion-exclusion) and a plain grid Monte Carlo
oracle back the error metric |b - s| / b in the experiments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .polytope import Polytope, bounding_box, contains_many

_SHAPES = ("cube", "simplex")


@dataclass(frozen=True)
class BenchSpec:
    n: int
    m: int
    shape: str = "cube"
    seed: int = 0
    axis_aligned: bool = False  # debug mode: skip rotations (box oracle applies)
    scale: float = 1.0          # multiplies side lengths and translations

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("need n >= 1 and m >= 1")
        if self.shape not in _SHAPES:
            raise ValueError(f"shape must be one of {_SHAPES}")


@dataclass
class GeneratedInstance:
    text: str
    polytopes: list[Polytope]
    boxes: Optional[list[tuple[np.ndarray, np.ndarray]]]  # axis-aligned cubes only


def _random_rotation(n, rng):
    """Product of n random Givens rotations."""
    R = np.eye(n)
    if n == 1:
        return R
    for _ in range(n):
        i, j = rng.choice(n, size=2, replace=False)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        G = np.eye(n)
        c, s = math.cos(theta), math.sin(theta)
        G[i, i] = c
        G[j, j] = c
        G[i, j] = -s
        G[j, i] = s
        R = R @ G
    return R


def _fmt9(v: float) -> str:
    s = f"{abs(v):.9f}"
    return f"(- {s})" if v < 0 else s


def _row_text(row, bound, names) -> str:
    terms = [f"(* {_fmt9(c)} {names[k]})" for k, c in enumerate(row)
             if round(c, 9) != 0.0]
    if not terms:
        terms = [f"(* 0.000000001 {names[0]})"]  # fully-rounded-away row guard
    lhs = terms[0] if len(terms) == 1 else "(+ " + " ".join(terms) + ")"
    return f"(<= {lhs} {_fmt9(bound)})"


def generate(spec: BenchSpec) -> GeneratedInstance:
    """Build an instance plus its exact H-representation (9-decimal rounded)."""
    rng = np.random.default_rng(
        np.random.SeedSequence([spec.seed, spec.n, spec.m, _SHAPES.index(spec.shape)]))
    n, m = spec.n, spec.m
    names = [f"x{k}" for k in range(n)]
    polys = []
    boxes = [] if (spec.shape == "cube" and spec.axis_aligned) else None
    conjuncts = []
    center = None
    for _ in range(m):
        if spec.shape == "cube":
            half = 0.5 * spec.scale * rng.uniform(0.5, 2.0, size=n)
            diam = 2.0 * float(np.linalg.norm(half))
            body_center_offset = np.zeros(n)
        else:
            factor = spec.scale * rng.uniform(0.5, 2.0)
            diam = factor * math.sqrt(2.0)
            body_center_offset = np.full(n, factor / (n + 1.0))
        R = np.eye(n) if spec.axis_aligned else _random_rotation(n, rng)
        if center is None:
            center = spec.scale * rng.uniform(-5.0, 5.0, size=n)
        else:
            step = rng.standard_normal(n)
            step /= np.linalg.norm(step)
            center = center + 0.5 * diam * step
        if spec.shape == "cube":
            A = np.vstack([R.T, -R.T])  # rows are +-columns of R
            b = np.concatenate([half + R.T @ center, half - R.T @ center])
        else:
            A = np.vstack([-R.T, np.sum(R, axis=1)[None, :]])
            b = np.concatenate([-(R.T @ center), [factor + float(np.sum(R, axis=1) @ center)]])
        A = np.round(A, 9)
        b = np.round(b, 9)
        rows = [_row_text(A[i], b[i], names) for i in range(A.shape[0])]
        conjuncts.append("(and " + " ".join(rows) + ")")
        polys.append(Polytope(A, b))
        if boxes is not None:
            hi = b[:n]
            lo = -b[n:]
            boxes.append((lo.copy(), hi.copy()))
    body = conjuncts[0] if m == 1 else "(or " + " ".join(conjuncts) + ")"
    lines = ["(set-logic QF_LRA)"]
    lines += [f"(declare-fun {v} () Real)" for v in names]
    lines += [f"(assert {body})", "(check-sat)", "(exit)"]
    return GeneratedInstance("\n".join(lines) + "\n", polys, boxes)


def gen_instance(spec: BenchSpec) -> str:
    return generate(spec).text


def exact_box_union(boxes) -> float:
    """Inclusion-exclusion over intersections of axis-aligned boxes.

    Exact up to float rounding; refuses m > 20 (2^m subsets).  Empty
    intersections prune whole subset branches.
    """
    m = len(boxes)
    if m > 20:
        raise ValueError(f"{m} boxes: inclusion-exclusion refuses m > 20")
    if m == 0:
        return 0.0
    los = [np.asarray(lo, dtype=float) for lo, _ in boxes]
    his = [np.asarray(hi, dtype=float) for _, hi in boxes]
    total = 0.0

    def go(start, lo, hi, size):
        nonlocal total
        for jj in range(start, m):
            nlo = np.maximum(lo, los[jj])
            nhi = np.minimum(hi, his[jj])
            ext = nhi - nlo
            if np.any(ext <= 0.0):
                continue
            vol = float(np.prod(ext))
            total += vol if size % 2 == 0 else -vol
            go(jj + 1, nlo, nhi, size + 1)

    big = np.full(los[0].shape, -np.inf)
    go(0, big, -big, 0)
    return total


def grid_mc_union(polys: list[Polytope], samples: int, rng) -> tuple[float, float]:
    """Uniform bounding-box Monte Carlo: (estimate, 99%-CI half-width)."""
    if samples < 1:
        raise ValueError("need at least one sample")
    lo = None
    hi = None
    for p in polys:
        plo, phi = bounding_box(p)
        lo = plo if lo is None else np.minimum(lo, plo)
        hi = phi if hi is None else np.maximum(hi, phi)
    box_vol = float(np.prod(hi - lo))
    if not math.isfinite(box_vol):
        raise OverflowError("joint bounding box volume overflows")
    hits = 0
    done = 0
    while done < samples:
        chunk = min(200_000, samples - done)
        pts = rng.uniform(lo, hi, size=(chunk, lo.shape[0]))
        inside = np.zeros(chunk, dtype=bool)
        for p in polys:
            inside |= contains_many(p, pts)
        hits += int(inside.sum())
        done += chunk
    frac = hits / samples
    z99 = 2.5758293035489004
    ci = z99 * box_vol * math.sqrt(max(frac * (1.0 - frac), 1e-300) / samples)
    return box_vol * frac, ci
