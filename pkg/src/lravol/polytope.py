"""H-polytopes: construction from cubes, membership, preprocessing.

A polytope is {x : A x <= b}.  Membership uses one hybrid predicate
(`contains`) everywhere -- sketch removal, rounding acceptance and test
oracles -- so the pieces agree about boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .circuit import AtomMap
from .config import DEFAULT_TOL, Tolerances
from .cubes import Cube
from .errors import LravolError, UnboundedPolytopeError
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp


class UnionFormatError(LravolError):
    """Malformed polytope-union file."""


@dataclass
class Polytope:
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("A and b row counts differ")
        if np.any(np.all(self.A == 0.0, axis=1)):
            raise ValueError("all-zero facet normal")

    @property
    def facets(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        return self.A.shape[1]


def build_polytope(cube: Cube, amap: AtomMap, dim: int) -> Polytope:
    """One row per theory literal of the cube.

    A positive literal of atom (a, b) contributes the row a.x <= b; a negative
    literal contributes -a.x <= -b (the strict complement is relaxed, which
    only touches a measure-zero boundary).  Pure-Boolean and free inputs add
    nothing.
    """
    rows = []
    rhs = []
    for var, pol in cube.literals:
        atom = amap.atoms.get(var)
        if atom is None:
            continue
        row = np.zeros(dim)
        for i, c in atom.coeffs:
            row[i] = float(c)
        bound = atom.bound_float
        if pol:
            rows.append(row)
            rhs.append(bound)
        else:
            rows.append(-row)
            rhs.append(-bound)
    if not rows:
        raise UnboundedPolytopeError(
            "cube has no theory literals: region is all of R^n")
    return Polytope(np.array(rows), np.array(rhs))


def contains(poly: Polytope, x, tol: Tolerances = DEFAULT_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (poly.dim,):
        raise ValueError(f"point dimension {x.shape} vs polytope {poly.dim}")
    slack = poly.b + tol.contains_tol * (1.0 + np.abs(poly.b))
    return bool(np.all(poly.A @ x <= slack))


def contains_many(poly: Polytope, pts: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Vectorized membership for an (k, n) array of points."""
    slack = poly.b + tol.contains_tol * (1.0 + np.abs(poly.b))
    return np.all(pts @ poly.A.T <= slack, axis=1)


def chebyshev(poly: Polytope, tol: Tolerances = DEFAULT_TOL):
    """Center and radius of the largest inscribed ball.

    Solves max r s.t. a_i.x + ||a_i|| r <= b_i, r >= 0.  An infeasible LP
    means the polytope is empty: radius -1 (distinct from a degenerate 0).
    An unbounded LP reports radius +inf.
    """
    norms = np.linalg.norm(poly.A, axis=1)
    A_ext = np.hstack([poly.A, norms[:, None]])
    A_ext = np.vstack([A_ext, np.concatenate([np.zeros(poly.dim), [-1.0]])])
    b_ext = np.concatenate([poly.b, [0.0]])
    c = np.concatenate([np.zeros(poly.dim), [1.0]])
    res = solve_lp(A_ext, b_ext, c, sense="max", tol=tol)
    if res.status == INFEASIBLE:
        return None, -1.0
    if res.status == UNBOUNDED:
        return None, math.inf
    return res.x[: poly.dim].copy(), float(res.value)


def remove_redundant(poly: Polytope, tol: Tolerances = DEFAULT_TOL) -> Polytope:
    """Drop rows whose removal cannot change the feasible set.

    Row i goes when max a_i.x over the remaining rows (with row i relaxed to
    b_i + 1) stays <= b_i + redundancy_tol.  Rows are tested in order against
    the surviving set, so one copy of a duplicated facet is kept.
    """
    m = poly.facets
    keep = list(range(m))
    for i in range(m):
        idx = [j for j in keep if j != i] + [i]
        A_test = poly.A[idx]
        b_test = poly.b[idx].copy()
        b_test[-1] = poly.b[i] + 1.0
        res = solve_lp(A_test, b_test, poly.A[i], sense="max", tol=tol)
        if res.status == OPTIMAL and res.value <= poly.b[i] + tol.redundancy_tol:
            keep.remove(i)
    if len(keep) == m:
        return poly
    return Polytope(poly.A[keep].copy(), poly.b[keep].copy())


def bounding_box(poly: Polytope, tol: Tolerances = DEFAULT_TOL):
    """Axis-aligned bounds from 2n LPs; raises if any direction is unbounded."""
    n = poly.dim
    lo = np.empty(n)
    hi = np.empty(n)
    for k in range(n):
        c = np.zeros(n)
        c[k] = 1.0
        res = solve_lp(poly.A, poly.b, c, sense="min", tol=tol)
        if res.status != OPTIMAL:
            raise UnboundedPolytopeError(f"unbounded polytope (axis {k}, min)")
        lo[k] = res.value
        res = solve_lp(poly.A, poly.b, c, sense="max", tol=tol)
        if res.status != OPTIMAL:
            raise UnboundedPolytopeError(f"unbounded polytope (axis {k}, max)")
        hi[k] = res.value
    return lo, hi


# ---------------------------------------------------------------------------
# preprocessing for the estimation pipeline

STATUS_OK = "ok"
STATUS_DEGENERATE = "degenerate"
STATUS_EMPTY = "empty"


@dataclass
class Prepared:
    poly: Polytope
    status: str
    center: Optional[np.ndarray] = None
    radius: float = -1.0
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None


def prepare(poly: Polytope, tol: Tolerances = DEFAULT_TOL) -> Prepared:
    """Classify and reduce a raw polytope.

    Empty and degenerate (inscribed radius <= degenerate_radius) bodies skip
    redundancy removal entirely; they are never sampled.  Unbounded bodies
    raise, since their volume is undefined.
    """
    center, radius = chebyshev(poly, tol)
    if radius < 0:
        return Prepared(poly, STATUS_EMPTY, radius=-1.0)
    if math.isinf(radius):
        raise UnboundedPolytopeError("polytope admits arbitrarily large balls")
    if radius <= tol.degenerate_radius:
        return Prepared(poly, STATUS_DEGENERATE, center=center, radius=radius)
    reduced = remove_redundant(poly, tol)
    lo, hi = bounding_box(reduced, tol)
    return Prepared(reduced, STATUS_OK, center=center, radius=radius, lo=lo, hi=hi)


# ---------------------------------------------------------------------------
# polytope-union text format (the `decompose` output)

def write_union_file(polys: list[Polytope]) -> str:
    if not polys:
        raise ValueError("no polytopes to write")
    n = polys[0].dim
    lines = [f"{n} {len(polys)}"]
    for p in polys:
        if p.dim != n:
            raise ValueError("mixed dimensions in union")
        lines.append(str(p.facets))
        for row, beta in zip(p.A, p.b):
            lines.append(" ".join(f"{v:.17g}" for v in row) + f" {beta:.17g}")
    return "\n".join(lines) + "\n"


def read_union_file(text: str) -> list[Polytope]:
    """Parse the union format: `n m`, then per polytope `f` and f rows of n+1."""
    rows = []
    for raw in text.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            rows.append(stripped.split())
    if not rows:
        raise UnionFormatError("empty polytope-union file")
    header = rows.pop(0)
    if len(header) != 2:
        raise UnionFormatError("header must be 'n m'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise UnionFormatError(f"bad header: {exc}") from None
    if n < 1 or m < 1:
        raise UnionFormatError("need n >= 1 and m >= 1")
    polys = []
    pos = 0
    for k in range(m):
        if pos >= len(rows) or len(rows[pos]) != 1:
            raise UnionFormatError(f"polytope {k}: expected facet count line")
        try:
            f = int(rows[pos][0])
        except ValueError:
            raise UnionFormatError(f"polytope {k}: bad facet count") from None
        pos += 1
        if f < 1:
            raise UnionFormatError(f"polytope {k}: facet count must be >= 1")
        A = np.empty((f, n))
        b = np.empty(f)
        for r in range(f):
            if pos >= len(rows) or len(rows[pos]) != n + 1:
                raise UnionFormatError(
                    f"polytope {k} row {r}: expected {n + 1} numbers")
            try:
                vals = [float(v) for v in rows[pos]]
            except ValueError:
                raise UnionFormatError(f"polytope {k} row {r}: bad number") from None
            A[r] = vals[:n]
            b[r] = vals[n]
            pos += 1
        polys.append(Polytope(A, b))
    if pos != len(rows):
        raise UnionFormatError("trailing content after last polytope")
    return polys
