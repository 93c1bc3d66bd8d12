"""End-to-end runs: text/polytopes in, JSON-able report out.

The pipeline is deterministic given (input, flags, seed): per-polytope volume
and sampling streams are derived from (seed, polytope index), so prefetching
volumes with worker threads cannot change any drawn number.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .circuit import abstract
from .config import DEFAULT_TOL, Tolerances
from .cubes import iter_cubes
from .errors import LravolError
from .lattice import get_precision
from .polytope import (Polytope, Prepared, STATUS_OK, build_polytope, prepare,
                       write_union_file)
from .sketch import Sketch, thresh
from .smt2 import parse_smt2
from .volume import compute_volume

SCHEMA = 1


class PipelineTimeout(LravolError):
    """Cooperative timeout hit at a phase boundary."""


@dataclass
class PolytopeRecord:
    index: int
    facets: int
    status: str
    volume: float = 0.0
    n_sampled: int = 0
    sketch_size: int = 0
    p_exponent: int = 0
    enumerate_ms: float = 0.0
    volume_ms: float = 0.0
    sample_ms: float = 0.0


@dataclass
class RunReport:
    status: str = "ok"
    estimate: float = 0.0
    cube_count: int = 0
    dimension: int = 0
    preci: int = 0
    thresh: float = 0.0
    eps: float = 0.0
    delta: float = 0.0
    seed: int = 0
    warning: str = ""
    records: list[PolytopeRecord] = field(default_factory=list)
    total_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "status": self.status,
            "estimate": self.estimate,
            "cube_count": self.cube_count,
            "dimension": self.dimension,
            "preci": self.preci,
            "thresh": self.thresh,
            "eps": self.eps,
            "delta": self.delta,
            "seed": self.seed,
            "warning": self.warning,
            "polytopes": [
                {
                    "index": r.index,
                    "facets": r.facets,
                    "status": r.status,
                    "volume": r.volume,
                    "n_sampled": r.n_sampled,
                    "sketch_size": r.sketch_size,
                    "p_exponent": r.p_exponent,
                    "enumerate_ms": r.enumerate_ms,
                    "volume_ms": r.volume_ms,
                    "sample_ms": r.sample_ms,
                }
                for r in self.records
            ],
            "total_ms": self.total_ms,
        }


def _fmt_json(value, out):
    if isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v) or math.isinf(v):
            out.append("null")
        else:
            out.append(f"{v:.17g}")
    elif isinstance(value, str):
        out.append('"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif value is None:
        out.append("null")
    elif isinstance(value, dict):
        out.append("{")
        for i, (k, v) in enumerate(value.items()):
            if i:
                out.append(", ")
            _fmt_json(str(k), out)
            out.append(": ")
            _fmt_json(v, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, v in enumerate(value):
            if i:
                out.append(", ")
            _fmt_json(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(value)}")


def report_json(data) -> str:
    """JSON with floats at 17 significant digits (stable, reproducible)."""
    out: list[str] = []
    _fmt_json(data if isinstance(data, dict) else data.to_dict(), out)
    return "".join(out)


@dataclass
class Options:
    eps: float = 0.8
    delta: float = 0.2
    seed: int = 1
    jobs: int = 1
    timeout: Optional[float] = None
    preci_override: Optional[int] = None
    log_base: str = "e"
    cube_limit: Optional[int] = None
    tol: Tolerances = DEFAULT_TOL


def decompose_text(text: str, cube_limit: Optional[int] = None):
    """Frontend + abstraction + enumeration; returns (polytopes, cubes, dim, times)."""
    parsed = parse_smt2(text)
    if parsed.dimension == 0:
        raise LravolError("formula has no real variables; volume is undefined")
    circuit, amap = abstract(parsed.formula)
    polys = []
    cubes = []
    times = []
    t_prev = time.perf_counter()
    for cube in iter_cubes(circuit, cube_limit):
        now = time.perf_counter()
        times.append((now - t_prev) * 1000.0)
        t_prev = now
        cubes.append(cube)
        polys.append(build_polytope(cube, amap, parsed.dimension))
    return polys, cubes, parsed.dimension, times


def decompose_to_union_text(text: str, cube_limit: Optional[int] = None) -> str:
    polys, _, _, _ = decompose_text(text, cube_limit)
    if not polys:
        raise LravolError("formula is unsatisfiable; nothing to decompose")
    return write_union_file(polys)


def _volume_rng(seed, i):
    return np.random.default_rng(np.random.SeedSequence([seed, 1, i]))


def _sample_rng(seed, i):
    return np.random.default_rng(np.random.SeedSequence([seed, 2, i]))


def run_polytopes(polys: list[Polytope], opt: Options,
                  enumerate_ms: Optional[list[float]] = None) -> RunReport:
    t_start = time.perf_counter()
    if not (0.0 < opt.eps <= 1.0) or not (0.0 < opt.delta <= 1.0):
        raise ValueError("epsilon and delta must lie in (0, 1]")
    if not polys:
        raise LravolError("no polytopes to estimate")
    deadline = t_start + opt.timeout if opt.timeout else None

    report = RunReport(eps=opt.eps, delta=opt.delta, seed=opt.seed,
                       cube_count=len(polys), dimension=polys[0].dim)
    preps: list[Prepared] = []
    for i, p in enumerate(polys):
        preps.append(prepare(p, opt.tol))
        if deadline and time.perf_counter() > deadline:
            raise PipelineTimeout(f"timeout while preprocessing polytope {i}")
    ok = [pr for pr in preps if pr.status == STATUS_OK]
    m = len(preps)
    report.records = [
        PolytopeRecord(index=i, facets=pr.poly.facets, status=pr.status)
        for i, pr in enumerate(preps)
    ]
    if enumerate_ms:
        for r, ms in zip(report.records, enumerate_ms):
            r.enumerate_ms = ms
    if not ok:
        report.estimate = 0.0
        report.warning = "dimension-deficient: every polytope is degenerate or empty"
        report.total_ms = (time.perf_counter() - t_start) * 1000.0
        return report

    if opt.preci_override is not None:
        report.preci = opt.preci_override
    else:
        report.preci = get_precision(ok, opt.eps / 8.0, opt.log_base).preci
    report.thresh = thresh(opt.eps, opt.delta, m)

    eps_p = opt.eps / 12.0
    delta_p = opt.delta / (2.0 * m)

    def volume_of(i: int):
        pr = preps[i]
        t0 = time.perf_counter()
        if pr.status != STATUS_OK:
            return 0.0, 0.0
        est = compute_volume(pr, eps_p, delta_p, _volume_rng(opt.seed, i),
                             tol=opt.tol)
        return est.value, (time.perf_counter() - t0) * 1000.0

    sk = Sketch(thresh=report.thresh, preci=report.preci, m=m,
                rng=np.random.default_rng(np.random.SeedSequence([opt.seed, 3, 0])))

    pool = ThreadPoolExecutor(max_workers=opt.jobs) if opt.jobs > 1 else None
    try:
        futures = {}
        if pool:
            for i in range(min(opt.jobs, m)):
                futures[i] = pool.submit(volume_of, i)
        for i in range(m):
            if deadline and time.perf_counter() > deadline:
                raise PipelineTimeout(f"timeout before polytope {i}")
            if pool:
                t_i, vol_ms = futures.pop(i).result()
                nxt = i + opt.jobs
                if nxt < m:
                    futures[nxt] = pool.submit(volume_of, nxt)
            else:
                t_i, vol_ms = volume_of(i)
            rec = report.records[i]
            rec.volume = t_i
            rec.volume_ms = vol_ms
            t0 = time.perf_counter()
            entry = sk.process_polytope(preps[i], t_i, _sample_rng(opt.seed, i),
                                        opt.tol)
            rec.sample_ms = (time.perf_counter() - t0) * 1000.0
            rec.n_sampled = entry["n_sampled"]
            rec.sketch_size = entry["size"]
            rec.p_exponent = entry["p_exp"]
    finally:
        if pool:
            pool.shutdown(wait=False, cancel_futures=True)

    report.estimate = sk.estimate()
    report.total_ms = (time.perf_counter() - t_start) * 1000.0
    return report


def run_text(text: str, opt: Options) -> RunReport:
    t_start = time.perf_counter()
    polys, _, _, times = decompose_text(text, opt.cube_limit)
    if not polys:
        report = RunReport(eps=opt.eps, delta=opt.delta, seed=opt.seed)
        report.estimate = 0.0
        report.warning = "formula is unsatisfiable"
        report.total_ms = (time.perf_counter() - t_start) * 1000.0
        return report
    remaining = None
    if opt.timeout is not None:
        remaining = max(0.0, opt.timeout - (time.perf_counter() - t_start))
    sub = Options(eps=opt.eps, delta=opt.delta, seed=opt.seed, jobs=opt.jobs,
                  timeout=remaining, preci_override=opt.preci_override,
                  log_base=opt.log_base, cube_limit=opt.cube_limit, tol=opt.tol)
    report = run_polytopes(polys, sub, enumerate_ms=times)
    report.total_ms = (time.perf_counter() - t_start) * 1000.0
    return report
