"""Central numeric tolerances.

All geometric predicates are absolute+relative hybrids; thin regions in the
wild make these knobs matter, so they live in one overridable record instead
of being scattered through the code.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # membership: a.x <= b + contains_tol * (1 + |b|), used identically for
    # sketch removal, rounding acceptance and test oracles
    contains_tol: float = 1e-9
    # LP kernel
    lp_pivot_tol: float = 1e-9
    lp_feas_tol: float = 1e-7
    # redundancy: row dropped when its relaxed max stays <= b + redundancy_tol
    redundancy_tol: float = 1e-7
    # polytopes with inscribed radius at or below this are degenerate (vol 0)
    degenerate_radius: float = 1e-8
    # hit-and-run: chords shorter than this trigger a direction resample
    chord_min: float = 1e-12


DEFAULT_TOL = Tolerances()
