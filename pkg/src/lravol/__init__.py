"""Volume estimation for QF_LRA formulas.

The solution space is decomposed into a union of overlapping convex
H-polytopes (Boolean abstraction as an and-inverter circuit, then all-cube
enumeration); per-polytope volumes come from multiphase hit-and-run Monte
Carlo, and the union is estimated by a bounded Poisson sketch over a
lattice discretization.
"""
from .bench import BenchSpec, exact_box_union, gen_instance, generate, grid_mc_union
from .circuit import AtomMap, Circuit, abstract, eval_circuit, to_aiger_ascii
from .config import DEFAULT_TOL, Tolerances
from .cubes import Cube, enumerate_cubes, is_implicant, iter_cubes, minimize_cube
from .lattice import (LatticePoint, PrecisionReport, generate_samples,
                      get_precision, round_to_lattice)
from .lp import LpResult, solve_lp
from .pipeline import Options, RunReport, report_json, run_polytopes, run_text
from .polytope import (Polytope, Prepared, bounding_box, build_polytope,
                       chebyshev, contains, contains_many, prepare,
                       read_union_file, remove_redundant, write_union_file)
from .sketch import Sketch, estimate_union, poisson, thresh
from .smt2 import (Formula, Kind, LinearAtom, ParsedFormula, Relation,
                   eval_formula, normalize_atom, parse_smt2, print_smt2)
from .volume import VolumeEstimate, compute_volume, hit_and_run_step

__version__ = "0.1.0"
