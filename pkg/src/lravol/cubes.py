"""Non-disjoint DNF extraction: enumerate minimized satisfying cubes.

A small DPLL loop over the circuit's input space does iterate-SAT with
blocking clauses.  Each model is shrunk to a prime implicant (single-literal
removal, ascending input id) and the *minimized* cube is blocked, so
overlapping cubes remain possible.  Pruning uses three-valued circuit
evaluation, which also certifies implicants exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .circuit import Circuit, eval_circuit
from .errors import CubeLimitError

_NEG = (1, 0, 2)
_AND3 = ((0, 0, 0), (0, 1, 2), (0, 2, 2))

_CONFLICT, _CONTINUE, _DONE = 0, 1, 2


@dataclass(frozen=True)
class Cube:
    """Partial input assignment; every total extension satisfies the circuit."""

    literals: tuple[tuple[int, bool], ...]  # (input var, polarity), var-sorted

    def as_dict(self) -> dict[int, bool]:
        return dict(self.literals)

    def __len__(self):
        return len(self.literals)

    def satisfied_by(self, assignment: dict[int, bool]) -> bool:
        return all(assignment[v] == pol for v, pol in self.literals)


class _InputSolver:
    """DPLL over circuit inputs with clause side-constraints."""

    def __init__(self, circuit: Circuit):
        self.ni = circuit.num_inputs
        self.gates = circuit.gates
        self.output = circuit.output
        self.nv = circuit.num_vars
        self.vals = [2] * (self.nv + 1)
        self.vals[0] = 0

    def _eval3(self) -> int:
        vals = self.vals
        base = self.ni
        for i, (l0, l1) in enumerate(self.gates):
            v0 = vals[l0 >> 1]
            if l0 & 1:
                v0 = _NEG[v0]
            if v0 == 0:
                vals[base + 1 + i] = 0
                continue
            v1 = vals[l1 >> 1]
            if l1 & 1:
                v1 = _NEG[v1]
            vals[base + 1 + i] = _AND3[v0][v1]
        out = vals[self.output >> 1]
        return _NEG[out] if self.output & 1 else out

    def _propagate(self, clauses, target: int, trail: list) -> int:
        # clause literal encoding: 2*var (+1 when the satisfying value is False)
        vals = self.vals
        while True:
            units = []
            all_sat = True
            for clause in clauses:
                sat = False
                unassigned = None
                n_open = 0
                for lit in clause:
                    v = vals[lit >> 1]
                    if v == 2:
                        n_open += 1
                        unassigned = lit
                    elif v == (lit & 1) ^ 1:
                        sat = True
                        break
                if sat:
                    continue
                all_sat = False
                if n_open == 0:
                    return _CONFLICT
                if n_open == 1:
                    units.append(unassigned)
            out = self._eval3()
            if out != 2 and out != target:
                return _CONFLICT
            if not units:
                if out == target and all_sat:
                    return _DONE
                return _CONTINUE
            for lit in units:
                var = lit >> 1
                want = (lit & 1) ^ 1
                if vals[var] == 2:
                    vals[var] = want
                    trail.append(var)
                elif vals[var] != want:
                    return _CONFLICT

    def solve(self, target: bool, clauses=(),
              assumptions: Optional[dict[int, bool]] = None) -> Optional[dict[int, bool]]:
        """Total input assignment with output == target satisfying all clauses."""
        tgt = 1 if target else 0
        vals = self.vals
        for i in range(1, self.nv + 1):
            vals[i] = 2
        if assumptions:
            for var, val in assumptions.items():
                vals[var] = 1 if val else 0
        trail0: list[int] = []
        st = self._propagate(clauses, tgt, trail0)
        if st == _CONFLICT:
            return None
        frames: list[tuple[int, int, list[int]]] = []

        def extract():
            return {v: vals[v] == 1 for v in range(1, self.ni + 1)}

        while True:
            if st == _DONE:
                for v in range(1, self.ni + 1):
                    if vals[v] == 2:
                        vals[v] = 0  # output already forced; any completion works
                return extract()
            if st == _CONTINUE:
                dv = 0
                for v in range(1, self.ni + 1):
                    if vals[v] == 2:
                        dv = v
                        break
                if dv == 0:
                    return extract()
                vals[dv] = 1
                trail = [dv]
                st = self._propagate(clauses, tgt, trail)
                frames.append((dv, 1, trail))
                continue
            # conflict: chronological backtracking, flip True -> False
            while frames:
                var, value, trail = frames.pop()
                for v in trail:
                    vals[v] = 2
                if value == 1:
                    vals[var] = 0
                    trail = [var]
                    st = self._propagate(clauses, tgt, trail)
                    frames.append((var, 0, trail))
                    break
            else:
                return None


def is_implicant(circuit: Circuit, literals: dict[int, bool]) -> bool:
    """True iff every total extension of `literals` satisfies the circuit."""
    solver = _InputSolver(circuit)
    return solver.solve(False, (), dict(literals)) is None


def minimize_cube(circuit: Circuit, model: dict[int, bool]) -> Cube:
    """Shrink a satisfying model to a prime implicant.

    Literals are dropped in ascending input id; a literal stays whenever its
    removal admits a falsifying extension.  The result contains the model and
    is prime w.r.t. single-literal removal.
    """
    if not eval_circuit(circuit, model):
        raise ValueError("model does not satisfy circuit")
    solver = _InputSolver(circuit)
    current = {v: bool(model[v]) for v in sorted(model)}
    for var in sorted(model):
        trial = dict(current)
        del trial[var]
        if solver.solve(False, (), trial) is None:
            current = trial
    return Cube(tuple(sorted(current.items())))


def iter_cubes(circuit: Circuit, limit: Optional[int] = None):
    """Yield minimized cubes until the blocked circuit goes UNSAT.

    Blocking uses the minimized cube's negation, so cubes may overlap.  When
    `limit` is given and more cubes exist, a CubeLimitError carrying the
    cubes found so far is raised.
    """
    solver = _InputSolver(circuit)
    clauses: list[tuple[int, ...]] = []
    count = 0
    emitted: list[Cube] = []
    while True:
        model = solver.solve(True, clauses)
        if model is None:
            return
        if limit is not None and count >= limit:
            raise CubeLimitError(limit, emitted)
        cube = minimize_cube(circuit, model)
        count += 1
        emitted.append(cube)
        clauses.append(tuple(2 * v + (1 if pol else 0) for v, pol in cube.literals))
        yield cube


def enumerate_cubes(circuit: Circuit, limit: Optional[int] = None) -> list[Cube]:
    """All-cube enumeration; the disjunction of the result equals the circuit.

    An UNSAT circuit yields [].  Deterministic given the circuit: decision
    and literal-drop orders are fixed (ascending input id).
    """
    return list(iter_cubes(circuit, limit))
