"""Boolean abstraction of a formula as an and-inverter circuit.

Literals are ints: ``lit = 2*var + sign`` with variable 0 reserved for the
constant FALSE (literal 0 = false, 1 = true), inputs 1..I, gates above.
Structural hashing folds duplicate gates; Or/Implies/Iff/Xor/Ite are lowered
to AND+NOT so no auxiliary variables are introduced.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .smt2 import Formula, Kind, LinearAtom, Relation

FALSE_LIT = 0
TRUE_LIT = 1


def lit_var(lit: int) -> int:
    return lit >> 1


def lit_neg(lit: int) -> int:
    return lit ^ 1


def lit_sign(lit: int) -> bool:
    return bool(lit & 1)


@dataclass(frozen=True)
class Circuit:
    num_inputs: int
    gates: tuple[tuple[int, int], ...]  # (lit0, lit1), fan-ins of earlier vars
    output: int

    @property
    def num_vars(self) -> int:
        return self.num_inputs + len(self.gates)

    def input_vars(self):
        return range(1, self.num_inputs + 1)


@dataclass
class AtomMap:
    """Input var -> linear atom for theory inputs; name for pure-Boolean ones."""

    atoms: dict[int, LinearAtom] = field(default_factory=dict)
    bool_names: dict[int, str] = field(default_factory=dict)
    strict: dict[int, bool] = field(default_factory=dict)

    def is_theory(self, var: int) -> bool:
        return var in self.atoms


class _Builder:
    def __init__(self):
        self.num_inputs = 0
        self.gates: list[tuple[int, int]] = []
        self.strash: dict[tuple[int, int], int] = {}

    def new_input(self) -> int:
        self.num_inputs += 1
        return self.num_inputs  # var id; inputs precede gates

    def gate_and(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == FALSE_LIT or a == lit_neg(b):
            return FALSE_LIT
        if a == TRUE_LIT:
            return b
        if a == b:
            return a
        key = (a, b)
        lit = self.strash.get(key)
        if lit is None:
            var = self.num_inputs + len(self.gates) + 1
            self.gates.append(key)
            lit = 2 * var
            self.strash[key] = lit
        return lit

    def gate_or(self, a: int, b: int) -> int:
        return lit_neg(self.gate_and(lit_neg(a), lit_neg(b)))


def _ge_mirror(atom: LinearAtom) -> LinearAtom:
    coeffs = tuple((i, -c) for i, c in atom.coeffs)
    return LinearAtom(coeffs, -atom.bound, Relation.LE)


def abstract(formula: Formula) -> tuple[Circuit, AtomMap]:
    """Build the circuit over atom/Boolean inputs only.

    Distinct normalized atoms share one input; equality atoms are expanded
    into the conjunction of their two LE halves before abstraction, so cubes
    can select equality facets.
    """
    b = _Builder()
    amap = AtomMap()
    atom_inputs: dict[LinearAtom, int] = {}
    bool_inputs: dict[str, int] = {}

    # inputs are numbered before any gate exists, so register them all first
    def register(f: Formula):
        if f.kind is Kind.ATOM:
            atom = f.atom
            if atom.relation is Relation.EQ:
                le = LinearAtom(atom.coeffs, atom.bound, Relation.LE)
                for half in (le, _ge_mirror(le)):
                    if half not in atom_inputs:
                        var = b.new_input()
                        atom_inputs[half] = var
                        amap.atoms[var] = half
                        amap.strict[var] = False
            elif atom not in atom_inputs:
                var = b.new_input()
                atom_inputs[atom] = var
                amap.atoms[var] = atom
                amap.strict[var] = atom.relation is Relation.LT
        elif f.kind is Kind.BOOL_VAR:
            if f.name not in bool_inputs:
                var = b.new_input()
                bool_inputs[f.name] = var
                amap.bool_names[var] = f.name
        else:
            for c in f.children:
                register(c)

    register(formula)

    def theory_input(atom: LinearAtom) -> int:
        return atom_inputs[atom]

    def walk(f: Formula) -> int:
        k = f.kind
        if k is Kind.TRUE:
            return TRUE_LIT
        if k is Kind.FALSE:
            return FALSE_LIT
        if k is Kind.ATOM:
            atom = f.atom
            if atom.relation is Relation.EQ:
                le = LinearAtom(atom.coeffs, atom.bound, Relation.LE)
                return b.gate_and(2 * theory_input(le),
                                  2 * theory_input(_ge_mirror(le)))
            return 2 * theory_input(atom)
        if k is Kind.BOOL_VAR:
            return 2 * bool_inputs[f.name]
        if k is Kind.NOT:
            return lit_neg(walk(f.children[0]))
        if k is Kind.AND:
            lit = TRUE_LIT
            for c in f.children:
                lit = b.gate_and(lit, walk(c))
            return lit
        if k is Kind.OR:
            lit = FALSE_LIT
            for c in f.children:
                lit = b.gate_or(lit, walk(c))
            return lit
        if k is Kind.IMPLIES:
            a, c = (walk(x) for x in f.children)
            return lit_neg(b.gate_and(a, lit_neg(c)))
        if k is Kind.IFF:
            x, y = (walk(c) for c in f.children)
            return b.gate_or(b.gate_and(x, y), b.gate_and(lit_neg(x), lit_neg(y)))
        if k is Kind.XOR:
            x, y = (walk(c) for c in f.children)
            return b.gate_or(b.gate_and(x, lit_neg(y)), b.gate_and(lit_neg(x), y))
        if k is Kind.ITE:
            c, t, e = (walk(x) for x in f.children)
            return b.gate_or(b.gate_and(c, t), b.gate_and(lit_neg(c), e))
        raise AssertionError(k)

    out = walk(formula)
    return Circuit(b.num_inputs, tuple(b.gates), out), amap


def eval_circuit(circuit: Circuit, assignment: dict[int, bool]) -> bool:
    """Standard AND/NOT semantics; assignment must cover every input."""
    values = [False] * (circuit.num_vars + 1)
    for var in circuit.input_vars():
        if var not in assignment:
            raise KeyError(f"missing assignment for input {var}")
        values[var] = bool(assignment[var])

    def lv(lit):
        v = values[lit_var(lit)]
        return (not v) if lit & 1 else v

    base = circuit.num_inputs + 1
    for g, (l0, l1) in enumerate(circuit.gates):
        values[base + g] = lv(l0) and lv(l1)
    return lv(circuit.output)


def eval_circuit_batch(circuit: Circuit, inputs: np.ndarray) -> np.ndarray:
    """Vectorized eval; `inputs` is (rows, num_inputs) bool, column i = input i+1."""
    rows = inputs.shape[0]
    values = np.zeros((circuit.num_vars + 1, rows), dtype=bool)
    values[1 : circuit.num_inputs + 1] = inputs.T

    def lv(lit):
        v = values[lit_var(lit)]
        return ~v if lit & 1 else v

    base = circuit.num_inputs + 1
    for g, (l0, l1) in enumerate(circuit.gates):
        values[base + g] = lv(l0) & lv(l1)
    return lv(circuit.output)


def to_aiger_ascii(circuit: Circuit) -> str:
    """AIGER-ASCII (`aag`) dump for debugging; standard literal numbering."""
    m = circuit.num_vars
    lines = [f"aag {m} {circuit.num_inputs} 0 1 {len(circuit.gates)}"]
    for var in circuit.input_vars():
        lines.append(str(2 * var))
    lines.append(str(circuit.output))
    base = circuit.num_inputs + 1
    for g, (l0, l1) in enumerate(circuit.gates):
        lines.append(f"{2 * (base + g)} {l0} {l1}")
    return "\n".join(lines) + "\n"
