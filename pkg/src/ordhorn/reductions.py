"""From propositional 3-CNF to QCSP instances that are true iff the input is
unsatisfiable.

The gadget wires two constraint chains through the universal label variables
y_i^0, y_i^1 (one pair per propositional variable): the lower chain forces
v = f when every variable has some label equal to f, the upper chain forces
u = t whenever the labelled assignment satisfies every clause, and the final
order-disequality constraint is violated exactly when both propagations
fire with f < t.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

from .formula import ParseError, QcspInstance, parse_instance


@dataclass(frozen=True)
class Cnf3:
    n: int
    clauses: tuple  # triples of signed variable indices

    def truth_table_sat(self) -> bool:
        """Independent satisfiability oracle by full enumeration."""
        for bits in range(1 << self.n):
            if all(
                any((bits >> (abs(l) - 1)) & 1 == (1 if l > 0 else 0) for l in clause)
                for clause in self.clauses
            ):
                return True
        return False


def parse_dimacs(text: str) -> Cnf3:
    """Parse DIMACS cnf; clauses shorter than 3 are padded by repetition."""
    n = None
    expected = None
    clauses: List[tuple] = []
    pending: List[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("malformed DIMACS header", line_no, 1)
            try:
                n, expected = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("malformed DIMACS header", line_no, 1)
            continue
        if n is None:
            raise ParseError("clause before header", line_no, 1)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", line_no, 1)
            if lit == 0:
                if not pending:
                    raise ParseError("zero-length clause", line_no, 1)
                if len(pending) > 3:
                    raise ParseError("clause has more than 3 literals", line_no, 1)
                while len(pending) < 3:
                    pending.append(pending[0])
                clauses.append(tuple(pending))
                pending = []
            else:
                if abs(lit) > n:
                    raise ParseError(f"literal {lit} out of range", line_no, 1)
                pending.append(lit)
    if n is None:
        raise ParseError("missing DIMACS header", 1, 1)
    if pending:
        raise ParseError("clause line without trailing 0", 1, 1)
    if expected is not None and expected != len(clauses):
        raise ParseError(f"header announced {expected} clauses, found {len(clauses)}", 1, 1)
    return Cnf3(n, tuple(clauses))


def reduction_text(cnf: Cnf3) -> str:
    """The gadget in instance-file syntax, with the order-disequality
    constraint kept as the named relation Z."""
    n, m = cnf.n, len(cnf.clauses)
    lines = ["qcsp v1", "E t", "E f"]
    for i in range(1, n + 1):
        lines.append(f"A y{i}_0")
        lines.append(f"A y{i}_1")
    lower = ["f"] + [f"c{i}" for i in range(1, n)] + ["v"]
    upper = ["t"] + [f"d{j}" for j in range(1, m)] + ["u"]
    for name in lower[1:-1] + upper[1:-1] + ["u", "v"]:
        lines.append(f"E {name}")

    def label(lit: int) -> str:
        return f"y{abs(lit)}_{1 if lit > 0 else 0}"

    for i in range(1, n + 1):
        src, dst = lower[i - 1], lower[i]
        lines.append(f"C M+ {src} y{i}_0 {dst}")
        lines.append(f"C M+ {src} y{i}_1 {dst}")
        lines.append(f"C M+ {dst} {dst} {src}")
    for j, clause in enumerate(cnf.clauses, start=1):
        src, dst = upper[j - 1], upper[j]
        for lit in clause:
            lines.append(f"C M+ {src} {label(lit)} {dst}")
        lines.append(f"C M+ {dst} {dst} {src}")
    lines.append("C Z v f u t")
    return "\n".join(lines) + "\n"


def reduce_3cnf_complement(cnf: Cnf3) -> QcspInstance:
    """The QCSP instance that is true iff the 3-CNF is unsatisfiable.

    Variable count is 3n+m+2 and constraint count 3n+4m+1 (duplicate edges
    from repeated literals are kept so the size law is exact)."""
    inst = parse_instance(reduction_text(cnf))
    n, m = cnf.n, len(cnf.clauses)
    assert inst.n_vars == 3 * n + m + 2, "variable-count law violated"
    # the Z constraint expands into two clauses in the general dialect
    assert len(inst.matrix) == 3 * n + 4 * m + 2, "constraint-count law violated"
    return inst
