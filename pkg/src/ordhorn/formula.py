"""Abstract syntax, parsing, printing, and normalization for temporal QCSP instances.

An instance is a quantifier prefix over named variables plus a CNF matrix of
order atoms.  Two matrix dialects exist: the *general* dialect (clauses are
disjunctions of atoms, produced by the parser) and the *solver* dialect
(clauses are pivoted ``OhClause`` values, produced by :func:`normalize`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

OPS = ("=", "!=", "<", "<=", ">", ">=")

#: Distinguished constant marker for the value 0.  Only classifier-internal
#: formulas may mention it; instance files must not.
ZERO = -1


class ParseError(ValueError):
    """Syntax or declaration error in an instance / relation file."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}" if line else message)


class NotPivotedError(ValueError):
    """A clause has no common pivot (or more than one order disjunct).

    Such instances are outside the solver dialect and can only be decided by
    the game oracle.
    """


class Atom(NamedTuple):
    left: int
    op: str
    right: int

    def text(self, names: tuple) -> str:
        l = names[self.left] if self.left != ZERO else "0"
        r = names[self.right] if self.right != ZERO else "0"
        return f"{l} {self.op} {r}"


Clause = tuple  # tuple[Atom, ...]


@dataclass(frozen=True)
class QfFormula:
    """A quantifier-free CNF over order atoms with variables 0..arity-1."""

    arity: int
    clauses: tuple


@dataclass(frozen=True)
class OhClause:
    """A pivoted clause: disequalities pivot != p for p in partners, plus an
    optional order disjunct pivot >= target.

    The degenerate shapes carry meaning: empty partners with a target is a
    unit order atom, empty partners without a target denotes falsity.
    """

    pivot: int
    partners: frozenset
    target: Optional[int]

    def key(self):
        return (self.pivot, tuple(sorted(self.partners)), self.target)

    def is_unit(self) -> bool:
        return not self.partners and self.target is not None

    def is_false(self) -> bool:
        return not self.partners and self.target is None

    def atoms(self) -> Clause:
        out = [Atom(self.pivot, "!=", p) for p in sorted(self.partners)]
        if self.target is not None:
            out.append(Atom(self.pivot, ">=", self.target))
        if not out:  # falsity printed as an unsatisfiable disequality
            out.append(Atom(self.pivot, "!=", self.pivot))
        return tuple(out)

    def text(self, names: tuple) -> str:
        return " | ".join(a.text(names) for a in self.atoms())


@dataclass(frozen=True)
class QcspInstance:
    """A prenex QCSP instance.

    ``matrix`` holds either general clauses (tuples of :class:`Atom`) or
    :class:`OhClause` values (solver dialect).
    """

    names: tuple
    quants: tuple  # 'E' or 'A' per prefix position
    matrix: tuple

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def is_oh_dialect(self) -> bool:
        return all(isinstance(c, OhClause) for c in self.matrix)

    def universals(self):
        return [i for i, q in enumerate(self.quants) if q == "A"]

    def general_matrix(self) -> tuple:
        """Matrix as atom clauses, regardless of dialect."""
        return tuple(c.atoms() if isinstance(c, OhClause) else c for c in self.matrix)

    def index(self, name: str) -> int:
        return self.names.index(name)


# ---------------------------------------------------------------------------
# parsing


def _expand_disjunct(tokens, line_no, col, declared, line):
    """Expand one disjunct into a CNF (list of atom clauses).

    A plain atom yields one single-atom clause; a named relation application
    yields the relation's defining clauses instantiated at the arguments.
    """
    from . import relations

    if len(tokens) == 3 and tokens[1] in OPS:
        a, op, b = tokens
        for v in (a, b):
            if v not in declared:
                raise ParseError(f"undeclared variable {v!r}", line_no, line.find(v) + 1)
        return [(Atom(declared[a], op, declared[b]),)]
    if len(tokens) >= 2 and all(ch in "=!<>" for ch in tokens[1]):
        raise ParseError(f"unknown operator {tokens[1]!r}", line_no, line.find(tokens[1]) + 1)
    name = tokens[0]
    rel = relations.lookup(name)
    if rel is None:
        if all(ch in "=!<>" for ch in name):
            raise ParseError(f"unknown operator {name!r}", line_no, col)
        raise ParseError(f"unknown relation {name!r}", line_no, col)
    args = tokens[1:]
    if len(args) != rel.arity:
        raise ParseError(
            f"relation {name} expects {rel.arity} arguments, got {len(args)}", line_no, col
        )
    arg_ix = []
    for v in args:
        if v not in declared:
            raise ParseError(f"undeclared variable {v!r}", line_no, line.find(v) + 1)
        arg_ix.append(declared[v])
    out = []
    for clause in rel.defn.clauses:
        out.append(tuple(Atom(arg_ix[a.left], a.op, arg_ix[a.right]) for a in clause))
    return out


def _parse_clause_line(body, line_no, declared, line):
    """Parse the body of a ``C`` line into general clauses.

    Disjuncts whose expansion is itself a conjunction distribute over the
    hosting disjunction, so one line may contribute several clauses.
    """
    parts = [p.strip() for p in body.split("|")]
    if any(not p for p in parts):
        raise ParseError("empty disjunct", line_no, 1)
    expansions = []
    for part in parts:
        col = line.find(part) + 1
        expansions.append(_expand_disjunct(part.split(), line_no, col, declared, line))
    clauses = [()]
    for exp in expansions:
        clauses = [acc + extra for acc in clauses for extra in exp]
    return [tuple(c) for c in clauses]


def parse_instance(text: str) -> QcspInstance:
    """Parse an instance file (general dialect, named relations expanded)."""
    names, quants, matrix = [], [], []
    declared = {}
    header_seen = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if not header_seen:
            if line.strip() != "qcsp v1":
                raise ParseError("expected header 'qcsp v1'", line_no, 1)
            header_seen = True
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind in ("E", "A"):
            if len(tokens) != 2:
                raise ParseError("expected one variable name", line_no, 1)
            name = tokens[1]
            if name in declared:
                raise ParseError(f"duplicate variable {name!r}", line_no, line.find(name) + 1)
            declared[name] = len(names)
            names.append(name)
            quants.append(kind)
        elif kind == "C":
            body = line.split(None, 1)
            if len(body) < 2:
                raise ParseError("empty clause", line_no, 1)
            matrix.extend(_parse_clause_line(body[1], line_no, declared, line))
        else:
            raise ParseError(f"unknown directive {kind!r}", line_no, 1)
    if not header_seen:
        raise ParseError("missing header 'qcsp v1'", 1, 1)
    return QcspInstance(tuple(names), tuple(quants), tuple(matrix))


def parse_relation(text: str):
    """Parse a relation-definition file into a TemporalRelation."""
    from .relations import TemporalRelation

    arity = None
    clauses = []
    declared = {}
    header_seen = False
    name = "rel"
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if not header_seen:
            if line.strip() != "rel v1":
                raise ParseError("expected header 'rel v1'", line_no, 1)
            header_seen = True
            continue
        tokens = line.split()
        if tokens[0] == "arity":
            if arity is not None:
                raise ParseError("duplicate arity line", line_no, 1)
            try:
                arity = int(tokens[1])
            except (IndexError, ValueError):
                raise ParseError("malformed arity line", line_no, 1)
            declared = {f"x{i + 1}": i for i in range(arity)}
        elif tokens[0] == "name":
            name = tokens[1]
        elif tokens[0] == "C":
            if arity is None:
                raise ParseError("arity must precede clauses", line_no, 1)
            body = line.split(None, 1)[1]
            clauses.extend(_parse_clause_line(body, line_no, declared, line))
        else:
            raise ParseError(f"unknown directive {tokens[0]!r}", line_no, 1)
    if not header_seen:
        raise ParseError("missing header 'rel v1'", 1, 1)
    if arity is None:
        raise ParseError("missing arity line", 1, 1)
    return TemporalRelation(arity, QfFormula(arity, tuple(clauses)), name)


def print_instance(inst: QcspInstance) -> str:
    """Render an instance in the line-based file format."""
    lines = ["qcsp v1"]
    for name, q in zip(inst.names, inst.quants):
        lines.append(f"{q} {name}")
    for clause in inst.general_matrix():
        lines.append("C " + " | ".join(a.text(inst.names) for a in clause))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# normalization


def _ge_ne_product(clause):
    """Rewrite a clause over {=,!=,<,<=,>,>=} into clauses over ge/ne literals.

    A disjunct whose rewriting is a conjunction (=, <, >) splits the clause,
    so the result is a list of literal lists.  Literals are ("ge", a, b) for
    a >= b and ("ne", a, b) for a != b.
    """
    factor_lists = []
    for a in clause:
        if a.left == ZERO or a.right == ZERO:
            raise NotPivotedError("zero marker not allowed in instances")
        if a.op == "!=":
            factor_lists.append([[("ne", a.left, a.right)]])
        elif a.op == ">=":
            factor_lists.append([[("ge", a.left, a.right)]])
        elif a.op == "<=":
            factor_lists.append([[("ge", a.right, a.left)]])
        elif a.op == "=":
            factor_lists.append([[("ge", a.left, a.right)], [("ge", a.right, a.left)]])
        elif a.op == ">":
            factor_lists.append([[("ge", a.left, a.right)], [("ne", a.left, a.right)]])
        elif a.op == "<":
            factor_lists.append([[("ge", a.right, a.left)], [("ne", a.left, a.right)]])
        else:
            raise ParseError(f"unknown operator {a.op!r}")
    out = [[]]
    for factors in factor_lists:
        out = [acc + f for acc in out for f in factors]
    return out


def _to_oh_clause(lits, names) -> Optional[OhClause]:
    """Turn a ge/ne literal clause into an OhClause, or None for a tautology."""
    vars_seen = set()
    ge = []
    ne = []
    for kind, a, b in lits:
        vars_seen.update((a, b))
        if kind == "ne":
            if a != b:  # x != x is a false disjunct, dropped
                ne.append(frozenset((a, b)))
        else:
            ge.append((a, b))
    # a reflexive order disjunct makes the clause trivially true, except when
    # it is the whole clause (kept as the unit x >= x)
    if any(g[0] == g[1] for g in ge):
        if not ne and len(ge) == 1:
            a = ge[0][0]
            return OhClause(a, frozenset(), a)
        return None
    ne = list(dict.fromkeys(ne))
    ge = list(dict.fromkeys(ge))
    if len(ge) > 1:
        raise NotPivotedError(
            "clause has more than one order disjunct: "
            + " | ".join(f"{names[a]} >= {names[b]}" for a, b in ge)
        )
    if not ge and not ne:
        # every disjunct was false; the clause denotes bottom
        pivot = min(vars_seen) if vars_seen else 0
        return OhClause(pivot, frozenset(), None)
    if ge:
        pivot, target = ge[0]
        if any(pivot not in pair for pair in ne):
            raise NotPivotedError(f"no common pivot in clause with order disjunct on {names[pivot]}")
    else:
        candidates = set.intersection(*(set(p) for p in ne))
        if not candidates:
            raise NotPivotedError("no common pivot among disequality disjuncts")
        pivot, target = min(candidates), None
    partners = frozenset(next(iter(pair - {pivot})) for pair in ne)
    if pivot in partners:  # only for pairs {pivot, pivot}, already dropped
        partners = partners - {pivot}
    return OhClause(pivot, partners, target)


def normalize(inst: QcspInstance) -> QcspInstance:
    """Rewrite an instance into the solver dialect over {>=, !=}.

    Equalities split into two unit clauses, strict atoms into an order plus a
    disequality clause.  Duplicate clauses are removed by canonical key.
    Raises :class:`NotPivotedError` when some clause has no common pivot.
    """
    seen = {}
    out = []
    for clause in inst.general_matrix():
        for lits in _ge_ne_product(clause):
            oh = _to_oh_clause(lits, inst.names)
            if oh is None:
                continue
            k = oh.key()
            if k not in seen:
                seen[k] = True
                out.append(oh)
    return QcspInstance(inst.names, inst.quants, tuple(out))
