"""Structural analysis of temporal relations: preservation by the basic
operations, Ord-Horn and guarded-Ord-Horn syntax, formula surgery, and the
resulting complexity verdict.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .formula import Atom, QfFormula
from .orders import (
    ArityTooLarge,
    WeakOrder,
    apply_op,
    enumerate_marked_orders,
    enumerate_weak_orders,
    eval_qf,
    relation_of,
)
from .relations import TemporalRelation, catalogue

MAX_SEMANTIC_ARITY = 6

VERDICT_P = "P"
VERDICT_HARD = "coNP-hard-unless-GOH-definable"


class HypothesisError(ValueError):
    """A gadget input violates its sandwich hypothesis."""


class NoValidIndexError(RuntimeError):
    """No single order disjunct preserves the relation; for Ord-Horn
    inputs one must always exist, so raising this fails the suite."""


@dataclass
class PreservationResult:
    preserved: bool
    witness: Optional[tuple] = None  # (t1, t2) violating weak orders

    def __bool__(self):
        return self.preserved


def _guard_arity(r: TemporalRelation):
    if r.arity > MAX_SEMANTIC_ARITY:
        raise ArityTooLarge(
            f"arity {r.arity} exceeds the semantic-check bound {MAX_SEMANTIC_ARITY}"
        )


def is_preserved_by(r: TemporalRelation, op: str) -> PreservationResult:
    """Exhaustive polymorphism check over order-type pairs.

    The first argument ranges over zero-marked weak orders because pp and ll
    branch on the sign of their first argument; the witness returned is the
    lexicographically first violating pair in enumeration order.
    """
    _guard_arity(r)
    f = r.defn
    if op == "lex":
        firsts = [w for w in enumerate_weak_orders(r.arity) if eval_qf(f, w)]
    else:
        firsts = [w for w in enumerate_marked_orders(r.arity) if eval_qf(f, w)]
    seconds = [w for w in enumerate_weak_orders(r.arity) if eval_qf(f, w)]
    for t1 in firsts:
        for t2 in seconds:
            image = apply_op(op, t1, t2)
            if not eval_qf(f, image):
                return PreservationResult(False, (t1, t2))
    return PreservationResult(True)


def is_oh(r: TemporalRelation) -> bool:
    """Ord-Horn membership via preservation by ll and dual ll."""
    return bool(is_preserved_by(r, "ll")) and bool(is_preserved_by(r, "dual_ll"))


def _oriented(clause):
    """Rewrite <= to >= (and > to <) so pivots sit on the left; other ops kept."""
    out = []
    for a in clause:
        if a.op == "<=":
            out.append(Atom(a.right, ">=", a.left))
        elif a.op == "<":
            out.append(Atom(a.right, ">", a.left))
        else:
            out.append(a)
    return out


def ppsynt_shape(f: QfFormula) -> bool:
    """Syntactic test for the {!=, >=} clause shape with a common pivot."""
    for clause in f.clauses:
        ne_pairs = []
        ge_lefts = []
        ok = True
        for a in _oriented(clause):
            if a.op == "!=":
                ne_pairs.append({a.left, a.right})
            elif a.op == ">=":
                ge_lefts.append(a.left)
            else:
                ok = False
                break
        if not ok:
            return False
        candidates = set(range(f.arity))
        for pair in ne_pairs:
            candidates &= pair
        if ge_lefts:
            candidates &= set(ge_lefts)
            if len(set(ge_lefts)) > 1:
                return False
        if not candidates:
            return False
    return True


def oh_shape(f: QfFormula) -> bool:
    """Syntactic Ord-Horn shape: after rewriting into {!=, >=} clauses, each
    clause carries at most one order disjunct."""
    from .formula import _ge_ne_product

    for clause in f.clauses:
        for lits in _ge_ne_product(clause):
            if sum(1 for kind, a, b in lits if kind == "ge" and a != b) > 1:
                # a reflexive order disjunct makes the clause trivially true
                if not any(kind == "ge" and a == b for kind, a, b in lits):
                    return False
    return True


# ---------------------------------------------------------------------------
# guarded Ord-Horn recognition


def _goh_normal(clause):
    """Atoms as ("le"|"lt"|"ne", a, b); None when the clause leaves the
    {<=, <, !=} fragment."""
    out = []
    for a in clause:
        if a.op == "<=":
            out.append(("le", a.left, a.right))
        elif a.op == ">=":
            out.append(("le", a.right, a.left))
        elif a.op == "<":
            out.append(("lt", a.left, a.right))
        elif a.op == ">":
            out.append(("lt", a.right, a.left))
        elif a.op == "!=":
            out.append(("ne", a.left, a.right))
        else:
            return None
    return tuple(sorted(out))


def _goh_base(clause) -> bool:
    kinds = [k for k, _, _ in clause]
    if all(k == "ne" for k in kinds):
        return True
    if len(clause) == 1 and kinds[0] == "le":
        return True
    lts = [(a, b) for k, a, b in clause if k == "lt"]
    if len(lts) == 1 and kinds.count("le") == 0:
        x, y = lts[0]
        return all(x in (a, b) or y in (a, b) for k, a, b in clause if k == "ne")
    return False


def goh_syntactic(f: QfFormula) -> bool:
    """Sound-only recognizer for the guarded Ord-Horn grammar.

    Backtracks over groupings: a pure-<= clause may guard companions that
    each contain its disequality counterparts, whose residues must again
    parse.  A failed parse does not prove non-definability.
    """
    clauses = []
    for c in f.clauses:
        norm = _goh_normal(c)
        if norm is None:
            return False
        clauses.append(norm)

    memo = {}

    def parse(group) -> bool:
        if not group:
            return True
        key = tuple(sorted(group))
        if key in memo:
            return memo[key]
        memo[key] = False  # cycle guard
        result = False
        if all(_goh_base(c) for c in group):
            result = True
        else:
            for gi, guard in enumerate(group):
                if not guard or any(k != "le" for k, _, _ in guard):
                    continue
                needed = {("ne", min(a, b), max(a, b)) for _, a, b in guard}
                rest = group[:gi] + group[gi + 1 :]
                candidates = [
                    i
                    for i, c in enumerate(rest)
                    if needed <= {("ne", min(a, b), max(a, b)) if k == "ne" else (k, a, b) for k, a, b in c}
                ]
                for size in range(1, len(candidates) + 1):
                    for combo in itertools.combinations(candidates, size):
                        residues = []
                        for i in combo:
                            res = [
                                (k, a, b)
                                for k, a, b in rest[i]
                                if not (k == "ne" and ("ne", min(a, b), max(a, b)) in needed)
                            ]
                            residues.append(tuple(sorted(res)))
                        if any(not res for res in residues):
                            continue  # an empty residue would certify falsity, not truth
                        outside = tuple(c for i, c in enumerate(rest) if i not in combo)
                        if parse(tuple(residues)) and parse(outside):
                            result = True
                            break
                    if result:
                        break
                if result:
                    break
        memo[key] = result
        return result

    return parse(tuple(clauses))


# ---------------------------------------------------------------------------
# formula surgery


def _relation_set(f: QfFormula):
    return relation_of(f)


def elim_min(f: QfFormula) -> QfFormula:
    """Shrink every multi-target order block to a single disjunct.

    For each clause whose >=-disjuncts share a pivot, the first index whose
    lone survival preserves the relation is kept; Ord-Horn inputs always
    admit one.
    """
    reference = _relation_set(f)
    clauses = [list(_oriented(c)) for c in f.clauses]
    out = []
    for ci, clause in enumerate(clauses):
        ge = [a for a in clause if a.op == ">="]
        rest = [a for a in clause if a.op != ">="]
        distinct_targets = list(dict.fromkeys(ge))
        if len(distinct_targets) <= 1:
            out.append(tuple(rest + distinct_targets))
            continue
        if len({a.left for a in distinct_targets}) > 1:
            raise ValueError("order disjuncts in one clause have different pivots")
        chosen = None
        for cand in distinct_targets:
            trial = [tuple(c) for c in out]
            trial.append(tuple(rest + [cand]))
            trial.extend(tuple(c) for c in clauses[ci + 1 :])
            if _relation_set(QfFormula(f.arity, tuple(trial))) == reference:
                chosen = cand
                break
        if chosen is None:
            raise NoValidIndexError("no single order disjunct preserves the relation")
        out.append(tuple(rest + [chosen]))
    result = QfFormula(f.arity, tuple(out))
    assert _relation_set(result) == reference, "elimination changed the relation"
    return result


@dataclass(frozen=True)
class QuantifiedFormula:
    """A formula with a trailing quantifier block over auxiliary variables.

    Free variables are 0..free_arity-1; bound ones follow in prefix order
    with quantifiers from ``block`` ('E' or 'A').
    """

    free_arity: int
    block: tuple
    formula: QfFormula

    def n_exists(self):
        return sum(1 for q in self.block if q == "E")


def pp_def_mplus(k: int) -> QuantifiedFormula:
    """The recursive pp-definition of the (k+2)-ary relation
    (x != y1 v ... v x != yk v x >= z) from M+ triples."""
    if not 1 <= k <= 5:
        raise ValueError("k must be in 1..5")
    x = 0
    ys = list(range(1, k + 1))
    z = k + 1
    mplus = catalogue("M+").defn.clauses

    def app(a, b, c):
        sub = {0: a, 1: b, 2: c}
        return [tuple(Atom(sub[at.left], at.op, sub[at.right]) for at in cl) for cl in mplus]

    clauses = []
    if k == 1:
        clauses += app(x, ys[0], z)
        hs = []
    else:
        hs = list(range(k + 2, 2 * k + 1))  # h_2 .. h_k
        prev = x
        for i in range(k - 1):
            h = hs[i]
            clauses += app(prev, ys[i], h)
            clauses += app(h, h, x)
            prev = h
        clauses += app(prev, ys[-1], z)
    return QuantifiedFormula(k + 2, tuple("E" for _ in hs), QfFormula(k + 2 + len(hs), tuple(clauses)))


def mu_relation(k: int):
    """The target relation of pp_def_mplus as a set of rank tuples."""
    clause = tuple([Atom(0, "!=", i) for i in range(1, k + 1)] + [Atom(0, ">=", k + 1)])
    return relation_of(QfFormula(k + 2, (clause,)))


def projected_relation(q: QuantifiedFormula):
    """Relation of an existential-block formula over the free positions."""
    if any(b != "E" for b in q.block):
        raise ValueError("only existential blocks can be projected by enumeration")
    return relation_of(q.formula, n_exists=len(q.block))


def relation_via_game(q: QuantifiedFormula):
    """Relation of a quantified-block formula over the free positions.

    Decided one order type at a time by the game oracle; sound because the
    defined relation is a union of complete order types, so membership of
    one realizing tuple settles the whole type.
    """
    from .formula import QcspInstance
    from .game import brute_solve

    names = tuple(f"v{i}" for i in range(q.formula.arity))
    quants = tuple(["E"] * q.free_arity) + q.block
    out = set()
    for w in enumerate_weak_orders(q.free_arity):
        type_clauses = []
        for i in range(q.free_arity):
            for j in range(i + 1, q.free_arity):
                if w.ranks[i] == w.ranks[j]:
                    type_clauses.append((Atom(i, "=", j),))
                elif w.ranks[i] < w.ranks[j]:
                    type_clauses.append((Atom(i, "<", j),))
                else:
                    type_clauses.append((Atom(i, ">", j),))
        inst = QcspInstance(names, quants, tuple(type_clauses) + q.formula.clauses)
        if brute_solve(inst).value:
            out.add(w.ranks)
    return out


def gadget_relation(q: QuantifiedFormula):
    """Relation of a gadget, projecting existential blocks directly and
    falling back to the game oracle for universal ones."""
    if all(b == "E" for b in q.block):
        return projected_relation(q)
    return relation_via_game(q)


# ---------------------------------------------------------------------------
# sandwiches and the gadget constructions


@dataclass
class SandwichResult:
    ok: bool
    witness: Optional[tuple] = None  # (which, ranks)

    def __bool__(self):
        return self.ok


def verify_sandwich(r: TemporalRelation, lower: TemporalRelation, upper: TemporalRelation):
    """Containment lower <= r <= upper by weak-order enumeration."""
    if not (r.arity == lower.arity == upper.arity):
        raise ValueError("sandwich arities differ")
    _guard_arity(r)
    for w in enumerate_weak_orders(r.arity):
        if eval_qf(lower.defn, w) and not eval_qf(r.defn, w):
            return SandwichResult(False, ("lower", w.ranks))
        if eval_qf(r.defn, w) and not eval_qf(upper.defn, w):
            return SandwichResult(False, ("upper", w.ranks))
    return SandwichResult(True)


def _is_separated_strict_m(r):
    return (verify_sandwich(r, catalogue("lrGSM<"), catalogue("SSM")).ok
            or verify_sandwich(r, catalogue("rlGSM<"), catalogue("SSM")).ok)


def _is_dual_strict_m(r):
    return verify_sandwich(r, catalogue("GVM<-"), catalogue("M<-")).ok


def _is_separated_disjunction(r):
    return verify_sandwich(r, catalogue("GSN"), catalogue("NEQ2")).ok


def _is_separated_m(r):
    in_upper = verify_sandwich(r, r, catalogue("SM")).ok
    has_lower = (verify_sandwich(r, catalogue("lrGSM"), r).ok
                 or verify_sandwich(r, catalogue("rlGSM"), r).ok)
    not_strict = not verify_sandwich(r, r, catalogue("SSM")).ok
    not_sd = not verify_sandwich(r, r, catalogue("SD")).ok
    return in_upper and has_lower and not_strict and not_sd


def _is_dual_m(r):
    return verify_sandwich(r, catalogue("GM-"), catalogue("M-")).ok


def _subst(clauses, mapping):
    return [tuple(Atom(mapping[a.left], a.op, mapping[a.right]) for a in c) for c in clauses]


def short_tool_gadget(item: int, inputs=(), which: str = "le") -> QuantifiedFormula:
    """The gadget formulas of the hardness toolbox.

    Item 1 builds <=, != or < from M+ alone (select with ``which``); items
    2-5 climb from sandwich relations to the four-ary order-disequality
    relation, checking each hypothesis before constructing.
    """
    mplus = catalogue("M+").defn.clauses
    if item == 1:
        if which == "le":  # x <= y
            return QuantifiedFormula(2, (), QfFormula(2, tuple(_subst(mplus, {0: 1, 1: 1, 2: 0}))))
        if which == "ne":  # forall z: M+(x, y, z)
            return QuantifiedFormula(2, ("A",), QfFormula(3, tuple(_subst(mplus, {0: 0, 1: 1, 2: 2}))))
        if which == "lt":
            clauses = _subst(mplus, {0: 0, 1: 1, 2: 2}) + _subst(mplus, {0: 1, 1: 1, 2: 0})
            return QuantifiedFormula(2, ("A",), QfFormula(3, tuple(clauses)))
        raise ValueError("item 1 selects one of 'le', 'ne', 'lt'")
    if item == 2:
        (r,) = inputs
        if r.arity == 4:
            if not _is_separated_m(r):
                raise HypothesisError("input is not a separated M-relation")
            extra = (Atom(2, "!=", 3),)
        elif r.arity == 3:
            if not _is_dual_m(r):
                raise HypothesisError("input is not a dual M-relation")
            extra = (Atom(1, "!=", 2),)
        else:
            raise HypothesisError("item 2 expects a ternary or quaternary relation")
        return QuantifiedFormula(r.arity, (), QfFormula(r.arity, r.defn.clauses + (extra,)))
    if item == 3:
        (r,) = inputs
        if not _is_separated_strict_m(r):
            raise HypothesisError("input is not a separated strict M-relation")
        a, b = 4, 5
        clauses = _subst(r.defn.clauses, {0: 1, 1: 0, 2: a, 3: b})
        clauses += _subst(r.defn.clauses, {0: 3, 1: 2, 2: b, 3: a})
        return QuantifiedFormula(4, ("E", "E"), QfFormula(6, tuple(clauses)))
    if item == 4:
        (r,) = inputs
        if not _is_dual_strict_m(r):
            raise HypothesisError("input is not a dual strict M-relation")
        x1, y1, x2, y2, h = 0, 1, 2, 3, 4
        clauses = _subst(mplus, {0: x1, 1: y1, 2: h})
        clauses += _subst(r.defn.clauses, {0: x2, 1: y2, 2: h})
        clauses.append((Atom(x1, "<=", x2),))
        return QuantifiedFormula(4, ("E",), QfFormula(5, tuple(clauses)))
    if item == 5:
        (r,) = inputs
        if not _is_separated_disjunction(r):
            raise HypothesisError("input is not a separated disjunction of disequalities")
        # free variables ordered as the target relation (y1 != x1 v y2 != x2) ^ (x1 < x2)
        y1, x1, y2, x2, v1, v2 = 0, 1, 2, 3, 4, 5
        clauses = _subst(r.defn.clauses, {0: x1, 1: v1, 2: x2, 3: v2})
        # guards shrink the separated disjunction to its guarded variant
        clauses.append((Atom(x1, "<=", v1),))
        clauses.append((Atom(x2, "<=", v2),))
        for lo in (x1, v1):
            for hi in (x2, v2):
                clauses.append((Atom(lo, "<", hi),))
        clauses += _subst(mplus, {0: y1, 1: x1, 2: v1})
        clauses += _subst(mplus, {0: y2, 1: x2, 2: v2})
        return QuantifiedFormula(4, ("E", "E"), QfFormula(6, tuple(clauses)))
    raise ValueError("item must be 1..5")


# ---------------------------------------------------------------------------
# the combined report


@dataclass
class ClassReport:
    oh_semantic: bool
    oh_syntactic: bool
    pp_preserved: bool
    dual_pp_preserved: bool
    ppsynt_shape: bool
    goh_syntactic: bool
    witnesses: dict
    verdict: str

    def to_json_dict(self):
        wit = {
            op: {"t1": _levels(t1), "t2": _levels(t2)}
            for op, (t1, t2) in self.witnesses.items()
        }
        return {
            "oh_semantic": self.oh_semantic,
            "oh_syntactic": self.oh_syntactic,
            "pp_preserved": self.pp_preserved,
            "dual_pp_preserved": self.dual_pp_preserved,
            "ppsynt_shape": self.ppsynt_shape,
            "goh_syntactic": self.goh_syntactic,
            "witnesses": wit,
            "verdict": self.verdict,
        }


def _levels(w: WeakOrder):
    return [[str(p) for p in lev] for lev in w.levels()]


def classify(rels) -> ClassReport:
    """Flags and the tractability verdict for a finite set of relations.

    The hard verdict is conditional: GOH-definability has no decision
    procedure here, so a failed parse never certifies hardness on its own.
    """
    witnesses = {}
    pp_all = dual_all = True
    oh_sem = oh_syn = shape_all = goh_all = True
    for idx, r in enumerate(rels):
        res = is_preserved_by(r, "pp")
        if not res:
            pp_all = False
            witnesses.setdefault(f"pp[{idx}]", res.witness)
        res = is_preserved_by(r, "dual_pp")
        if not res:
            dual_all = False
            witnesses.setdefault(f"dual_pp[{idx}]", res.witness)
        if not is_oh(r):
            oh_sem = False
        if not oh_shape(r.defn):
            oh_syn = False
        if not ppsynt_shape(r.defn):
            shape_all = False
        if not goh_syntactic(r.defn):
            goh_all = False
    verdict = VERDICT_P if (pp_all or dual_all or goh_all) else VERDICT_HARD
    return ClassReport(
        oh_semantic=oh_sem,
        oh_syntactic=oh_syn,
        pp_preserved=pp_all,
        dual_pp_preserved=dual_all,
        ppsynt_shape=shape_all,
        goh_syntactic=goh_all,
        witnesses=witnesses,
        verdict=verdict,
    )


def reverse(r: TemporalRelation) -> TemporalRelation:
    """Flip every order atom; pp-preservation turns into dual-pp-preservation."""
    flip = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "=", "!=": "!="}
    clauses = tuple(
        tuple(Atom(a.left, flip[a.op], a.right) for a in c) for c in r.defn.clauses
    )
    return TemporalRelation(r.arity, QfFormula(r.arity, clauses), r.name + "_rev")
