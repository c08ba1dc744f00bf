"""Weak orders as value abstractions, and the operations pp, ll, lex and duals.

Every temporal constraint depends only on the order type of its arguments,
so rational assignments are represented by weak orders: dense integer ranks
per position, optionally with a marked rank for the constant 0.  The basic
operations of the classification are applied symbolically on these ranks;
the concrete endomorphisms e_{<0}, e_{>0} are never constructed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .formula import ZERO, QfFormula

SYMBOLIC_OPS = ("pp", "dual_pp", "ll", "dual_ll", "lex")

MAX_ENUM_ARITY = 8


class ArityTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class WeakOrder:
    """An ordered partition of positions, lowest level first.

    ``ranks[i]`` is the level of position i; ``zero_rank`` is the level of
    the zero marker on the same scale, if present.  Ranks are kept dense.
    """

    ranks: tuple
    zero_rank: Optional[int] = None

    @property
    def n(self) -> int:
        return len(self.ranks)

    def n_levels(self) -> int:
        vals = set(self.ranks)
        if self.zero_rank is not None:
            vals.add(self.zero_rank)
        return len(vals)

    def levels(self):
        """Positions per level, lowest first; the zero marker appears as 'z'."""
        vals = sorted(set(self.ranks) | ({self.zero_rank} if self.zero_rank is not None else set()))
        out = []
        for v in vals:
            lev = [i for i, r in enumerate(self.ranks) if r == v]
            if v == self.zero_rank:
                lev.append("z")
            out.append(lev)
        return out

    @classmethod
    def from_values(cls, values) -> "WeakOrder":
        """Order type of a tuple of rationals."""
        vals = sorted(set(values))
        remap = {v: i for i, v in enumerate(vals)}
        return cls(tuple(remap[v] for v in values))


def _atom_holds(op: str, a: int, b: int) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def eval_clause(clause, ranks, zero_rank=None) -> bool:
    for atom in clause:
        a = ranks[atom.left] if atom.left != ZERO else zero_rank
        b = ranks[atom.right] if atom.right != ZERO else zero_rank
        if a is None or b is None:
            raise ValueError("atom mentions the zero marker but the order carries none")
        if _atom_holds(atom.op, a, b):
            return True
    return False


def eval_qf(f: QfFormula, w: WeakOrder) -> bool:
    """Truth of a CNF under any rational assignment realizing the weak order."""
    if f.arity > w.n:
        raise ValueError(f"unassigned variable: formula arity {f.arity}, order over {w.n}")
    ranks = w.ranks
    zr = w.zero_rank
    return all(eval_clause(c, ranks, zr) for c in f.clauses)


def _rank_tuples(n: int) -> Iterator[tuple]:
    """All dense rank tuples on n positions, each exactly once."""
    if n == 0:
        yield ()
        return
    for prefix in _rank_tuples(n - 1):
        k = (max(prefix) + 1) if prefix else 0
        for r in range(k):  # join an existing level
            yield prefix + (r,)
        for g in range(k + 1):  # open a new level at gap g
            yield tuple(r if r < g else r + 1 for r in prefix) + (g,)


def enumerate_weak_orders(n: int) -> Iterator[WeakOrder]:
    """Stream every weak order on n positions exactly once."""
    if n > MAX_ENUM_ARITY:
        raise ArityTooLarge(f"arity {n} exceeds enumeration bound {MAX_ENUM_ARITY}")
    for t in _rank_tuples(n):
        yield WeakOrder(t)


def enumerate_marked_orders(n: int) -> Iterator[WeakOrder]:
    """Stream every zero-marked weak order on n positions.

    Enumerates weak orders on n+1 positions and marks the extra one as zero,
    so the position of 0 relative to every level is part of the type.
    """
    if n + 1 > MAX_ENUM_ARITY:
        raise ArityTooLarge(f"arity {n} exceeds marked enumeration bound {MAX_ENUM_ARITY - 1}")
    for t in _rank_tuples(n + 1):
        yield WeakOrder(t[:n], t[n])


def ordered_bell(n: int) -> int:
    """Fubini numbers by the binomial recursion (independent of the enumerator)."""
    from math import comb

    a = [1]
    for m in range(1, n + 1):
        a.append(sum(comb(m, k) * a[m - k] for k in range(1, m + 1)))
    return a[n]


def apply_op(op: str, t1: WeakOrder, t2: WeakOrder) -> WeakOrder:
    """Coordinatewise image order of a binary basic operation.

    pp places positions with t1 <= 0 (ordered by t1) strictly below positions
    with t1 > 0 (ordered by t2); ll refines the blocks lexicographically; lex
    orders by (t1, t2).  Duals mirror the block split at 0.
    """
    if op not in SYMBOLIC_OPS:
        raise ValueError(f"unknown operation {op!r}")
    if t1.n != t2.n:
        raise ValueError("operand orders have different lengths")
    if op != "lex" and t1.zero_rank is None:
        raise ValueError(f"{op} needs a zero marker on its first argument")
    r1, r2, z = t1.ranks, t2.ranks, t1.zero_rank
    keys = []
    for i in range(t1.n):
        if op == "lex":
            keys.append((r1[i], r2[i]))
        elif op == "pp":
            keys.append((0, r1[i], 0) if r1[i] <= z else (1, r2[i], 0))
        elif op == "dual_pp":
            keys.append((0, r2[i], 0) if r1[i] < z else (1, r1[i], 0))
        elif op == "ll":
            keys.append((0, r1[i], r2[i]) if r1[i] <= z else (1, r2[i], r1[i]))
        else:  # dual_ll
            keys.append((0, r2[i], r1[i]) if r1[i] < z else (1, r1[i], r2[i]))
    order = {k: i for i, k in enumerate(sorted(set(keys)))}
    return WeakOrder(tuple(order[k] for k in keys))


def sat_exists(f: QfFormula, bound: dict, free) -> Optional[WeakOrder]:
    """Extend a partial weak order on ``bound`` by the ``free`` positions so
    that ``f`` holds, or return None.

    ``bound`` maps positions to dense ranks.  Used to evaluate existential
    projections over order types.
    """
    free = list(free)
    if len(free) > 6:
        raise ArityTooLarge("too many free positions for exhaustive extension")
    if set(bound) | set(free) != set(range(f.arity)):
        raise ValueError("bound and free positions must cover the formula's variables")
    base = [None] * f.arity
    for v, r in bound.items():
        base[v] = r
    # clauses become checkable once their last variable is placed
    placed_after = {v: i for i, v in enumerate(free)}
    check_at = [[] for _ in range(len(free) + 1)]
    for clause in f.clauses:
        stage = max((placed_after.get(a.left, -1) for a in clause), default=-1)
        stage = max(
            stage, max((placed_after.get(a.right, -1) for a in clause), default=-1)
        )
        check_at[stage + 1].append(clause)

    def rec(i, ranks, n_levels):
        for clause in check_at[i]:
            if not eval_clause(clause, ranks):
                return None
        if i == len(free):
            return WeakOrder(tuple(ranks))
        v = free[i]
        for lev in range(n_levels):  # join an existing level
            ranks2 = list(ranks)
            ranks2[v] = lev
            got = rec(i + 1, ranks2, n_levels)
            if got is not None:
                return got
        for gap in range(n_levels + 1):  # open a new level
            ranks2 = [r if (r is None or r < gap) else r + 1 for r in ranks]
            ranks2[v] = gap
            got = rec(i + 1, ranks2, n_levels + 1)
            if got is not None:
                return got
        return None

    n_levels = (max(bound.values()) + 1) if bound else 0
    return rec(0, base, n_levels)


def relation_of(f: QfFormula, n_exists: int = 0):
    """The set of rank tuples (on the free prefix) satisfying ∃-projected f.

    The formula's variables are the free positions 0..arity-n_exists-1
    followed by n_exists existentially bound ones.
    """
    free_arity = f.arity - n_exists
    out = set()
    for w in enumerate_weak_orders(free_arity):
        if n_exists == 0:
            if eval_qf(f, w):
                out.add(w.ranks)
        else:
            bound = {i: w.ranks[i] for i in range(free_arity)}
            if sat_exists(f, bound, range(free_arity, f.arity)) is not None:
                out.add(w.ranks)
    return out
