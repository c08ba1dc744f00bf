"""Satisfiability of conjunctions of pivoted clauses and order atoms over Q.

The decision procedure is a merge/fire closure: equality atoms merge
variables into classes, a clause *fires* once all its disequality partners
sit in the pivot's class (contributing its order disjunct, or falsity), and
strongly connected components of the resulting <=-graph collapse into single
classes.  At the fixpoint, distinct classes receive distinct values, which
satisfies every clause that never fired.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formula import Atom
from .orders import WeakOrder


@dataclass(frozen=True)
class OhConjunction:
    """A finite conjunction of pivoted clauses and order atoms."""

    n_vars: int
    clauses: tuple
    atoms: tuple


@dataclass
class SatResult:
    model: WeakOrder

    def __bool__(self):
        return True


@dataclass
class UnsatResult:
    """Unsatisfiable, with the merge/fire sequence as a certificate."""

    certificate: list

    def __bool__(self):
        return False


def _normalize_atoms(atoms):
    eqs, les, lts, nes = [], [], [], []
    for a in atoms:
        if a.op == "=":
            eqs.append((a.left, a.right))
        elif a.op == "!=":
            nes.append((a.left, a.right))
        elif a.op == "<=":
            les.append((a.left, a.right))
        elif a.op == "<":
            lts.append((a.left, a.right))
        elif a.op == ">=":
            les.append((a.right, a.left))
        elif a.op == ">":
            lts.append((a.right, a.left))
        else:
            raise ValueError(f"unknown atom operator {a.op!r}")
    return eqs, les, lts, nes


def _tarjan_sccs(nodes, adj):
    """Iterative Tarjan; returns the list of SCCs (each a list of nodes)."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(comp)
    return sccs


def closure(n, pivots, pmasks, targets, eqs, les, lts, nes, by_pivot=None):
    """Core closure; clause i is (pivots[i], pmasks[i], targets[i]),
    target -1 meaning none and -2 marking a retired entry.

    With ``by_pivot`` (a map from pivot variable to clause ids), only clauses
    whose pivot class grew are re-examined; callers of this mode must pass
    partner-free clauses as plain edges instead.  Returns
    (parent, members, None, fired_edges) on success or
    (None, None, certificate, None) on refutation.
    """
    parent = list(range(n))
    members = [1 << i for i in range(n)]
    events = []
    changed_mask = 0

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(a, b):
        nonlocal changed_mask
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        if members[ra].bit_count() < members[rb].bit_count():
            ra, rb = rb, ra
        parent[rb] = ra
        members[ra] |= members[rb]
        changed_mask |= members[ra]
        events.append(("merge", rb, ra))
        return True

    for a, b in eqs:
        union(a, b)

    fired = set()
    fired_edges = []
    n_clauses = len(pivots)
    rounds = 0
    while True:
        rounds += 1
        # each non-final round merges at least two classes
        assert rounds <= n + 2, "closure exceeded its merge-round bound"
        if by_pivot is None:
            scan = range(n_clauses)
        else:
            scan = []
            m = changed_mask
            while m:
                bit = m & -m
                scan.extend(by_pivot.get(bit.bit_length() - 1, ()))
                m ^= bit
        changed_mask = 0
        for i in scan:
            if i in fired or targets[i] == -2:
                continue
            r = find(pivots[i])
            if pmasks[i] & ~members[r] == 0:
                fired.add(i)
                events.append(("fire", i))
                if targets[i] < 0:
                    events.append(("empty-clause", i))
                    return None, None, events, None
                fired_edges.append((targets[i], pivots[i]))
        adj = {}
        for a, b in les:
            adj.setdefault(find(a), set()).add(find(b))
        for a, b in lts:
            adj.setdefault(find(a), set()).add(find(b))
        for a, b in fired_edges:
            adj.setdefault(find(a), set()).add(find(b))
        roots = {find(i) for i in range(n)}
        merged = False
        for comp in _tarjan_sccs(sorted(roots), {k: sorted(v) for k, v in adj.items()}):
            if len(comp) > 1:
                base = comp[0]
                for other in comp[1:]:
                    merged |= union(base, other)
        if not merged:
            break

    for a, b in lts:
        if find(a) == find(b):
            events.append(("strict-cycle", a, b))
            return None, None, events, None
    for a, b in nes:
        if find(a) == find(b):
            events.append(("forced-equal", a, b))
            return None, None, events, None
    return parent, members, None, fired_edges


def _model_from_classes(n, parent, members, les, lts, fired_edges):
    """Strictly increasing levels along a topological order of the classes."""
    import heapq

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    roots = sorted({find(i) for i in range(n)})
    succ = {r: set() for r in roots}
    indeg = {r: 0 for r in roots}
    for a, b in list(les) + list(lts) + list(fired_edges):
        ra, rb = find(a), find(b)
        if ra != rb and rb not in succ[ra]:
            succ[ra].add(rb)
            indeg[rb] += 1
    heap = [r for r in roots if indeg[r] == 0]
    heapq.heapify(heap)
    rank = {}
    level = 0
    while heap:
        r = heapq.heappop(heap)
        rank[r] = level
        level += 1
        for s in sorted(succ[r]):
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(heap, s)
    assert len(rank) == len(roots), "class graph was not acyclic after closure"
    return WeakOrder(tuple(rank[find(i)] for i in range(n)))


def oh_sat(conj: OhConjunction):
    """Decide a conjunction; SAT answers carry a witnessing weak order."""
    n = conj.n_vars
    eqs, les, lts, nes = _normalize_atoms(conj.atoms)
    pivots = [c.pivot for c in conj.clauses]
    pmasks = []
    targets = []
    for c in conj.clauses:
        m = 0
        for p in c.partners:
            m |= 1 << p
        pmasks.append(m)
        targets.append(c.target if c.target is not None else -1)
    parent, members, cert, fired_edges = closure(n, pivots, pmasks, targets, eqs, les, lts, nes)
    if parent is None:
        return UnsatResult(cert)
    return SatResult(_model_from_classes(n, parent, members, les, lts, fired_edges))


_NEGATIONS = {
    ">=": [("<",)],
    "<=": [(">",)],
    ">": [("<=",)],
    "<": [(">=",)],
    "!=": [("=",)],
    "=": [("<",), (">",)],
}


def entails(conj: OhConjunction, atom: Atom) -> bool:
    """True iff the conjunction entails the atom over linear orders.

    Checked as unsatisfiability of the conjunction with the negated atom;
    negated equality splits into two oracle calls.
    """
    for (neg_op,) in _NEGATIONS[atom.op]:
        extended = OhConjunction(
            conj.n_vars, conj.clauses, conj.atoms + (Atom(atom.left, neg_op, atom.right),)
        )
        if oh_sat(extended):
            return False
    return True
