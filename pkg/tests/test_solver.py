"""Algorithm-level tests for the clause-deriving solver and the compiler."""

import json
import random

import pytest

from ordhorn.formula import OhClause, normalize, parse_instance, print_instance
from ordhorn.game import brute_solve
from ordhorn.generators import parallel_chain, random_mplus_instance
from ordhorn.solver import DialectError, compile_to_mplus, cut_set, solve, up_set

from conftest import make_general, make_instance


@pytest.fixture
def running_oh(running_example):
    return normalize(running_example)


def test_up_set_examples(running_oh):
    # prefix: exists x1 forall x2 exists x3 forall x4 exists x5
    assert up_set(running_oh, 1) == {1, 3}
    assert up_set(running_oh, 4) == set()  # last variable, existential
    assert up_set(running_oh, 0) == {1, 3}  # all universals


def test_cut_set_examples(running_oh):
    assert 3 in cut_set(running_oh, 0, 2)  # x4 in cut(x1, x3)
    assert 1 in cut_set(running_oh, 0, 3)  # x2 in cut(x1, x4)
    assert cut_set(running_oh, 0, 3) == {1}
    # both variables universal: the precedence condition is vacuous
    assert cut_set(running_oh, 1, 3) == {1}
    assert cut_set(running_oh, 3, 1) == {3}


def test_solve_running_example(running_oh):
    verdict = solve(compile_to_mplus(running_oh))
    assert verdict.value is False
    derived = [c.key() for c in verdict.derived]
    first = (0, (1,), 2)  # x1 = x2 implies x1 >= x3
    unit = (0, (), 3)  # x1 >= x4
    assert first in derived and unit in derived
    assert derived.index(first) < derived.index(unit)
    assert verdict.rejecting_clause.key() == unit
    assert verdict.rejecting_pair == (0, 3)


def test_solve_tautological_unit_true():
    inst = normalize(parse_instance("qcsp v1\nE x\nC M+ x x x\n"))
    assert solve(inst).value is True


def test_solve_universal_upper_bound_false():
    inst = normalize(parse_instance("qcsp v1\nE x\nA y\nC M+ y y x\n"))
    verdict = solve(inst)
    assert verdict.value is False
    # the matrix unit y >= x already rejects: nothing needs deriving
    assert verdict.derived == []


def test_solve_empty_matrix_true():
    inst = make_instance("EAE", [])
    assert solve(inst).value is True


def test_solve_dialect_errors():
    with pytest.raises(DialectError):
        solve(make_instance("EEE", [(0, [1, 2], None)]))
    with pytest.raises(DialectError):
        solve(make_instance("E", [(0, [], None)]))
    with pytest.raises(DialectError):
        solve(make_general("EE", [[(0, "!=", 1)]]))


def test_verdict_json_shape(running_oh):
    verdict = solve(compile_to_mplus(running_oh))
    blob = json.loads(json.dumps(verdict.to_json_dict()))
    assert blob["verdict"] is False
    assert blob["rejecting_clause"] == "x1 >= x4"
    assert blob["oracle_calls"] > 0
    assert "x1 != x2 | x1 >= x3" in blob["derived"]


def test_solve_agrees_with_game_oracle_random():
    rng = random.Random(424242)
    for _ in range(400):
        inst = random_mplus_instance(rng, max_vars=6, max_clauses=6)
        assert solve(inst).value == brute_solve(inst).value, print_instance(inst)


def test_derived_clauses_are_entailed():
    # inserting any single derived clause leaves the game verdict unchanged
    rng = random.Random(515151)
    checked = 0
    for _ in range(60):
        inst = random_mplus_instance(rng, max_vars=5, max_clauses=4)
        verdict = solve(inst)
        truth = brute_solve(inst).value
        for c in verdict.derived[:4]:
            expanded = inst.__class__(inst.names, inst.quants, inst.matrix + (c,))
            assert brute_solve(expanded).value == truth
            checked += 1
    assert checked > 40


def test_clause_count_bound():
    for n in (3, 5, 7):
        inst = parallel_chain(n)
        verdict = solve(inst)
        v = inst.n_vars
        assert len(verdict.derived) <= v * v * (v + 1)


def test_log_is_replayable(running_oh):
    """Re-running the oracle test of each fresh derivation reproduces it."""
    from ordhorn.ohsat import OhConjunction, oh_sat
    from ordhorn.formula import Atom
    from ordhorn.solver import _upset_masks, _bits

    compiled = compile_to_mplus(running_oh)
    verdict = solve(compiled)
    ups = _upset_masks(compiled.quants)
    clause_set = list(compiled.matrix)
    for ev in verdict.log:
        conj_atoms = [
            Atom(ev.x, "=", v)
            for v in _bits(ups[ev.u] & ~(1 << ev.x) & ~(1 << ev.z))
        ]
        conj = OhConjunction(
            compiled.n_vars, tuple(clause_set), tuple(conj_atoms + [Atom(ev.x, "<", ev.z)])
        )
        assert not oh_sat(conj), ev
        if not ev.duplicate:
            clause_set.append(ev.clause)


# --- compile_to_mplus ---------------------------------------------------------


def test_compile_single_partner_is_identity():
    inst = make_instance("EEE", [(0, [1], 2)])
    out = compile_to_mplus(inst)
    assert out.matrix == inst.matrix
    assert out.names == inst.names


def test_compile_two_partners_unfolds():
    # (x != y1 | x != y2 | x >= z) becomes the three-triple chain through h
    inst = make_instance("EEEE", [(0, [1, 2], 3)], names=["x", "y1", "y2", "z"])
    out = compile_to_mplus(inst)
    assert out.names[:4] == ("x", "y1", "y2", "z")
    assert len(out.names) == 5
    h = 4
    assert out.quants[h] == "E"
    assert set(c.key() for c in out.matrix) == {
        (0, (1,), h),  # M+(x, y1, h)
        (h, (), 0),  # M+(h, h, x): h >= x
        (h, (2,), 3),  # M+(h, y2, z)
    }


def test_compile_targetless_appends_universal():
    inst = make_instance("EE", [(0, [1], None)])
    out = compile_to_mplus(inst)
    assert out.quants == ("E", "E", "A")
    assert out.matrix == (OhClause(0, frozenset([1]), 2),)


def test_compile_bottom_clause_rejects():
    inst = normalize(make_general("E", [[(0, "!=", 0)]]))
    out = compile_to_mplus(inst)
    assert out.quants == ("E", "A")
    assert solve(out).value is False
    assert brute_solve(out).value is False


def test_compile_preserves_verdict_on_random_embeddings():
    # clauses with >= 2 partners embedded into random instances
    rng = random.Random(616161)
    for _ in range(50):
        inst = random_mplus_instance(rng, max_vars=5, max_clauses=3)
        n = inst.n_vars
        if n < 3:
            continue
        vs = rng.sample(range(n), 3)
        extra = OhClause(vs[0], frozenset(vs[1:]), None)
        if rng.random() < 0.5 and n >= 4:
            vs = rng.sample(range(n), 4)
            extra = OhClause(vs[0], frozenset(vs[1:3]), vs[3])
        host = inst.__class__(inst.names, inst.quants, inst.matrix + (extra,))
        compiled = compile_to_mplus(host)
        assert brute_solve(compiled).value == brute_solve(host).value, print_instance(host)
        assert solve(compiled).value == brute_solve(host).value


def test_compile_fresh_blocks_in_clause_order():
    inst = make_instance("EEEEE", [(0, [1, 2], 3), (1, [2, 3], None)])
    out = compile_to_mplus(inst)
    assert out.quants[5:] == ("E", "A", "E")  # h for clause 0, then z1 and h for clause 1


# --- differential check against a strict reference scan ------------------------


def _reference_solve(inst):
    """Plain transcription of the derivation loop: lexicographic (x, z, u)
    triples, rejection first, a fresh full oracle call per triple, no
    up-set deduplication and no search shortcuts.  Returns (verdict,
    clause-key set) with the key set meaningful on true instances only."""
    from ordhorn.ohsat import OhConjunction, oh_sat
    from ordhorn.formula import Atom
    from ordhorn.solver import _upset_masks, _bits, cut_set

    n = inst.n_vars
    quants = inst.quants
    ups = _upset_masks(quants)
    clauses = {c.key(): c for c in inst.matrix}

    def unit_present(x, z):
        return (x, (), z) in clauses or (z, (), x) in clauses

    changed = True
    while changed:
        changed = False
        for x in range(n):
            for z in range(n):
                if x == z:
                    continue
                for u in range(n):
                    if x < z and quants[z] == "A" and unit_present(x, z):
                        return False, None
                    eqs = [
                        Atom(x, "=", v)
                        for v in _bits(ups[u] & ~(1 << x) & ~(1 << z))
                    ]
                    conj = OhConjunction(
                        n, tuple(clauses.values()), tuple(eqs + [Atom(x, "<", z)])
                    )
                    if not oh_sat(conj):
                        cm = 0
                        for w in cut_set(inst, x, z):
                            cm |= 1 << w
                        partners = frozenset(
                            _bits(ups[u] & ~(1 << x) & ~(1 << z) & ~cm)
                        )
                        c = OhClause(x, partners, z)
                        if c.key() not in clauses:
                            clauses[c.key()] = c
                            changed = True
    return True, frozenset(clauses)


def test_solve_matches_strict_reference():
    rng = random.Random(717171)
    fixpoints = 0
    for _ in range(120):
        inst = random_mplus_instance(rng, max_vars=5, max_clauses=4)
        ref_value, ref_keys = _reference_solve(inst)
        verdict = solve(inst)
        assert verdict.value == ref_value, print_instance(inst)
        if ref_value:
            assert verdict.clause_keys == ref_keys, print_instance(inst)
            fixpoints += 1
    assert fixpoints > 30


def test_solve_empty_instance():
    from ordhorn.formula import QcspInstance

    verdict = solve(QcspInstance((), (), ()))
    assert verdict.value is True
