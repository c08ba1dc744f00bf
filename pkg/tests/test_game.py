"""The brute-force game oracle and the adversary harness."""

import random

import pytest

import ordhorn.game as game
from ordhorn.formula import Atom, normalize, parse_instance
from ordhorn.game import Move, ResourceLimitError, brute_solve, play_against
from ordhorn.generators import random_mplus_instance

from conftest import make_general, make_instance, random_general_instance


def test_density_and_unboundedness():
    assert brute_solve(make_general("AE", [[(1, ">", 0)]])).value is True
    assert brute_solve(make_general("EA", [[(1, ">", 0)]])).value is False


def test_no_maximum_in_q():
    # exists x forall y: y >= x fails; forall y exists x: x >= y holds
    inst = normalize(parse_instance("qcsp v1\nE x\nA y\nC M+ y y x\n"))
    assert brute_solve(inst).value is False
    inst2 = make_instance("AE", [(1, [], 0)])
    assert brute_solve(inst2).value is True


def test_running_example_false(running_example):
    assert brute_solve(running_example).value is False


def test_equality_matters():
    # forall x exists y: (y = x) is winnable, (y != x) likewise; both at once is not
    assert brute_solve(make_general("AE", [[(1, "=", 0)]])).value is True
    assert brute_solve(make_general("AE", [[(1, "!=", 0)]])).value is True
    assert brute_solve(make_general("AE", [[(1, "=", 0)], [(1, "!=", 0)]])).value is False


def test_max_vars_guard():
    inst = make_general("E" * 13, [])
    with pytest.raises(ResourceLimitError):
        brute_solve(inst)


def test_max_nodes_guard(running_example):
    with pytest.raises(ResourceLimitError):
        brute_solve(running_example, max_nodes=3)


def test_monotone_adding_clause_never_turns_true():
    rng = random.Random(21)
    for _ in range(200):
        inst = random_mplus_instance(rng, max_vars=5, max_clauses=4)
        base = brute_solve(inst).value
        extra = random_mplus_instance(rng, max_vars=inst.n_vars, max_clauses=1)
        if extra.n_vars != inst.n_vars or not extra.matrix:
            continue
        bigger = inst.__class__(inst.names, inst.quants, inst.matrix + extra.matrix)
        after = brute_solve(bigger).value
        assert not (base is False and after is True)


def _reversed_instance(inst):
    flip = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "=", "!=": "!="}
    matrix = tuple(
        tuple(Atom(a.left, flip[a.op], a.right) for a in c) for c in inst.general_matrix()
    )
    return inst.__class__(inst.names, inst.quants, matrix)


def test_duality_preserves_verdict():
    rng = random.Random(22)
    for _ in range(150):
        inst = random_general_instance(rng, max_vars=5, max_clauses=3)
        assert brute_solve(inst).value == brute_solve(_reversed_instance(inst)).value


def test_move_order_does_not_change_verdicts(monkeypatch):
    rng = random.Random(23)
    instances = [random_general_instance(rng, max_vars=5, max_clauses=3) for _ in range(60)]
    baseline = [brute_solve(i).value for i in instances]
    original = game.legal_moves
    monkeypatch.setattr(game, "legal_moves", lambda k: list(reversed(original(k))))
    assert [brute_solve(i).value for i in instances] == baseline


def test_memoization_projects_dead_variables():
    # many dead universals: node count must stay far below the raw tree size
    inst = make_general("E" + "A" * 8 + "E", [[(9, ">=", 0)]])
    verdict = brute_solve(inst)
    assert verdict.value is True
    assert verdict.nodes < 2000


def test_emit_strategy_structure():
    inst = make_general("AE", [[(1, ">", 0)]])
    verdict = brute_solve(inst, emit_strategy=True)
    assert verdict.value is True
    tree = verdict.strategy
    assert tree["var"] == "x1"
    assert set(tree["branches"]) == {"gap0"}
    assert tree["branches"]["gap0"]["var"] == "x2"


def test_play_against_trivial_win():
    inst = make_general("EA", [[(0, ">=", 0)]])
    out = play_against(inst, lambda var, order: Move("gap", 0))
    assert out.win


def test_play_against_false_instance_always_loses(running_example):
    # on a false instance every callback loses; here: always play a fresh top gap
    out = play_against(running_example, lambda var, order: Move("gap", order.n_levels()))
    assert not out.win
    assert out.violated
    assert out.trace


def test_play_against_propagates_callback_errors(running_example):
    class Boom(RuntimeError):
        pass

    def ep(var, order):
        raise Boom()

    with pytest.raises(Boom):
        play_against(running_example, ep)


def test_brute_agrees_with_itself_on_oh_vs_general(running_example):
    oh = normalize(running_example)
    assert brute_solve(running_example).value == brute_solve(oh).value


def test_leaf_evaluation_invariant_under_realization():
    # replaying full-prefix leaves with rational assignments realizing the
    # same weak order never changes the matrix outcome
    from ordhorn.orders import WeakOrder, enumerate_weak_orders, eval_clause

    rng = random.Random(24)
    for _ in range(30):
        inst = random_general_instance(rng, max_vars=4, max_clauses=3)
        matrix = inst.general_matrix()
        for w in enumerate_weak_orders(inst.n_vars):
            by_type = all(eval_clause(c, w.ranks) for c in matrix)
            for _ in range(3):
                cuts = sorted(rng.sample(range(10_000), w.n_levels()))
                values = tuple(cuts[r] for r in w.ranks)
                again = WeakOrder.from_values(values)
                assert all(eval_clause(c, again.ranks) for c in matrix) == by_type
