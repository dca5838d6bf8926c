"""Saturation solver: exactness against the engine, fixpoint properties,
representation spaces, and the cardinality bound."""

import random

import pytest

from consfree.engine import Budget, search_data_normal_forms
from consfree.solver import (
    NotConsFree,
    NotProductConsFree,
    ReprSpaceTooLarge,
    Solver,
    Stmt,
    build_space,
    within_cardinality_bound,
    enumerate_reprs,
    repr_cardinality,
    solve,
    solve_product,
)
from consfree.syntax import parse_atrs
from consfree.terms import Arrow, Product, Sort, print_term
from consfree.validation import BSet, NotBasic, compute_B, prune_ho_constructors

from conftest import load, term

SATURATING = [
    ("majority.atrs", "majority (1 ; 0 ; [])"),
    ("majority.atrs", "majority (0 ; 1 ; 1 ; [])"),
    ("contains1.atrs", "decide (0 ; 1 ; [])"),
    ("parity1s.atrs", "decide (1 ; 1 ; 1 ; [])"),
    ("allzeros.atrs", "decide (0 ; 0 ; [])"),
    ("evenlen.atrs", "decide (1 ; 0 ; 1 ; [])"),
    ("firstis1.atrs", "decide (0 ; 1 ; [])"),
    ("lastis1.atrs", "decide (1 ; 0 ; [])"),
    ("ho_apply.atrs", "decide []"),
    ("ho_apply.atrs", "decide (1 ; [])"),
    ("consfree_fsucc.atrs", "main (s (s o)) (s (s o))"),
]


@pytest.mark.parametrize("name,text", SATURATING)
def test_solve_matches_the_engine(name, text):
    atrs = load(name)
    s = term(text, atrs)
    oracle = search_data_normal_forms(s, atrs, "free", Budget(1000, 100000, 5000))
    assert not oracle.exhausted
    result = solve(atrs, s)
    assert set(result.normal_forms) == set(oracle.data_normal_forms)


def test_solve_rejects_non_cons_free(succ_system):
    with pytest.raises(NotConsFree):
        solve(succ_system, term("succ (1 ; [])", succ_system))


def test_solve_rejects_non_basic(majority):
    with pytest.raises(NotBasic):
        solve(majority, term("1 ; []", majority))


def test_solve_respects_the_space_budget(majority):
    with pytest.raises(ReprSpaceTooLarge) as err:
        solve(majority, term("majority (1 ; 0 ; [])", majority), space_budget=4)
    assert err.value.cardinality > 4


def test_pruned_system_solves_like_the_unpruned_one():
    # a higher-order constructor and its only rule are removable without
    # changing any basic term's normal forms
    text = (
        "sort nat symb ;\ncons o : nat ;\ncons s : nat => nat ;\n"
        "cons 0 : symb ;\ncons 1 : symb ;\n"
        "cons c : (nat => symb) => nat ;\n"
        "fun f : nat => symb ;\nfun g : nat => symb ;\nfun h : nat => nat => symb ;\n"
        "rule f (c F) -> F o ;\n"
        "rule g o -> 0 ;\nrule g (s n) -> 1 ;\n"
        "rule h n m -> g n ;\nrule h n m -> g m ;\n"
    )
    atrs = parse_atrs(text)
    pruned, removed = prune_ho_constructors(atrs)
    assert removed == ["c"]
    basics = ["g o", "g (s o)", "h o (s o)", "h (s o) (s o)", "h o o"]
    for text in basics:
        s = term(text, atrs)
        assert solve(atrs, s).normal_forms == solve(pruned, s).normal_forms


def test_statement_count_and_spaces_on_majority(majority):
    result = solve(majority, term("majority (1 ; 0 ; [])", majority))
    assert result.statements == 1168
    solver = result.solver
    assert solver.space(Sort("symb")).card == 4
    assert solver.space(Sort("list")).card == 8


def test_confirmed_monotone_and_terminating(majority):
    result = solve(majority, term("majority (1 ; 0 ; [])", majority))
    solver = result.solver
    assert result.steps <= result.statements + 1
    for stmt, confirmed_at in solver.confirmed_at.items():
        for i in range(0, result.steps + 2):
            assert solver.conf(i, stmt) == (0 < confirmed_at <= i)


def test_early_confirmation_of_the_compare_statement(majority):
    s = term("majority (1 ; 0 ; [])", majority)
    solver = Solver(majority, compute_B(s, majority))
    a1 = frozenset({term("0 ; []", majority)})
    a2 = frozenset({term("0 ; []", majority), term("[]", majority)})
    hit = Stmt("cmp", (a1, a2), term("0", majority))
    miss = Stmt("cmp", (a1, a2), term("1", majority))
    assert solver.conf(1, hit)
    assert not solver.conf(1, miss)
    assert not solver.conf(0, hit)


def test_solve_product_on_a_projection():
    atrs = parse_atrs(
        "pairing ;\nsort symb list ;\ncons 0 : symb ;\ncons 1 : symb ;\n"
        "cons [] : list ;\ncons cons : symb => list => list ;\n"
        "fun f : symb * symb => symb ;\nfun start : list => symb ;\n"
        "rule f (x , y) -> x ;\nrule start cs -> f (0 , 1) ;\n"
    )
    s = term("start (1 ; [])", atrs)
    oracle = search_data_normal_forms(s, atrs)
    assert not oracle.exhausted
    result = solve_product(atrs, s)
    assert {print_term(t) for t in result.normal_forms} == {"0"}
    assert set(result.normal_forms) == set(oracle.data_normal_forms)


def test_solve_product_requires_pairing(majority):
    with pytest.raises(NotProductConsFree):
        solve_product(majority, term("majority []", majority))


def test_repr_enumeration_is_canonical():
    majority = load("majority.atrs")
    s = term("majority (1 ; 0 ; [])", majority)
    B = compute_B(s, majority)
    lists = enumerate_reprs(Sort("list"), B)
    assert len(lists) == len(set(lists)) == 8
    fns = enumerate_reprs(Arrow(Sort("symb"), Sort("symb")), B)
    assert len(fns) == len(set(fns)) == 4 ** 4


def card_oracle(ty, n):
    """Closed-form space size: 2^n at sorts, pointwise exponentation at
    arrows, subsets of component tuples at products."""
    if isinstance(ty, Sort):
        return 2 ** n
    if isinstance(ty, Product):
        width = 1
        stack = [ty]
        comps = []
        while stack:
            t = stack.pop()
            if isinstance(t, Product):
                stack.extend([t.left, t.right])
            else:
                comps.append(t)
        for comp in comps:
            assert isinstance(comp, Sort)
            width *= n
        return 2 ** width
    return card_oracle(ty.res, n) ** card_oracle(ty.arg, n)


def random_type(rng, depth, allow_products=True):
    nat = Sort("nat")
    if depth == 0:
        return nat
    kind = rng.randrange(4)
    if kind == 0:
        return nat
    if kind == 1 and allow_products:
        return Product(nat, nat if rng.random() < 0.7 else Product(nat, nat))
    left = random_type(rng, depth - 1, allow_products=False)
    right = random_type(rng, depth - 1, allow_products)
    return Arrow(left, right)


def representable(ty, n, max_bits=200000):
    """Whether the exact count fits in max_bits bits (counts at order 3 can
    be towers too large to materialize)."""
    if isinstance(ty, Sort):
        return n < max_bits
    if isinstance(ty, Product):
        return n ** 3 < max_bits
    if not (representable(ty.arg, n, 40) and representable(ty.res, n, max_bits)):
        return False
    return card_oracle(ty.arg, n) * card_oracle(ty.res, n).bit_length() < max_bits


def test_cardinality_matches_oracle_and_respects_the_bound():
    rng = random.Random(20240817)
    checked = 0
    orders = set()
    while checked < 50:
        n = rng.randint(1, 4)
        ty = random_type(rng, rng.randint(1, 3))
        if ty.order() > 3 or not representable(ty, n):
            continue
        exact = repr_cardinality(ty, {"nat": n})
        assert exact == card_oracle(ty, n)
        assert within_cardinality_bound(exact, ty, n)
        orders.add(ty.order())
        checked += 1
    assert orders >= {0, 1, 2}


def test_small_spaces_agree_with_the_arithmetic_cardinality():
    nat = Sort("nat")
    terms = [term(t, load("hocount.atrs")) for t in ["o", "s o", "s (s o)"]]
    B = BSet(frozenset(terms))
    for ty in [nat, Arrow(nat, nat), Arrow(nat, Arrow(nat, nat))]:
        space = build_space(ty, B, 2 ** 256, {})
        assert space.card == repr_cardinality(ty, {"nat": 3})
