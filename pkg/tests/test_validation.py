"""Syntactic classes, reachable-data sets, and B-safety."""

import pytest

from consfree.engine import Budget, search_data_normal_forms
from consfree.syntax import parse_atrs
from consfree.terms import is_data, subterms
from consfree.validation import (
    NotBasic,
    check,
    compute_B,
    data_universe,
    is_B_safe,
    prune_ho_constructors,
)

from conftest import ATRS_NAMES, load, term

EXPECTED = {
    "majority.atrs": dict(cons_free=True, order=1),
    "sat.atrs": dict(cons_free=True, order=1),
    "succ.atrs": dict(cons_free=False, order=1),
    "hocount.atrs": dict(cons_free=False, order=2),
    "consfree_fsucc.atrs": dict(cons_free=True, order=2),
    "nonlinear_tm.atrs": dict(cons_free=False, order=1),
    "contains1.atrs": dict(cons_free=True, order=1),
    "parity1s.atrs": dict(cons_free=True, order=1),
    "allzeros.atrs": dict(cons_free=True, order=1),
    "evenlen.atrs": dict(cons_free=True, order=1),
    "firstis1.atrs": dict(cons_free=True, order=1),
    "lastis1.atrs": dict(cons_free=True, order=1),
    "ho_apply.atrs": dict(cons_free=True, order=2),
    "module_lin.atrs": dict(cons_free=True, order=1),
    "module_prod_lin_lin.atrs": dict(cons_free=True, order=1),
    "module_e.atrs": dict(cons_free=True, order=1),
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_corpus_verdicts(name):
    verdict = check(load(name))
    assert verdict.cons_free == EXPECTED[name]["cons_free"]
    assert verdict.order == EXPECTED[name]["order"]


@pytest.mark.parametrize("name", ATRS_NAMES)
def test_cons_free_implies_left_linear_constructor_system(name):
    verdict = check(load(name))
    if verdict.cons_free:
        assert verdict.left_linear and verdict.constructor_system
    if verdict.product_cons_free:
        assert verdict.cons_free


def test_succ_violations_name_the_fresh_data_rules(succ_system):
    verdict = check(succ_system)
    assert not verdict.cons_free
    assert {v.rule for v in verdict.violations_for("cons-free")} == {"r2", "r3"}


def test_nonlinear_tm_fails_left_linearity(nonlinear_tm):
    verdict = check(nonlinear_tm)
    assert not verdict.left_linear
    # r11 is the non-left-linear equality rule equal xl xl -> true
    assert "r11" in {v.rule for v in verdict.violations_for("left-linear")}


def test_hocount_violation_is_the_index_stepping_rule(hocount):
    verdict = check(hocount)
    assert {v.rule for v in verdict.violations_for("cons-free")} == {"r9"}


def test_compute_B_majority(majority):
    s = term("majority (1 ; 0 ; [])", majority)
    B = compute_B(s, majority)
    from consfree.terms import print_term

    assert {print_term(t) for t in B.terms} == {"1", "0", "1 ; 0 ; []", "0 ; []", "[]"}


def test_compute_B_requires_basic(majority):
    with pytest.raises(NotBasic):
        compute_B(term("1 ; 0 ; []", majority), majority)
    with pytest.raises(NotBasic):
        compute_B(term("count [] []", majority), majority)


def test_B_is_subterm_closed(majority, sat):
    for atrs, text in [(majority, "majority (1 ; 0 ; [])"), (sat, "decide (1 ; 0 ; [])")]:
        B = compute_B(term(text, atrs), atrs)
        for t in B.terms:
            assert is_data(t)
            assert subterms(t) <= set(B.terms)


def test_B_monotone_in_the_start_term(majority):
    big = compute_B(term("majority (1 ; 0 ; [])", majority), majority)
    small = compute_B(term("majority (0 ; [])", majority), majority)
    rhs_only = compute_B(term("majority []", majority), majority)
    assert set(small.terms) <= set(big.terms) | set(rhs_only.terms)


def test_is_B_safe(majority):
    s = term("majority (1 ; 0 ; [])", majority)
    B = compute_B(s, majority)
    for t in B.terms:
        assert is_B_safe(t, B)
    assert not is_B_safe(term("cmp (1 ; 1 ; []) []", majority), B)
    assert is_B_safe(term("cmp (0 ; []) []", majority), B)


def test_reachable_terms_stay_B_safe(majority):
    s = term("majority (1 ; 0 ; [])", majority)
    B = compute_B(s, majority)
    result = search_data_normal_forms(s, majority, "free", Budget(6, 10000, 500))
    for t in result.traces:
        assert is_B_safe(t, B)
    assert all(is_B_safe(t, B) for t in result.data_normal_forms)


def test_prune_removes_higher_order_constructors():
    text = (
        "sort nat ;\ncons o : nat ;\ncons c : (nat => nat) => nat ;\n"
        "fun f : nat => nat ;\nfun g : nat => nat ;\n"
        "rule f (c F) -> F o ;\nrule g x -> o ;\n"
    )
    atrs = parse_atrs(text)
    pruned, removed = prune_ho_constructors(atrs)
    assert removed == ["c"]
    assert "c" not in pruned.symbols
    assert [r.name for r in pruned.rules] == ["r2"]


def test_prune_is_identity_on_first_order_corpus(majority, sat):
    for atrs in (majority, sat):
        pruned, removed = prune_ho_constructors(atrs)
        assert removed == []
        assert len(pruned.rules) == len(atrs.rules)


def test_data_universe_extends_B(majority):
    s = term("majority (1 ; 0 ; [])", majority)
    universe = data_universe([s.args[0]], majority)
    assert set(compute_B(s, majority).terms) <= set(universe.terms) | {s.args[0]}
