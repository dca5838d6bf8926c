"""File formats: round-trips on the shipped corpus and parser robustness."""

import pathlib

import pytest
from hypothesis import given, strategies as st

from consfree.syntax import (
    EmptyInput,
    ParseError,
    PairingRequired,
    decode_list,
    encode_input,
    parse_atrs,
    parse_term,
    parse_tm,
    print_atrs,
    print_tm,
    print_type,
)
from consfree.terms import Arrow, Product, Sort, TermError, print_term

from conftest import CORPUS, corpus_text, load, term

ATRS_FILES = sorted(p.name for p in CORPUS.glob("*.atrs"))
TM_FILES = sorted(p.name for p in CORPUS.glob("*.tm"))


def test_corpus_is_present():
    assert len(ATRS_FILES) >= 12
    assert set(TM_FILES) == {"contains1.tm", "parity.tm"}


@pytest.mark.parametrize("name", ATRS_FILES)
def test_atrs_round_trip(name):
    atrs = load(name)
    printed = print_atrs(atrs)
    again = parse_atrs(printed)
    assert print_atrs(again) == printed
    assert again.sorts == atrs.sorts
    assert again.symbols == atrs.symbols
    assert [(r.lhs, r.rhs, r.name) for r in again.rules] == [
        (r.lhs, r.rhs, r.name) for r in atrs.rules
    ]
    assert again.pairing == atrs.pairing


@pytest.mark.parametrize("name", TM_FILES)
def test_tm_round_trip(name):
    tm = parse_tm(corpus_text(name))
    again = parse_tm(print_tm(tm))
    assert again == tm


def test_term_round_trip(majority):
    for text in ["majority (1 ; 0 ; [])", "cmp [] (0 ; [])", "count [] [] []"]:
        t = term(text, majority)
        assert print_term(t) == text
        assert term(print_term(t), majority) == t


def test_type_printing():
    nat = Sort("nat")
    assert print_type(Arrow(Arrow(nat, nat), nat)) == "(nat => nat) => nat"
    assert print_type(Product(nat, Arrow(nat, nat))) == "nat * (nat => nat)"


def test_encode_decode_input(sat):
    t = encode_input("10?#", sat)
    assert print_term(t) == "1 ; 0 ; ? ; # ; []"
    assert decode_list(t) == "10?#"
    with pytest.raises(EmptyInput):
        encode_input("", sat)


def test_encode_rejects_undeclared_symbols(majority):
    from consfree.syntax import UnknownSymbol

    with pytest.raises(UnknownSymbol):
        encode_input("2", majority)


def test_product_syntax_requires_pairing_directive():
    text = (
        "sort nat ;\ncons o : nat ;\n"
        "fun f : nat * nat => nat ;\nrule f (x , y) -> x ;\n"
    )
    with pytest.raises(PairingRequired):
        parse_atrs(text)
    assert parse_atrs("pairing ;\n" + text).pairing


def test_parse_errors_carry_positions():
    for bad in [
        "sort nat ; cons o nat ;",
        "sort nat ; fun f : nat => nat ; rule f x -> y ;",
        "sort nat ; cons o : nat ; rule o -> ;",
        "fun f : missing => missing ;",
    ]:
        with pytest.raises((ParseError, TermError)) as err:
            parse_atrs(bad)
        assert str(err.value)


@given(st.text(max_size=120))
def test_parser_never_panics_on_arbitrary_text(text):
    try:
        parse_atrs(text)
    except (ParseError, TermError, EmptyInput, PairingRequired):
        pass
    try:
        parse_tm(text)
    except Exception as exc:
        assert isinstance(exc, (ParseError, TermError)) or "TM" in type(exc).__name__


@given(st.sampled_from(ATRS_FILES), st.text(max_size=30), st.integers(0, 400))
def test_mutated_corpus_never_panics(name, junk, cut):
    text = corpus_text(name)
    mutated = text[:cut] + junk + text[cut:]
    try:
        parse_atrs(mutated)
    except (ParseError, TermError, EmptyInput, PairingRequired):
        pass


def test_golden_module_files_match_generator():
    from consfree.modules import canon, gen_module, module_source, parse_module_expr

    for text in ["lin", "prod(lin,lin)", "e"]:
        inst = gen_module(parse_module_expr(text))
        name = "module_" + canon(inst.expr).replace(".", "_") + ".atrs"
        assert corpus_text(name) == module_source(inst)
