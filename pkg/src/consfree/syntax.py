"""Concrete syntax: parsing and printing of rewriting systems, terms, and machines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from .terms import (
    CONS_NAME,
    CONSTRUCTOR,
    DEFINED,
    NIL_NAME,
    AmbiguousVariableType,
    Arrow,
    Atrs,
    FuncSym,
    PairHead,
    Product,
    Rule,
    SimpleType,
    Sort,
    Term,
    TypeMismatch,
    UndeclaredSymbol,
    Variable,
    apply_term,
    pair,
    print_term,
    sym_term,
)
from .tm import Transition, TMachine, TMFormatError


class ParseError(Exception):
    """A syntax error with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class EmptyInput(Exception):
    """The input string to encode is empty."""


class UnknownSymbol(Exception):
    """An input character has no matching constructor."""


class PairingRequired(Exception):
    """Pair syntax is used without the pairing directive."""


KEYWORDS = ("sort", "cons", "fun", "var", "rule", "pairing")

_IDENT_CHARS = set(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.#?'"
)


@dataclass
class Token:
    kind: str  # "ident", "punct", or "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    """Split text into identifier and punctuation tokens; // starts a comment."""
    tokens: List[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("[]", i):
            tokens.append(Token("ident", NIL_NAME, line, col))
            i += 2
            col += 2
            continue
        if text.startswith("->", i) or text.startswith("=>", i):
            tokens.append(Token("punct", text[i : i + 2], line, col))
            i += 2
            col += 2
            continue
        if ch in ";:,()*":
            tokens.append(Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if ch in _IDENT_CHARS:
            j = i
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            tokens.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class UAtom:
    """Untyped identifier occurrence."""

    name: str
    line: int
    col: int


@dataclass
class UApp:
    """Untyped application."""

    fn: "UTerm"
    arg: "UTerm"


@dataclass
class UPair:
    """Untyped pair."""

    left: "UTerm"
    right: "UTerm"


UTerm = Union[UAtom, UApp, UPair]


class _MetaVar:
    """A type unknown resolved by unification."""

    __slots__ = ("ref",)

    def __init__(self) -> None:
        self.ref: Optional[SimpleType] = None


def _resolve(ty) -> object:
    while isinstance(ty, _MetaVar) and ty.ref is not None:
        ty = ty.ref
    return ty


def _occurs(meta: _MetaVar, ty) -> bool:
    ty = _resolve(ty)
    if ty is meta:
        return True
    if isinstance(ty, Arrow):
        return _occurs(meta, ty.arg) or _occurs(meta, ty.res)
    if isinstance(ty, Product):
        return _occurs(meta, ty.left) or _occurs(meta, ty.right)
    return False


def _unify(a, b) -> None:
    a = _resolve(a)
    b = _resolve(b)
    if a is b:
        return
    if isinstance(a, _MetaVar):
        if _occurs(a, b):
            raise TypeMismatch("cannot construct an infinite type")
        a.ref = b
        return
    if isinstance(b, _MetaVar):
        _unify(b, a)
        return
    if isinstance(a, Sort) and isinstance(b, Sort) and a.name == b.name:
        return
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        _unify(a.arg, b.arg)
        _unify(a.res, b.res)
        return
    if isinstance(a, Product) and isinstance(b, Product):
        _unify(a.left, b.left)
        _unify(a.right, b.right)
        return
    raise TypeMismatch(f"cannot unify {_show_type(a)} with {_show_type(b)}")


def _show_type(ty) -> str:
    ty = _resolve(ty)
    if isinstance(ty, _MetaVar):
        return "?"
    if isinstance(ty, Arrow):
        return f"{_show_type(ty.arg)} => {_show_type(ty.res)}"
    if isinstance(ty, Product):
        return f"{_show_type(ty.left)} * {_show_type(ty.right)}"
    return str(ty)


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text or tok.kind == "eof":
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def expect_ident(self) -> Token:
        tok = self.next()
        if tok.kind != "ident":
            raise ParseError(f"expected identifier, found {tok.text!r}", tok.line, tok.col)
        return tok

    # -- types ----------------------------------------------------------

    def parse_type(self, sorts: Dict[str, Sort]) -> SimpleType:
        left = self.parse_product_type(sorts)
        if self.peek().text == "=>":
            self.next()
            return Arrow(left, self.parse_type(sorts))
        return left

    def parse_product_type(self, sorts: Dict[str, Sort]) -> SimpleType:
        left = self.parse_atom_type(sorts)
        if self.peek().text == "*":
            self.next()
            return Product(left, self.parse_product_type(sorts))
        return left

    def parse_atom_type(self, sorts: Dict[str, Sort]) -> SimpleType:
        tok = self.next()
        if tok.text == "(":
            ty = self.parse_type(sorts)
            self.expect(")")
            return ty
        if tok.kind == "ident":
            sort = sorts.get(tok.text)
            if sort is None:
                raise UndeclaredSymbol(f"{tok.line}:{tok.col}: unknown sort {tok.text}")
            return sort
        raise ParseError(f"expected a type, found {tok.text!r}", tok.line, tok.col)

    # -- terms ----------------------------------------------------------

    def _starts_term(self, tok: Token) -> bool:
        if tok.kind == "ident":
            return tok.text not in KEYWORDS
        return tok.text == "("

    def parse_uterm(self) -> UTerm:
        left = self.parse_uapp()
        tok = self.peek()
        if tok.text == ";" and self._starts_term(self.peek(1)):
            self.next()
            tail = self.parse_uterm()
            head = UAtom(CONS_NAME, tok.line, tok.col)
            return UApp(UApp(head, left), tail)
        return left

    def parse_uapp(self) -> UTerm:
        term = self.parse_uatom()
        while self._starts_term(self.peek()):
            term = UApp(term, self.parse_uatom())
        return term

    def parse_uatom(self) -> UTerm:
        tok = self.next()
        if tok.text == "(":
            parts = [self.parse_uterm()]
            while self.peek().text == ",":
                self.next()
                parts.append(self.parse_uterm())
            self.expect(")")
            term = parts[-1]
            for part in reversed(parts[:-1]):
                term = UPair(part, term)
            return term
        if tok.kind == "ident":
            if tok.text in KEYWORDS:
                raise ParseError(
                    f"reserved word {tok.text!r} cannot appear in a term",
                    tok.line,
                    tok.col,
                )
            return UAtom(tok.text, tok.line, tok.col)
        raise ParseError(f"expected a term, found {tok.text!r}", tok.line, tok.col)


def _uterm_idents(u: UTerm) -> List[UAtom]:
    if isinstance(u, UAtom):
        return [u]
    if isinstance(u, UApp):
        return _uterm_idents(u.fn) + _uterm_idents(u.arg)
    return _uterm_idents(u.left) + _uterm_idents(u.right)


def _infer(u: UTerm, symbols: Dict[str, FuncSym], env: Dict[str, object]):
    if isinstance(u, UAtom):
        if u.name in env:
            return env[u.name]
        sym = symbols.get(u.name)
        if sym is None:
            raise UndeclaredSymbol(f"{u.line}:{u.col}: undeclared symbol {u.name}")
        return sym.type
    if isinstance(u, UApp):
        fn_ty = _infer(u.fn, symbols, env)
        arg_ty = _infer(u.arg, symbols, env)
        res = _MetaVar()
        try:
            _unify(fn_ty, Arrow(arg_ty, res))
        except TypeMismatch as exc:
            raise TypeMismatch(f"in application: {exc}") from exc
        return res
    return Product(_infer(u.left, symbols, env), _infer(u.right, symbols, env))


def _zonk(ty) -> SimpleType:
    ty = _resolve(ty)
    if isinstance(ty, _MetaVar):
        raise AmbiguousVariableType("a type is not determined by its occurrences")
    if isinstance(ty, Arrow):
        return Arrow(_zonk(ty.arg), _zonk(ty.res))
    if isinstance(ty, Product):
        return Product(_zonk(ty.left), _zonk(ty.right))
    return ty


def _build(u: UTerm, symbols: Dict[str, FuncSym], env: Dict[str, object]) -> Term:
    if isinstance(u, UAtom):
        if u.name in env:
            try:
                return sym_term(Variable(u.name, _zonk(env[u.name])))
            except AmbiguousVariableType:
                raise AmbiguousVariableType(
                    f"{u.line}:{u.col}: the type of variable {u.name} "
                    "is not determined by its occurrences"
                )
        return sym_term(symbols[u.name])
    if isinstance(u, UApp):
        return apply_term(_build(u.fn, symbols, env), _build(u.arg, symbols, env))
    return pair(_build(u.left, symbols, env), _build(u.right, symbols, env))


def type_of(
    u: UTerm, symbols: Dict[str, FuncSym], var_types: Dict[str, SimpleType]
) -> SimpleType:
    """Infer the type of an untyped term under the given variable typing."""
    env: Dict[str, object] = dict(var_types)
    ty = _infer(u, symbols, env)
    return _zonk(ty)


def _check_pairing(u: UTerm, pairing: bool) -> None:
    if isinstance(u, UPair):
        if not pairing:
            raise PairingRequired("pair syntax requires the pairing directive")
        _check_pairing(u.left, pairing)
        _check_pairing(u.right, pairing)
    elif isinstance(u, UApp):
        _check_pairing(u.fn, pairing)
        _check_pairing(u.arg, pairing)


def parse_atrs(text: str) -> Atrs:
    """Parse a rewriting system description."""
    parser = _Parser(tokenize(text))
    sorts: Dict[str, Sort] = {}
    sort_order: List[str] = []
    symbols: Dict[str, FuncSym] = {}
    var_decls: Dict[str, SimpleType] = {}
    raw_rules: List[Tuple[UTerm, UTerm]] = []
    pairing = False
    while True:
        tok = parser.peek()
        if tok.kind == "eof":
            break
        if tok.kind != "ident" or tok.text not in KEYWORDS:
            raise ParseError(
                f"expected a declaration, found {tok.text!r}", tok.line, tok.col
            )
        parser.next()
        if tok.text == "sort":
            names = [parser.expect_ident()]
            while parser.peek().kind == "ident":
                names.append(parser.next())
            parser.expect(";")
            for name in names:
                if name.text in sorts:
                    raise ParseError(
                        f"duplicate sort {name.text}", name.line, name.col
                    )
                sorts[name.text] = Sort(name.text)
                sort_order.append(name.text)
        elif tok.text in ("cons", "fun"):
            name = parser.expect_ident()
            parser.expect(":")
            ty = parser.parse_type(sorts)
            parser.expect(";")
            if name.text in symbols:
                raise ParseError(
                    f"duplicate symbol {name.text}", name.line, name.col
                )
            kind = CONSTRUCTOR if tok.text == "cons" else DEFINED
            symbols[name.text] = FuncSym(name.text, ty, kind)
        elif tok.text == "var":
            name = parser.expect_ident()
            parser.expect(":")
            ty = parser.parse_type(sorts)
            parser.expect(";")
            if name.text in var_decls:
                raise ParseError(
                    f"duplicate variable declaration {name.text}", name.line, name.col
                )
            var_decls[name.text] = ty
        elif tok.text == "pairing":
            parser.expect(";")
            pairing = True
        else:  # rule
            lhs = parser.parse_uterm()
            parser.expect("->")
            rhs = parser.parse_uterm()
            parser.expect(";")
            raw_rules.append((lhs, rhs))
    rules = []
    for index, (ulhs, urhs) in enumerate(raw_rules):
        _check_pairing(ulhs, pairing)
        _check_pairing(urhs, pairing)
        rules.append(
            _elaborate_rule(ulhs, urhs, symbols, var_decls, f"r{index + 1}")
        )
    for name, ty in var_decls.items():
        if name in symbols:
            raise TypeMismatch(f"{name} is declared both as a symbol and a variable")
        if isinstance(ty, Product) and not pairing:
            raise PairingRequired("product types require the pairing directive")
    _check_product_types(symbols, pairing)
    return Atrs(tuple(sort_order), symbols, rules, pairing, var_decls)


def _check_product_types(symbols: Dict[str, FuncSym], pairing: bool) -> None:
    if pairing:
        return

    def has_product(ty: SimpleType) -> bool:
        if isinstance(ty, Product):
            return True
        if isinstance(ty, Arrow):
            return has_product(ty.arg) or has_product(ty.res)
        return False

    for sym in symbols.values():
        if has_product(sym.type):
            raise PairingRequired(
                f"the type of {sym.name} requires the pairing directive"
            )


def _elaborate_rule(
    ulhs: UTerm,
    urhs: UTerm,
    symbols: Dict[str, FuncSym],
    var_decls: Dict[str, SimpleType],
    name: str,
) -> Rule:
    lhs_vars = {
        atom.name for atom in _uterm_idents(ulhs) if atom.name not in symbols
    }
    for atom in _uterm_idents(urhs):
        if atom.name not in symbols and atom.name not in lhs_vars:
            raise UndeclaredSymbol(
                f"{atom.line}:{atom.col}: undeclared symbol {atom.name}"
            )
    env: Dict[str, object] = {
        v: var_decls.get(v) or _MetaVar() for v in lhs_vars
    }
    lhs_ty = _infer(ulhs, symbols, env)
    rhs_ty = _infer(urhs, symbols, env)
    _unify(lhs_ty, rhs_ty)
    lhs = _build(ulhs, symbols, env)
    rhs = _build(urhs, symbols, env)
    return Rule(lhs, rhs, name)


def parse_term(
    text: str, atrs: Atrs, var_types: Optional[Dict[str, SimpleType]] = None
) -> Term:
    """Parse a single term against the signature of atrs."""
    parser = _Parser(tokenize(text))
    u = parser.parse_uterm()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    _check_pairing(u, atrs.pairing)
    env: Dict[str, object] = dict(atrs.var_decls)
    if var_types:
        env.update(var_types)
    known = set(env)
    for atom in _uterm_idents(u):
        if atom.name not in atrs.symbols and atom.name not in known:
            raise UndeclaredSymbol(
                f"{atom.line}:{atom.col}: undeclared symbol {atom.name}"
            )
    _infer(u, atrs.symbols, env)
    return _build(u, atrs.symbols, env)


def print_type(ty: SimpleType) -> str:
    return str(ty)


def print_atrs(atrs: Atrs) -> str:
    """Render a rewriting system in concrete syntax."""
    lines = []
    if atrs.sorts:
        lines.append("sort " + " ".join(atrs.sorts) + " ;")
    if atrs.pairing:
        lines.append("pairing ;")
    for sym in atrs.symbols.values():
        lines.append(f"{sym.kind} {sym.name} : {sym.type} ;")
    for rule in atrs.rules:
        lines.append(f"rule {print_term(rule.lhs)} -> {print_term(rule.rhs)} ;")
    return "\n".join(lines) + "\n"


def encode_input(x: str, atrs: Atrs) -> Term:
    """Encode a string as the list c1 ; ... ; cn ; [] of its characters."""
    if x == "":
        raise EmptyInput("cannot encode the empty string")
    nil = atrs.symbols.get(NIL_NAME)
    cons = atrs.symbols.get(CONS_NAME)
    if nil is None or cons is None or not nil.is_constructor or not cons.is_constructor:
        raise UnknownSymbol("the signature lacks the list constructors")
    term = sym_term(nil)
    for ch in reversed(x):
        sym = atrs.symbols.get(ch)
        if sym is None or not sym.is_constructor or sym.arity != 0:
            raise UnknownSymbol(f"no constructor for input character {ch!r}")
        term = sym_term(cons, sym_term(sym), term)
    return term


def decode_list(t: Term) -> Optional[str]:
    """Inverse of encode_input for lists of nullary constructors, else None."""
    chars = []
    while True:
        head = t.head
        if not isinstance(head, FuncSym) or not head.is_constructor:
            return None
        if head.name == NIL_NAME and not t.args:
            return "".join(chars)
        if head.name == CONS_NAME and len(t.args) == 2 and not t.args[0].args:
            first = t.args[0].head
            if not isinstance(first, FuncSym):
                return None
            chars.append(first.name)
            t = t.args[1]
            continue
        return None


def parse_tm(text: str) -> TMachine:
    """Parse a Turing machine description."""
    parser = _Parser(tokenize(text))
    sections: Dict[str, List[str]] = {}
    transitions: List[Transition] = []
    while parser.peek().kind != "eof":
        head = parser.expect_ident()
        words: List[str] = []
        while parser.peek().kind == "ident":
            words.append(parser.next().text)
        parser.expect(";")
        if head.text == "trans":
            if len(words) != 5:
                raise ParseError(
                    "trans needs: state read write direction state",
                    head.line,
                    head.col,
                )
            transitions.append(Transition(*words))
        elif head.text in ("input", "tape", "states", "start"):
            if head.text in sections:
                raise ParseError(f"duplicate {head.text} line", head.line, head.col)
            sections[head.text] = words
        else:
            raise ParseError(f"unknown directive {head.text!r}", head.line, head.col)
    for required in ("input", "tape", "states", "start"):
        if required not in sections:
            raise TMFormatError(f"missing {required} line")
    if len(sections["start"]) != 1:
        raise TMFormatError("start line needs exactly one state")
    return TMachine(
        tuple(sections["input"]),
        tuple(sections["tape"]),
        tuple(sections["states"]),
        sections["start"][0],
        transitions,
    )


def print_tm(tm: TMachine) -> str:
    return str(tm)
