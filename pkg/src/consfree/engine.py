"""Bounded nondeterministic rewriting: one-step reducts, search, and traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .syntax import encode_input
from .terms import (
    Atrs,
    FuncSym,
    PairHead,
    Rule,
    Term,
    Variable,
    _match_into,
    apply_subst,
    apply_term,
    is_data,
    print_term,
)


FREE = "free"
INNERMOST = "innermost"
OUTERMOST = "outermost"
STRATEGIES = (FREE, INNERMOST, OUTERMOST)


class BudgetTooSmallForRoot(Exception):
    """The start term already exceeds the term-size budget."""


class NonReplayableTrace(Exception):
    """A recorded trace does not replay against the system."""


class MissingDecideSymbol(Exception):
    """The system lacks the decide / true / false interface."""


Step = Tuple[str, Tuple[int, ...]]  # rule name, spine-argument path


def format_step(step: Step) -> str:
    name, path = step
    where = ".".join(str(i) for i in path) if path else "ε"
    return f"{name} @ {where}"


@dataclass
class Budget:
    """Limits for breadth-first search over reducts."""

    max_steps: int = 1000
    max_terms: int = 100000
    max_term_size: int = 5000


@dataclass
class SearchResult:
    """Data normal forms found, whether the search was cut short, and a
    witness trace from the root to each normal form."""

    root: Term
    strategy: str
    data_normal_forms: frozenset
    exhausted: bool
    visited: int
    traces: Dict[Term, List[Step]] = field(default_factory=dict)


class Engine:
    """Rewrites terms of one system, with per-term memoization."""

    def __init__(self, atrs: Atrs):
        self.atrs = atrs
        self.rules_by_head: Dict[str, List[Rule]] = {}
        self.rules_by_name: Dict[str, Rule] = {}
        for rule in atrs.rules:
            head = rule.lhs.head
            if isinstance(head, FuncSym):
                self.rules_by_head.setdefault(head.name, []).append(rule)
            self.rules_by_name[rule.name] = rule
        self._options: Dict[Tuple[Term, str], Tuple] = {}
        self._normal: Dict[Term, bool] = {}

    def node_matches(self, t: Term) -> List[Tuple[Rule, Dict[Variable, Term], int]]:
        """Rules whose pattern list matches a prefix of t's spine arguments."""
        head = t.head
        if not isinstance(head, FuncSym) or head.is_constructor:
            return []
        out = []
        for rule in self.rules_by_head.get(head.name, ()):
            k = rule.arity
            if k > len(t.args):
                continue
            subst: Dict[Variable, Term] = {}
            if all(
                _match_into(l, a, subst) for l, a in zip(rule.lhs.args, t.args)
            ):
                out.append((rule, subst, k))
        return out

    def contract(self, t: Term, rule: Rule, subst: Dict[Variable, Term], k: int) -> Term:
        """Replace the matched prefix of t by the instantiated right-hand side."""
        return apply_term(apply_subst(rule.rhs, subst), *t.args[k:])

    def is_normal(self, t: Term) -> bool:
        """No reduct exists anywhere in t."""
        cached = self._normal.get(t)
        if cached is None:
            cached = not self.node_matches(t) and all(
                self.is_normal(arg) for arg in t.args
            )
            self._normal[t] = cached
        return cached

    def step_options(self, t: Term, strategy: str) -> Tuple[Tuple[Term, str, Tuple[int, ...]], ...]:
        """All one-step reducts of t under the strategy, with rule and path."""
        key = (t, strategy)
        cached = self._options.get(key)
        if cached is not None:
            return cached
        out: List[Tuple[Term, str, Tuple[int, ...]]] = []
        matches = self.node_matches(t)
        blocked_below = 0
        if strategy == OUTERMOST and matches:
            kmax = max(k for _, _, k in matches)
            matches = [m for m in matches if m[2] == kmax]
            blocked_below = kmax
        for rule, subst, k in matches:
            if strategy == INNERMOST and not all(
                self.is_normal(arg) for arg in t.args[:k]
            ):
                continue
            out.append((self.contract(t, rule, subst, k), rule.name, ()))
        for i, arg in enumerate(t.args):
            if i < blocked_below:
                continue
            for reduct, name, path in self.step_options(arg, strategy):
                args = t.args[:i] + (reduct,) + t.args[i + 1 :]
                out.append((Term(t.head, args, t.type), name, (i,) + path))
        result = tuple(out)
        self._options[key] = result
        return result


def one_step_reducts(t: Term, atrs: Atrs, strategy: str = FREE) -> Set[Term]:
    """The set of one-step reducts of t under the strategy."""
    engine = Engine(atrs)
    return {reduct for reduct, _, _ in engine.step_options(t, strategy)}


def search_data_normal_forms(
    t: Term, atrs: Atrs, strategy: str = FREE, budget: Optional[Budget] = None
) -> SearchResult:
    """Breadth-first search of the reduct space of t for data normal forms."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    budget = budget or Budget()
    if t.size > budget.max_term_size:
        raise BudgetTooSmallForRoot(
            f"the start term has {t.size} nodes, budget allows {budget.max_term_size}"
        )
    engine = Engine(atrs)
    visited: Set[Term] = {t}
    parents: Dict[Term, Optional[Tuple[Term, str, Tuple[int, ...]]]] = {t: None}
    frontier: List[Term] = [t]
    normal_forms: Set[Term] = set()
    exhausted = False
    depth = 0
    while frontier:
        next_frontier: List[Term] = []
        for u in sorted(frontier, key=print_term):
            options = engine.step_options(u, strategy)
            if not options:
                if is_data(u):
                    normal_forms.add(u)
                continue
            if depth >= budget.max_steps:
                exhausted = True
                continue
            for reduct, name, path in sorted(
                options, key=lambda o: (print_term(o[0]), o[1], o[2])
            ):
                if reduct in visited:
                    continue
                if reduct.size > budget.max_term_size:
                    exhausted = True
                    continue
                if len(visited) >= budget.max_terms:
                    exhausted = True
                    continue
                visited.add(reduct)
                parents[reduct] = (u, name, path)
                next_frontier.append(reduct)
        frontier = next_frontier
        depth += 1
    traces: Dict[Term, List[Step]] = {}
    for nf in normal_forms:
        steps: List[Step] = []
        node = nf
        while parents[node] is not None:
            parent, name, path = parents[node]
            steps.append((name, path))
            node = parent
        traces[nf] = list(reversed(steps))
    return SearchResult(
        t, strategy, frozenset(normal_forms), exhausted, len(visited), traces
    )


def _decide_interface(atrs: Atrs) -> Tuple[FuncSym, Term, Term]:
    from .terms import sym_term

    decide = atrs.symbols.get("decide")
    true = atrs.symbols.get("true")
    false = atrs.symbols.get("false")
    if decide is None or decide.is_constructor:
        raise MissingDecideSymbol("the system has no defined symbol decide")
    if true is None or false is None or not true.is_constructor or not false.is_constructor:
        raise MissingDecideSymbol("the system lacks the constructors true and false")
    return decide, sym_term(true), sym_term(false)


@dataclass
class AcceptResult:
    """Whether true is reachable from decide applied to the encoded input."""

    answer: str  # "yes" or "unknown"
    search: SearchResult


@dataclass
class DecideResult:
    """A three-valued verdict, with a nondeterminism warning."""

    answer: str  # "true", "false", or "unknown"
    nondeterministic: bool
    search: SearchResult


def accepts(atrs: Atrs, x: str, budget: Optional[Budget] = None) -> AcceptResult:
    """Search for the normal form true from decide applied to the input."""
    from .terms import sym_term

    decide_sym, true, _ = _decide_interface(atrs)
    start = sym_term(decide_sym, encode_input(x, atrs))
    search = search_data_normal_forms(start, atrs, FREE, budget)
    answer = "yes" if true in search.data_normal_forms else "unknown"
    return AcceptResult(answer, search)


def decide(atrs: Atrs, x: str, budget: Optional[Budget] = None) -> DecideResult:
    """Decide the input: true if reachable, false only on a complete search."""
    from .terms import sym_term

    decide_sym, true, false = _decide_interface(atrs)
    start = sym_term(decide_sym, encode_input(x, atrs))
    search = search_data_normal_forms(start, atrs, FREE, budget)
    found = search.data_normal_forms
    nondeterministic = len(found) > 1
    if true in found:
        answer = "true"
    elif search.exhausted:
        answer = "unknown"
    else:
        answer = "false"
    return DecideResult(answer, nondeterministic, search)


def _subterm_at(t: Term, path: Tuple[int, ...]) -> Term:
    for i in path:
        if i >= len(t.args):
            raise NonReplayableTrace(f"path {path} leaves the term")
        t = t.args[i]
    return t


def _replace_at(t: Term, path: Tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    args = t.args[:i] + (_replace_at(t.args[i], path[1:], new),) + t.args[i + 1 :]
    return Term(t.head, args, t.type)


def replay_trace(root: Term, steps: List[Step], atrs: Atrs) -> List[Term]:
    """The term sequence a trace denotes; raises if any step does not apply."""
    engine = Engine(atrs)
    terms = [root]
    current = root
    for name, path in steps:
        rule = engine.rules_by_name.get(name)
        if rule is None:
            raise NonReplayableTrace(f"no rule named {name}")
        node = _subterm_at(current, path)
        found = None
        for cand, subst, k in engine.node_matches(node):
            if cand.name == name:
                found = engine.contract(node, cand, subst, k)
                break
        if found is None:
            raise NonReplayableTrace(
                f"rule {name} does not apply at {format_step((name, path))} "
                f"in {print_term(current)}"
            )
        current = _replace_at(current, path, found)
        terms.append(current)
    return terms


def validate_semi_outermost(root: Term, steps: List[Step], atrs: Atrs) -> bool:
    """Check that a trace is semi-outermost: along every spine, arguments are
    only rewritten below non-variable pattern positions before the head step,
    and all sub-reductions have the same shape."""
    engine = Engine(atrs)
    replay_trace(root, steps, atrs)  # raises NonReplayableTrace when invalid
    return _semi(root, list(steps), engine)


def _semi(t: Term, steps: List[Step], engine: Engine) -> bool:
    if not steps:
        return True
    head = t.head
    if not isinstance(head, FuncSym) or head.is_constructor:
        return _semi_componentwise(t, steps, engine)
    root_index = next((j for j, (_, p) in enumerate(steps) if p == ()), None)
    if root_index is None:
        return False
    rule = engine.rules_by_name[steps[root_index][0]]
    k = rule.arity
    before = steps[:root_index]
    for _, path in before:
        if not path or path[0] >= k:
            return False
        pattern = rule.lhs.args[path[0]]
        if isinstance(pattern.head, Variable) and not pattern.args:
            return False
    for i in range(k):
        sub = [(name, path[1:]) for name, path in before if path[0] == i]
        if sub and not _semi(t.args[i], sub, engine):
            return False
    mid = replay_trace(t, steps[: root_index + 1], engine.atrs)[-1]
    return _semi(mid, steps[root_index + 1 :], engine)


def _semi_componentwise(t: Term, steps: List[Step], engine: Engine) -> bool:
    per_arg: Dict[int, List[Step]] = {}
    for name, path in steps:
        if not path:
            return False
        per_arg.setdefault(path[0], []).append((name, path[1:]))
    return all(
        _semi(t.args[i], sub, engine) for i, sub in sorted(per_arg.items())
    )
