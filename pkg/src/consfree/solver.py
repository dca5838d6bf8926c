"""Exact data-normal-form saturation for cons-free systems.

Terms are evaluated over finite representation spaces: a base sort denotes
subsets of the data universe of that sort, an arrow type denotes tabulated
functions between spaces, and a product sort denotes subsets of tuples.
Statements `f A1 .. Am ~> t` are confirmed by a step-indexed fixpoint; the
implementation materializes only the statements the root question demands,
but computes for each of them exactly the step-indexed values of the full
tabulation (evaluation at step i reads only step-(i-1) values, late-demanded
statements are backfilled from step zero, and a statement is re-evaluated
only when one of its recorded dependencies changed in the relevant window).
"""

from __future__ import annotations

import itertools
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .terms import (
    Arrow,
    Atrs,
    FuncSym,
    PairHead,
    Product,
    Rule,
    SimpleType,
    Sort,
    Term,
    Variable,
    _match_into,
    apply_subst,
    apply_term,
    arg_types,
    flatten_product,
    is_basic,
    is_data,
    pair,
    print_term,
    result_type,
    sym_term,
)
from .validation import BSet, NotBasic, check, compute_B, prune_ho_constructors

DEFAULT_SPACE_BUDGET = 2 ** 20


class NotConsFree(Exception):
    """The system is outside the cons-free class the solver requires."""


class NotProductConsFree(Exception):
    """The system (or a product type in it) is outside the product-cons-free
    class the solver requires."""


class ReprSpaceTooLarge(Exception):
    """A representation space exceeds the budget; carries the exact size."""

    def __init__(self, ty: SimpleType, cardinality: int, budget: int):
        super().__init__(
            f"representation space for {ty} has {cardinality} elements, "
            f"budget allows {budget}"
        )
        self.type = ty
        self.cardinality = cardinality
        self.budget = budget


class UnboundVariable(Exception):
    """Evaluation met a variable with no environment entry."""


class NonBSafeTerm(Exception):
    """Evaluation met a constructor term outside the data universe."""


Repr = Union[FrozenSet, "FnRepr"]


class SetSpace:
    """Subsets of a fixed, ordered universe of data elements."""

    def __init__(self, ty: SimpleType, universe: Sequence):
        self.type = ty
        self.universe = tuple(universe)
        self.card = 2 ** len(self.universe)
        self._position = {elem: i for i, elem in enumerate(self.universe)}

    def index_of(self, value: FrozenSet) -> int:
        mask = 0
        for elem in value:
            mask |= 1 << self._position[elem]
        return mask

    def elem_at(self, index: int) -> FrozenSet:
        return frozenset(
            elem for i, elem in enumerate(self.universe) if index >> i & 1
        )


@dataclass(frozen=True)
class FnRepr:
    """A tabulated function: table[i] is the value at domain element i."""

    space: "FnSpace" = field(compare=False, hash=False, repr=False)
    table: Tuple = ()

    def __hash__(self) -> int:
        cached = self.__dict__.get("_hash")
        if cached is None:
            cached = hash(self.table)
            object.__setattr__(self, "_hash", cached)
        return cached

    def apply(self, arg: Repr) -> Repr:
        return self.table[self.space.dom.index_of(arg)]


class FnSpace:
    """All functions from one space into another, in tabulated form."""

    def __init__(self, ty: SimpleType, dom, cod):
        self.type = ty
        self.dom = dom
        self.cod = cod
        self.card = cod.card ** dom.card

    def index_of(self, value: FnRepr) -> int:
        index = 0
        weight = 1
        for entry in value.table:
            index += self.cod.index_of(entry) * weight
            weight *= self.cod.card
        return index

    def elem_at(self, index: int) -> FnRepr:
        table = []
        for _ in range(self.dom.card):
            table.append(self.cod.elem_at(index % self.cod.card))
            index //= self.cod.card
        return FnRepr(self, tuple(table))


def build_space(ty: SimpleType, B: BSet, budget: int, cache: Dict) -> object:
    """The representation space of a type over the data universe B."""
    space = cache.get(ty)
    if space is not None:
        return space
    if isinstance(ty, Sort):
        space = SetSpace(ty, B.of_type(ty))
    elif isinstance(ty, Product):
        components = flatten_product(ty)
        for comp in components:
            if not isinstance(comp, Sort):
                raise NotProductConsFree(
                    f"product type {ty} has a functional component"
                )
        universe = list(
            itertools.product(*[B.of_type(comp) for comp in components])
        )
        space = SetSpace(ty, universe)
    else:
        dom = build_space(ty.arg, B, budget, cache)
        cod = build_space(ty.res, B, budget, cache)
        space = FnSpace(ty, dom, cod)
    if space.card > budget:
        raise ReprSpaceTooLarge(ty, space.card, budget)
    cache[ty] = space
    return space


def enumerate_reprs(
    ty: SimpleType, B: BSet, budget: int = DEFAULT_SPACE_BUDGET
) -> List[Repr]:
    """All representations of a type, in index order."""
    space = build_space(ty, B, budget, {})
    return [space.elem_at(i) for i in range(space.card)]


def repr_cardinality(ty: SimpleType, sort_sizes: Dict[str, int]) -> int:
    """Exact representation-space size from per-sort universe sizes."""
    if isinstance(ty, Sort):
        return 2 ** sort_sizes.get(ty.name, 0)
    if isinstance(ty, Product):
        product = 1
        for comp in flatten_product(ty):
            if not isinstance(comp, Sort):
                raise NotProductConsFree(f"product type {ty} has a functional component")
            product *= sort_sizes.get(comp.name, 0)
        return 2 ** product
    return repr_cardinality(ty.res, sort_sizes) ** repr_cardinality(ty.arg, sort_sizes)


def _chain_width(ty: SimpleType) -> int:
    """The largest number of types along any arrow spine occurring in ty."""
    if isinstance(ty, Sort):
        return 1
    if isinstance(ty, Product):
        return max(_chain_width(comp) for comp in flatten_product(ty))
    spine = arg_types(ty) + [result_type(ty)]
    return max(len(spine), max(_chain_width(part) for part in spine))


def _max_product_width(ty: SimpleType) -> int:
    if isinstance(ty, Sort):
        return 1
    if isinstance(ty, Product):
        return max(
            len(flatten_product(ty)),
            max(_max_product_width(comp) for comp in flatten_product(ty)),
        )
    return max(_max_product_width(ty.arg), _max_product_width(ty.res))


def within_cardinality_bound(value: int, ty: SimpleType, N: int) -> bool:
    """Whether value fits under the iterated-exponential ceiling
    exp2^(K+1)(d^K * N^b) on the representation-space size of a type over a
    data universe with N elements per sort. The tower is never materialized:
    each exponentiation level is inverted with a ceiling log2."""
    K = ty.order()
    d = _chain_width(ty)
    b = _max_product_width(ty)
    base = (d ** K) * (N ** b)
    for _ in range(K + 1):
        if value <= 1:
            return True
        value = (value - 1).bit_length()  # ceil(log2(value))
    return value <= base


@dataclass(frozen=True)
class Stmt:
    """A statement `f A1 .. Am ~> target` over representations."""

    fname: str
    args: Tuple[Repr, ...]
    target: object  # a data term, or a tuple of data terms for product sorts

    def __hash__(self) -> int:
        cached = self.__dict__.get("_hash")
        if cached is None:
            cached = hash((self.fname, self.args, self.target))
            object.__setattr__(self, "_hash", cached)
        return cached


class _StmtState:
    __slots__ = ("stmt", "up_to", "confirmed_at", "dep_states")

    def __init__(self, stmt: Stmt) -> None:
        self.stmt = stmt
        self.up_to = 0
        self.confirmed_at: Optional[int] = None
        self.dep_states: Optional[Tuple["_StmtState", ...]] = None


@dataclass
class SolveResult:
    """Reachable data normal forms of a basic term, with solver statistics."""

    normal_forms: List[Term]
    steps: int
    statements: int
    demanded: int
    solver: "Solver" = field(repr=False)


class Solver:
    """Step-indexed statement confirmation over representation spaces."""

    def __init__(
        self,
        atrs: Atrs,
        B: Optional[BSet] = None,
        space_budget: int = DEFAULT_SPACE_BUDGET,
        threads: int = 1,
    ):
        verdict = check(atrs)
        if atrs.pairing:
            if not verdict.product_cons_free:
                raise NotProductConsFree(
                    "; ".join(str(v) for v in verdict.violations) or "not product-cons-free"
                )
        elif not verdict.cons_free:
            raise NotConsFree(
                "; ".join(str(v) for v in verdict.violations) or "not cons-free"
            )
        self.atrs, self.removed_constructors = prune_ho_constructors(atrs)
        self.B = B if B is not None else BSet(frozenset())
        self.space_budget = space_budget
        self.threads = max(1, threads)
        self.spaces: Dict[SimpleType, object] = {}
        self.symbols = self.atrs.symbols
        self.rules_by_head: Dict[str, List[Rule]] = {}
        for rule in self.atrs.rules:
            head = rule.lhs.head
            if isinstance(head, FuncSym):
                self.rules_by_head.setdefault(head.name, []).append(rule)
        self.confirmed_at: Dict[Stmt, int] = {}
        self.state: Dict[Stmt, _StmtState] = {}
        self.demanded: Dict[Stmt, None] = {}
        self.nf_memo: Dict[Tuple, Tuple[Repr, FrozenSet[Stmt]]] = {}
        self.union_memo: Dict[Tuple, Tuple[FrozenSet, FrozenSet[Stmt]]] = {}
        self.plan_cache: Dict[Tuple, List] = {}
        self.targets_cache: Dict[SimpleType, List] = {}
        self.step = 0

    # -- spaces and targets ---------------------------------------------

    def space(self, ty: SimpleType):
        return build_space(ty, self.B, self.space_budget, self.spaces)

    def targets(self, ty: SimpleType) -> List:
        cached = self.targets_cache.get(ty)
        if cached is None:
            if isinstance(ty, Sort):
                cached = list(self.B.of_type(ty))
            elif isinstance(ty, Product):
                cached = list(self.space(ty).universe)
            else:
                raise NotBasic(f"{ty} is not a base type")
            self.targets_cache[ty] = cached
        return cached

    def statement_count(self) -> int:
        """The arithmetic number of statements over all defined symbols."""
        total = 0
        for sym in self.atrs.defined_symbols():
            product = 1
            for ty in arg_types(sym.type):
                product *= self.space(ty).card
            total += product * len(self.targets(result_type(sym.type)))
        return total

    # -- data representations -------------------------------------------

    def _data_value(self, t: Term) -> Repr:
        if isinstance(t.type, Product):
            flat = _flatten_data(t)
        else:
            flat = t
        self._check_safe(t)
        return frozenset([flat])

    def _check_safe(self, t: Term) -> None:
        if isinstance(t.head, PairHead):
            for arg in t.args:
                self._check_safe(arg)
        elif t not in self.B:
            raise NonBSafeTerm(f"data term {print_term(t)} lies outside the universe")

    # -- evaluation -----------------------------------------------------

    def nf(self, i: int, t: Term, eta: Tuple, deps: set) -> Repr:
        """The representation of t at step i under environment eta."""
        key = (i, t, eta)
        hit = self.nf_memo.get(key)
        if hit is not None:
            value, sub_deps = hit
            deps |= sub_deps
            return value
        local: set = set()
        value = self._nf_compute(i, t, eta, local)
        self.nf_memo[key] = (value, frozenset(local))
        deps |= local
        return value

    def _nf_compute(self, i: int, t: Term, eta: Tuple, deps: set) -> Repr:
        if is_data(t):
            return self._data_value(t)
        head = t.head
        if isinstance(head, PairHead):
            left = self.nf(i, t.args[0], eta, deps)
            right = self.nf(i, t.args[1], eta, deps)
            return frozenset(
                l + r
                for l in _as_tuples(left, t.args[0].type)
                for r in _as_tuples(right, t.args[1].type)
            )
        if isinstance(head, Variable):
            value = None
            for name, bound in eta:
                if name == head.name:
                    value = bound
                    break
            if value is None:
                raise UnboundVariable(f"variable {head.name} is not bound")
            for arg in t.args:
                value = value.apply(self.nf(i, arg, eta, deps))
            return value
        if head.is_constructor:
            raise NonBSafeTerm(
                f"constructor term {print_term(t)} is not data"
            )
        arg_values = [self.nf(i, arg, eta, deps) for arg in t.args]
        m = head.arity
        if len(arg_values) == m:
            return self._saturated(i, head, tuple(arg_values), deps)
        return self._tabulate(i, head, arg_values, deps)

    def _saturated(
        self, i: int, head: FuncSym, args: Tuple[Repr, ...], deps: set
    ) -> FrozenSet:
        res_ty = result_type(head.type)
        out = []
        for target in self.targets(res_ty):
            stmt = Stmt(head.name, args, target)
            deps.add(stmt)
            if self.conf(i, stmt):
                out.append(target)
        if isinstance(res_ty, Product):
            return frozenset(out)
        return frozenset(out)

    def _tabulate(
        self, i: int, head: FuncSym, prefix: List[Repr], deps: set
    ) -> FnRepr:
        types = arg_types(head.type)
        next_ty = types[len(prefix)]
        remaining = head.type
        for _ in range(len(prefix)):
            remaining = remaining.res
        fn_space = self.space(remaining)
        dom = self.space(next_ty)
        table = []
        for index in range(dom.card):
            value = dom.elem_at(index)
            extended = prefix + [value]
            if len(extended) == head.arity:
                table.append(self._saturated(i, head, tuple(extended), deps))
            else:
                table.append(self._tabulate(i, head, extended, deps))
        return FnRepr(fn_space, tuple(table))

    # -- statements -----------------------------------------------------

    def plans(self, fname: str, args: Tuple[Repr, ...]) -> List:
        """Instantiated right-hand sides and environments for a statement."""
        key = (fname, args)
        cached = self.plan_cache.get(key)
        if cached is not None:
            return cached
        sym = self.symbols[fname]
        types = arg_types(sym.type)
        m = sym.arity
        plans = []
        for rule in self.rules_by_head.get(fname, ()):
            k = rule.arity
            pads = [
                sym_term(Variable(f"#pad{j}", types[j])) for j in range(k, m)
            ]
            rhs = apply_term(rule.rhs, *pads)
            eta_base = []
            fixed: List[Tuple[int, Term]] = []
            for j, pattern in enumerate(rule.lhs.args):
                if isinstance(pattern.head, Variable) and not pattern.args:
                    eta_base.append((pattern.head.name, args[j]))
                else:
                    fixed.append((j, pattern))
            for j in range(k, m):
                eta_base.append((f"#pad{j}", args[j]))
            eta = tuple(sorted(eta_base))
            for subst in self._match_choices(fixed, args, types):
                plans.append((apply_subst(rhs, subst), eta))
        self.plan_cache[key] = plans
        return plans

    def _match_choices(
        self,
        fixed: List[Tuple[int, Term]],
        args: Tuple[Repr, ...],
        types: List[SimpleType],
    ):
        """All ways to match the non-variable patterns against members of the
        corresponding argument sets."""
        if not fixed:
            yield {}
            return
        choices = []
        for j, pattern in fixed:
            members = sorted(args[j], key=_member_key)
            matched = []
            for member in members:
                candidate = _member_term(member, types[j])
                subst: Dict[Variable, Term] = {}
                if _match_into(pattern, candidate, subst):
                    matched.append(subst)
            choices.append(matched)
        for combo in itertools.product(*choices):
            merged: Dict[Variable, Term] = {}
            for subst in combo:
                merged.update(subst)
            yield merged

    def rule_union(self, j: int, fname: str, args: Tuple[Repr, ...]):
        """Everything any rule for fname can produce at step j."""
        key = (j, fname, args)
        hit = self.union_memo.get(key)
        if hit is not None:
            return hit
        deps: set = set()
        out: set = set()
        for rhs, eta in self.plans(fname, args):
            value = self.nf(j - 1, rhs, eta, deps)
            out |= value
        result = (frozenset(out), frozenset(deps))
        self.union_memo[key] = result
        return result

    def _state_for(self, stmt: Stmt) -> _StmtState:
        state = self.state.get(stmt)
        if state is None:
            state = _StmtState(stmt)
            self.state[stmt] = state
            self.demanded[stmt] = None
        return state

    def conf(self, i: int, stmt: Stmt) -> bool:
        """Whether the statement is confirmed at step i."""
        return self._conf(i, self._state_for(stmt))

    def _conf(self, i: int, state: _StmtState) -> bool:
        if i <= 0:
            return False
        at = state.confirmed_at
        if at is not None and at <= i:
            return True
        while state.up_to < i and state.confirmed_at is None:
            if state.dep_states is not None:
                step = None
                base = state.up_to
                for dep in state.dep_states:
                    if dep.confirmed_at is None and dep.up_to < i - 1:
                        self._conf(i - 1, dep)
                    dep_at = dep.confirmed_at
                    if dep_at is None or dep_at <= base - 1 or dep_at > i - 1:
                        continue
                    candidate = dep_at + 1
                    if candidate > base and (step is None or candidate < step):
                        step = candidate
                if step is None:
                    state.up_to = i
                    break
            else:
                step = state.up_to + 1
            stmt = state.stmt
            union, deps = self.rule_union(step, stmt.fname, stmt.args)
            state.dep_states = tuple(self._state_for(dep) for dep in deps)
            state.up_to = max(state.up_to, step)
            if stmt.target in union:
                state.confirmed_at = step
                self.confirmed_at[stmt] = step
                break
        at = state.confirmed_at
        return at is not None and at <= i

    # -- the fixpoint loop ----------------------------------------------

    def advance_to_fixpoint(self, seeds: List[Stmt]) -> int:
        """Run passes of increasing step until the demanded fragment is stable;
        returns the quiescence step."""
        limit = sys.getrecursionlimit()
        if limit < 100000:
            sys.setrecursionlimit(100000)
        for stmt in seeds:
            self._state_for(stmt)
        while True:
            self.step += 1
            before = (len(self.confirmed_at), len(self.state))
            done = 0
            while done < len(self.state):
                batch = list(self.state.values())[done:]
                done += len(batch)
                if self.threads > 1:
                    with ThreadPoolExecutor(max_workers=self.threads) as pool:
                        list(pool.map(lambda s: self._conf(self.step, s), batch))
                else:
                    for st in batch:
                        self._conf(self.step, st)
            if (len(self.confirmed_at), len(self.state)) == before:
                return self.step
            if self.step > len(self.state) + 2:
                raise AssertionError("fixpoint exceeded the statement bound")

    def evaluate(self, queries: List[Tuple[Term, Tuple]]) -> List[Repr]:
        """Evaluate terms under environments at the stable table, extending the
        demanded fragment as needed."""
        previous: Optional[List[Repr]] = None
        while True:
            self.step += 1
            deps: set = set()
            values = [self.nf(self.step, t, eta, deps) for t, eta in queries]
            before = (len(self.confirmed_at), len(self.state))
            done = 0
            while done < len(self.state):
                batch = list(self.state.values())[done:]
                done += len(batch)
                for st in batch:
                    self._conf(self.step, st)
            stable = (len(self.confirmed_at), len(self.state)) == before
            if stable and values == previous:
                return values
            previous = values
            if self.step > len(self.state) + len(queries) + 4:
                raise AssertionError("evaluation exceeded the statement bound")


def solve(
    atrs: Atrs,
    s: Term,
    space_budget: int = DEFAULT_SPACE_BUDGET,
    threads: int = 1,
) -> SolveResult:
    """All data normal forms reachable from the basic term s, computed by
    statement saturation (no rewriting)."""
    if not is_basic(s):
        raise NotBasic(f"{print_term(s)} is not a basic term")
    solver = Solver(atrs, None, space_budget, threads)
    solver.B = compute_B(s, solver.atrs)
    head = s.head
    if head.name not in solver.symbols:
        raise NotBasic(f"{head.name} was pruned from the system")
    args = tuple(solver._data_value(arg) for arg in s.args)
    res_ty = result_type(head.type)
    seeds = [Stmt(head.name, args, target) for target in solver.targets(res_ty)]
    steps = solver.advance_to_fixpoint(seeds)
    found = []
    for stmt in seeds:
        if solver.conf(steps, stmt):
            found.append(_target_term(stmt.target, res_ty))
    return SolveResult(
        sorted(found, key=print_term),
        steps,
        solver.statement_count(),
        len(solver.demanded),
        solver,
    )


def solve_product(
    atrs: Atrs,
    s: Term,
    space_budget: int = DEFAULT_SPACE_BUDGET,
    threads: int = 1,
) -> SolveResult:
    """solve for systems with pairing; the system must use it."""
    if not atrs.pairing:
        raise NotProductConsFree("the system does not use pairing")
    return solve(atrs, s, space_budget, threads)


def _flatten_data(t: Term) -> Tuple[Term, ...]:
    if isinstance(t.head, PairHead):
        return _flatten_data(t.args[0]) + _flatten_data(t.args[1])
    return (t,)


def _as_tuples(value: FrozenSet, ty: SimpleType) -> List[Tuple[Term, ...]]:
    if isinstance(ty, Product):
        return list(value)
    return [(t,) for t in value]


def _member_key(member) -> str:
    if isinstance(member, tuple):
        return " ".join(print_term(t) for t in member)
    return print_term(member)


def _member_term(member, ty: SimpleType):
    """Rebuild a (possibly flattened tuple) member as a term of type ty."""
    if not isinstance(ty, Product):
        return member
    left_width = len(flatten_product(ty.left))
    left = _rebuild(member[:left_width], ty.left)
    right = _rebuild(member[left_width:], ty.right)
    return pair(left, right)


def _rebuild(parts: Tuple, ty: SimpleType) -> Term:
    if not isinstance(ty, Product):
        return parts[0]
    left_width = len(flatten_product(ty.left))
    return pair(_rebuild(parts[:left_width], ty.left), _rebuild(parts[left_width:], ty.right))


def _target_term(target, ty: SimpleType) -> Term:
    if isinstance(ty, Product):
        return _member_term(target, ty)
    return target
