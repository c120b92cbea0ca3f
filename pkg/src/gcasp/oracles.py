"""Brute-force reference implementations used as test oracles.

Nothing here shares code with the encoders or the engine: consistency levels
are computed straight from their definitions by exhaustive support search,
and answer sets by the reduct.  A ``None`` domain state means FAILED.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Callable, Mapping, Optional

from .csp import Constraint, CspInstance, Domain, Kind, Polarity
from .program import CardIntegrity, Choice, Integrity, Normal, Program

MAX_ARITY = 8
MAX_DOMAIN = 8
MAX_ENUM = 10**6
MAX_GUESS_ATOMS = 18

State = dict  # VarId -> Domain


def _accepts(c: Constraint, t: tuple, universe) -> bool:
    if c.kind is Kind.TABLE:
        listed = t in c.tuples
        return listed if c.polarity is Polarity.ALLOWED else not listed
    if len(set(t)) != len(t):
        return False
    return c.kind is not Kind.PERMUTATION or set(t) == universe


def _universe(instance: Optional[CspInstance], c: Constraint):
    if c.kind is not Kind.PERMUTATION:
        return None
    if instance is None:
        raise ValueError("permutation constraints need the instance for their value universe")
    vals = set()
    for v in c.scope:
        var = instance.variables[v]
        vals.update(range(var.lo, var.hi + 1))
    return vals


def _check_guard(c: Constraint, state: Mapping[int, Domain]) -> None:
    if c.arity > MAX_ARITY or any(state[v].hi - state[v].lo + 1 > MAX_DOMAIN for v in c.scope):
        raise ValueError(f"oracle size guard exceeded (arity <= {MAX_ARITY}, domain <= {MAX_DOMAIN})")


def _exists(c: Constraint, choices: list, universe) -> bool:
    """Exhaustive search for an accepted tuple with position i drawn from choices[i]."""
    if c.kind is Kind.TABLE:
        return any(_accepts(c, t, universe) for t in itertools.product(*choices))
    n = len(choices)
    used: set = set()

    def dfs(i: int) -> bool:
        if i == n:
            return universe is None or used == universe
        for x in choices[i]:
            if x not in used:
                used.add(x)
                if dfs(i + 1):
                    return True
                used.discard(x)
        return False

    return dfs(0)


def _revise_all(c: Constraint, state: State, universe, support_space: Callable) -> Optional[State]:
    """Remove values lacking a support until nothing changes."""
    state = dict(state)
    changed = True
    while changed:
        changed = False
        for pos, v in enumerate(c.scope):
            keep = []
            for x in state[v].values():
                choices = [[x] if j == pos else support_space(state[w]) for j, w in enumerate(c.scope)]
                if _exists(c, choices, universe):
                    keep.append(x)
            if len(keep) != len(state[v]):
                dom = Domain.from_values(keep)
                if dom is None:
                    return None
                state[v] = dom
                changed = True
    return state


def _interval(dom: Domain) -> range:
    return range(dom.min, dom.max + 1)


def hyper_arc_consistent_domains(c: Constraint, state: State, instance: Optional[CspInstance] = None) -> Optional[State]:
    """Domain consistency: every value extends within the current domains."""
    _check_guard(c, state)
    return _revise_all(c, state, _universe(instance, c), lambda d: d.values())


def range_consistent_domains(c: Constraint, state: State, instance: Optional[CspInstance] = None) -> Optional[State]:
    """Remove every value with no bound support (others range over [min, max])."""
    _check_guard(c, state)
    return _revise_all(c, state, _universe(instance, c), _interval)


def bound_consistent_domains(c: Constraint, state: State, instance: Optional[CspInstance] = None) -> Optional[State]:
    """Shrink min/max until both have bound supports; interior holes stay."""
    _check_guard(c, state)
    universe = _universe(instance, c)
    state = dict(state)
    changed = True
    while changed:
        changed = False
        for pos, v in enumerate(c.scope):
            dom = state[v]
            vals = dom.values()
            lo_i, hi_i = 0, len(vals) - 1

            def supported(x):
                choices = [[x] if j == pos else _interval(state[w]) for j, w in enumerate(c.scope)]
                return _exists(c, choices, universe)

            while lo_i <= hi_i and not supported(vals[lo_i]):
                lo_i += 1
            while hi_i >= lo_i and not supported(vals[hi_i]):
                hi_i -= 1
            if lo_i > hi_i:
                return None
            if lo_i or hi_i != len(vals) - 1:
                state[v] = Domain.from_values(vals[lo_i:hi_i + 1])
                changed = True
    return state


def fixpoint(instance: CspInstance, state: State, op: Callable) -> Optional[State]:
    """Apply a per-constraint consistency operator to every constraint until stable."""
    state = dict(state)
    while True:
        before = state
        for c in instance.constraints:
            state = op(c, state, instance)
            if state is None:
                return None
        if state == before:
            return state


def ac3_binary_decomposition(instance: CspInstance, state: State) -> Optional[State]:
    """AC-3 on binary tables plus the pairwise ``!=`` decomposition of all-different."""
    arcs: dict[tuple[int, int], list[Callable]] = {}
    for c in instance.constraints:
        if c.kind is Kind.TABLE:
            if c.arity != 2:
                raise ValueError("AC-3 oracle handles binary tables only")
            x, y = c.scope
            arcs.setdefault((x, y), []).append(lambda a, b, c=c: _accepts(c, (a, b), None))
            arcs.setdefault((y, x), []).append(lambda b, a, c=c: _accepts(c, (a, b), None))
        else:
            for x, y in itertools.permutations(c.scope, 2):
                arcs.setdefault((x, y), []).append(lambda a, b: a != b)
    doms = {v: set(d.values()) for v, d in state.items()}
    queue = deque(arcs)
    queued = set(arcs)
    while queue:
        x, y = queue.popleft()
        queued.discard((x, y))
        preds = arcs[(x, y)]
        removed = {a for a in doms[x]
                   if not all(any(p(a, b) for b in doms[y]) for p in preds)}
        if removed:
            doms[x] -= removed
            if not doms[x]:
                return None
            for (z, w) in arcs:
                if w == x and (z, w) not in queued:
                    queue.append((z, w))
                    queued.add((z, w))
    return {v: Domain.from_values(vals) for v, vals in doms.items()}


def relational_k_extension_exists(c: Constraint, state: State, partial: Mapping[int, int],
                                  instance: Optional[CspInstance] = None) -> bool:
    """Does the partial assignment extend to a satisfying tuple within ``state``?"""
    choices = [[partial[v]] if v in partial else state[v].values() for v in c.scope]
    return _exists(c, choices, _universe(instance, c))


def enumerate_solutions(instance: CspInstance) -> list[dict[int, int]]:
    """Every satisfying assignment, in lexicographic order of (v0, v1, ...)."""
    total = 1
    for v in instance.variables:
        total *= v.hi - v.lo + 1
    if total > MAX_ENUM:
        raise ValueError(f"search space {total} exceeds the enumeration guard {MAX_ENUM}")
    order = [v.id for v in instance.variables]
    last = {}
    for c in instance.constraints:
        last.setdefault(max(c.scope, key=order.index), []).append(c)
    universes = [_universe(instance, c) for c in instance.constraints]
    uni = {id(c): u for c, u in zip(instance.constraints, universes)}
    out = []
    current: dict[int, int] = {}

    def dfs(k: int) -> None:
        if k == len(order):
            out.append(dict(current))
            return
        v = order[k]
        var = instance.variables[v]
        for x in range(var.lo, var.hi + 1):
            current[v] = x
            if all(_accepts(c, tuple(current[w] for w in c.scope), uni[id(c)]) for c in last.get(v, ())):
                dfs(k + 1)
        current.pop(v, None)

    dfs(0)
    return out


# -- answer sets ----------------------------------------------------------------

def _least_model(definite: list[tuple[int, tuple]]) -> set[int]:
    model: set[int] = set()
    changed = True
    while changed:
        changed = False
        for head, body in definite:
            if head not in model and all(a in model for a in body):
                model.add(head)
                changed = True
    return model


def _holds(lit: int, model: set) -> bool:
    return ((lit >> 1) in model) != bool(lit & 1)


def brute_force_answer_sets(program: Program) -> list[frozenset]:
    """Answer sets via the reduct, over every guess of the non-monotone atoms.

    Only atoms under default negation or in choice heads change the reduct, so
    a candidate ``X`` is fixed by ``X ∩ G`` for that guess set ``G``.
    """
    guess = set()
    for r in program.rules:
        if isinstance(r, (Normal, Choice)):
            guess.update(l >> 1 for l in r.body if l & 1)
        if isinstance(r, Choice):
            guess.update(r.heads)
    guess_set = guess
    guess = sorted(guess)
    if len(guess) > MAX_GUESS_ATOMS:
        raise ValueError(f"{len(guess)} guess atoms exceed the guard of {MAX_GUESS_ATOMS}")
    out = []
    for bits in range(1 << len(guess)):
        g = {a for k, a in enumerate(guess) if bits >> k & 1}
        definite = []
        for r in program.rules:
            if isinstance(r, Normal):
                if not any((l >> 1) in g for l in r.body if l & 1):
                    definite.append((r.head, tuple(l >> 1 for l in r.body if not l & 1)))
            elif isinstance(r, Choice):
                if not any((l >> 1) in g for l in r.body if l & 1):
                    positives = tuple(l >> 1 for l in r.body if not l & 1)
                    definite.extend((h, positives) for h in r.heads if h in g)
        model = _least_model(definite)
        if model & guess_set != g:
            continue
        ok = True
        for r in program.rules:
            if isinstance(r, Integrity) and all(_holds(l, model) for l in r.body):
                ok = False
            elif isinstance(r, CardIntegrity) and sum(_holds(l, model) for l in r.lits) >= r.bound:
                ok = False
        if ok:
            out.append(frozenset(model))
    return sorted(out, key=lambda s: sorted(s))
