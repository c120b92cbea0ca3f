"""Benchmark instance families: pigeonhole, Latin square completion, graceful double wheels."""

from __future__ import annotations

import enum
import math
import random

from .csp import CspInstance, alldifferent, permutation, table


class LatinMode(str, enum.Enum):
    FROM_COMPLETE = "from_complete"  # fixed cells copied from a full square: always SAT
    RANDOM = "random"  # locally consistent random fill: may be UNSAT


def gen_php(n: int) -> CspInstance:
    """``n`` pigeons over ``n - 1`` holes, pairwise distinct."""
    if n < 2:
        raise ValueError("pigeonhole instances need n >= 2")
    return CspInstance.build([(1, n - 1)] * n, [alldifferent(*range(n))],
                             [f"p{i}" for i in range(n)])


def _random_square(n: int, rng: random.Random) -> list[list[int]]:
    rows = list(range(n))
    cols = list(range(n))
    syms = list(range(1, n + 1))
    rng.shuffle(rows)
    rng.shuffle(cols)
    rng.shuffle(syms)
    return [[syms[(rows[r] + cols[c]) % n] for c in range(n)] for r in range(n)]


def gen_latin(n: int, fill_fraction: float, seed: int = 0,
              mode: LatinMode | str = LatinMode.FROM_COMPLETE) -> CspInstance:
    """An ``n`` x ``n`` completion problem; cell ``(r, c)`` is variable ``r*n + c``.

    ``floor(fill_fraction * n*n)`` cells get singleton domains.  In RANDOM
    mode a cell whose row and column already use every value stays open, so
    slightly fewer cells can end up fixed.
    """
    if n < 1:
        raise ValueError("Latin squares need n >= 1")
    if not 0.0 <= fill_fraction <= 1.0:
        raise ValueError(f"fill fraction {fill_fraction} outside [0, 1]")
    try:
        mode = LatinMode(mode)
    except ValueError:
        raise ValueError(f"unknown Latin generator mode {mode!r}") from None
    rng = random.Random(seed)
    target = math.floor(fill_fraction * n * n)
    cells = [(r, c) for r in range(n) for c in range(n)]
    fixed: dict[tuple[int, int], int] = {}
    if mode is LatinMode.FROM_COMPLETE:
        square = _random_square(n, rng)
        for r, c in rng.sample(cells, target):
            fixed[(r, c)] = square[r][c]
    else:
        rng.shuffle(cells)
        row_used = [set() for _ in range(n)]
        col_used = [set() for _ in range(n)]
        for r, c in cells:
            if len(fixed) == target:
                break
            free = [x for x in range(1, n + 1) if x not in row_used[r] and x not in col_used[c]]
            if not free:
                continue
            x = rng.choice(free)
            fixed[(r, c)] = x
            row_used[r].add(x)
            col_used[c].add(x)
    domains = []
    for r in range(n):
        for c in range(n):
            x = fixed.get((r, c))
            domains.append((x, x) if x is not None else (1, n))
    cons = [permutation(*(r * n + c for c in range(n))) for r in range(n)]
    cons += [permutation(*(r * n + c for r in range(n))) for c in range(n)]
    names = [f"x{r}_{c}" for r in range(n) for c in range(n)]
    return CspInstance.build(domains, cons, names)


def double_wheel_edges(n: int) -> list[tuple[int, int]]:
    """Edges of the double wheel: node 0 is the hub, 1..n and n+1..2n the two rims."""
    edges = []
    for base in (1, n + 1):
        for i in range(n):
            edges.append((base + i, base + (i + 1) % n))
    for v in range(1, 2 * n + 1):
        edges.append((0, v))
    return edges


def gen_graceful_double_wheel(n: int) -> CspInstance:
    """Graceful labelling of the double wheel with ``2n + 1`` nodes and ``4n`` edges.

    Node labels are shifted by one into ``[1, 4n+1]``; edge labels live in
    ``[1, 4n]``.  Variables ``0..2n`` are nodes, ``2n+1..6n`` edges, and every
    edge carries the ternary table ``(f(v), f(w), |f(v) - f(w)|)``.
    """
    if n < 3:
        raise ValueError("double wheels need n >= 3")
    edges = double_wheel_edges(n)
    m = len(edges)
    nodes = 2 * n + 1
    labels = range(1, m + 2)
    diff = frozenset((a, b, abs(a - b)) for a in labels for b in labels if a != b)
    domains = [(1, m + 1)] * nodes + [(1, m)] * m
    names = [f"f{v}" for v in range(nodes)] + [f"d{v}_{w}" for v, w in edges]
    cons = [alldifferent(*range(nodes)), permutation(*range(nodes, nodes + m))]
    cons += [table((v, w, nodes + i), diff) for i, (v, w) in enumerate(edges)]
    return CspInstance.build(domains, cons, names)
