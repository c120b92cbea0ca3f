"""Ground logic programs: atom table, rule forms, cardinality lowering, tightness.

Atoms are structural tuples whose first item is a tag:

    ("e", v, i)        v = i                     (direct ladder)
    ("r", v, l, u)     v in [l, u]               (range ladder)
    ("b", v, i)        v <= i                    (bound ladder)
    ("sup", k)         k-support variable
    ("cnt", c, i, j)   at least j of literals i.. of cardinality constraint c
    ("aux", k)         anything else

Body literals are ints: ``2*a`` for atom ``a`` and ``2*a + 1`` for ``not a``.
That is the same layout the nogood compiler uses for ``T a`` / ``F a``.
"""

from __future__ import annotations

import graphlib
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Union

log = logging.getLogger(__name__)


def E(v: int, i: int) -> tuple:
    return ("e", v, i)


def R(v: int, l: int, u: int) -> tuple:
    return ("r", v, l, u)


def B(v: int, i: int) -> tuple:
    return ("b", v, i)


def SUP(k: int) -> tuple:
    return ("sup", k)


def CNT(c: int, i: int, j: int) -> tuple:
    return ("cnt", c, i, j)


def AUX(k: int) -> tuple:
    return ("aux", k)


def pos(atom: int) -> int:
    return atom << 1


def neg(atom: int) -> int:
    return (atom << 1) | 1


def lit_atom(lit: int) -> int:
    return lit >> 1


def lit_positive(lit: int) -> bool:
    return not lit & 1


class Normal(NamedTuple):
    head: int
    body: tuple


class Choice(NamedTuple):
    heads: tuple
    body: tuple


class Integrity(NamedTuple):
    body: tuple


class CardIntegrity(NamedTuple):
    """``:- bound {lits}``: no ``bound`` of the literals may hold together."""

    bound: int
    lits: tuple


Rule = Union[Normal, Choice, Integrity, CardIntegrity]


@dataclass
class VarLayout:
    """How one CSP variable is laid out as atoms: ladders present and shift."""

    var: int
    lo: int
    hi: int
    ladders: set = field(default_factory=set)

    @property
    def d(self) -> int:
        return self.hi - self.lo + 1

    def shift(self, value: int) -> int:
        return value - self.lo + 1

    def unshift(self, i: int) -> int:
        return i + self.lo - 1


class Program:
    """A ground program over interned structural atoms."""

    def __init__(self):
        self.atoms: list[tuple] = []
        self._index: dict[tuple, int] = {}
        self.rules: list[Rule] = []
        self.layout: dict[int, VarLayout] = {}
        self._ncard = 0

    def __len__(self) -> int:
        return len(self.rules)

    def intern(self, sym: tuple) -> int:
        aid = self._index.get(sym)
        if aid is None:
            if sym[0] == "r" and sym[2] > sym[3]:
                raise ValueError(f"range atom with l > u: {sym}")
            aid = len(self.atoms)
            self._index[sym] = aid
            self.atoms.append(sym)
        return aid

    def lookup(self, sym: tuple) -> Optional[int]:
        return self._index.get(sym)

    def sym(self, aid: int) -> tuple:
        return self.atoms[aid]

    def p(self, sym: tuple) -> int:
        """Positive body literal for ``sym``."""
        return pos(self.intern(sym))

    def n(self, sym: tuple) -> int:
        """Default-negated body literal for ``sym``."""
        return neg(self.intern(sym))

    # rule construction -----------------------------------------------------

    def add_normal(self, head: tuple, body: Iterable[int] = ()) -> None:
        self.rules.append(Normal(self.intern(head), tuple(body)))

    def add_choice(self, heads: Iterable[tuple], body: Iterable[int] = ()) -> None:
        heads = tuple(self.intern(h) for h in heads)
        if not heads:
            raise ValueError("choice rule needs at least one head")
        self.rules.append(Choice(heads, tuple(body)))

    def add_integrity(self, body: Iterable[int]) -> None:
        # An empty body is a plain contradiction; encoders only emit one when
        # constant folding shows the constraint cannot be met.
        self.rules.append(Integrity(tuple(body)))

    def add_cardinality(self, bound: int, lits: Iterable[int]) -> None:
        lits = tuple(dict.fromkeys(lits))
        if bound > len(lits):
            log.debug("dropping vacuous cardinality constraint %d {%d literals}", bound, len(lits))
            return
        if bound <= 0:
            self.add_integrity(())
            return
        self.rules.append(CardIntegrity(bound, lits))

    def copy(self) -> "Program":
        out = Program()
        out.atoms = list(self.atoms)
        out._index = dict(self._index)
        out.rules = list(self.rules)
        out.layout = {v: VarLayout(l.var, l.lo, l.hi, set(l.ladders)) for v, l in self.layout.items()}
        out._ncard = self._ncard
        return out

    def head_atoms(self) -> set[int]:
        heads = set()
        for r in self.rules:
            if isinstance(r, Normal):
                heads.add(r.head)
            elif isinstance(r, Choice):
                heads.update(r.heads)
        return heads


# -- cardinality lowering ---------------------------------------------------

def lower_cardinality(prog: Program, card_id: int, bound: int, lits: tuple) -> list[Rule]:
    """Counter rules for ``:- bound {lits}`` over atoms ``cnt(card_id, i, j)``.

    ``cnt(c, i, j)`` holds iff at least ``j`` of ``lits[i-1:]`` hold.  Rule
    instances that mention ``cnt(c, n+1, j)`` or ``j > bound`` are dropped.
    """
    n, k = len(lits), bound
    cnt = lambda i, j: prog.intern(CNT(card_id, i, j))  # noqa: E731
    out: list[Rule] = []
    for i in range(1, n + 1):
        a = lits[i - 1]
        for j in range(1, k + 1):
            if i + 1 <= n:
                out.append(Normal(cnt(i, j), (pos(cnt(i + 1, j)),)))
                if j + 1 <= k:
                    out.append(Normal(cnt(i, j + 1), (a, pos(cnt(i + 1, j)))))
        out.append(Normal(cnt(i, 1), (a,)))
    out.append(Integrity((pos(cnt(1, k)),)))
    return out


def counter_rule_count(n: int, k: int) -> int:
    """Number of rules ``lower_cardinality`` emits for ``n`` literals, bound ``k``."""
    return (n - 1) * k + (n - 1) * (k - 1) + n + 1


def translate_cardinality(prog: Program) -> Program:
    """Copy of ``prog`` with every cardinality integrity replaced by counter rules."""
    out = prog.copy()
    out.rules = []
    for r in prog.rules:
        if isinstance(r, CardIntegrity):
            out.rules.extend(lower_cardinality(out, out._ncard, r.bound, r.lits))
            out._ncard += 1
        else:
            out.rules.append(r)
    return out


# -- tightness --------------------------------------------------------------

def dependency_graph(prog: Program) -> dict[int, set[int]]:
    graph: dict[int, set[int]] = {}
    for r in prog.rules:
        if isinstance(r, Normal):
            heads = (r.head,)
        elif isinstance(r, Choice):
            heads = r.heads
        else:
            continue
        deps = {lit >> 1 for lit in r.body if not lit & 1}
        for h in heads:
            graph.setdefault(h, set()).update(deps)
    return graph


def is_tight(prog: Program) -> bool:
    """True iff the positive atom dependency graph is acyclic."""
    if any(isinstance(r, CardIntegrity) for r in prog.rules):
        raise ValueError("is_tight expects a program without cardinality constraints")
    try:
        graphlib.TopologicalSorter(dependency_graph(prog)).prepare()
    except graphlib.CycleError:
        return False
    return True


# -- text format ------------------------------------------------------------

def render_atom(sym: tuple) -> str:
    tag = sym[0]
    if tag in ("e", "b"):
        return f"{tag}(v{sym[1]},{sym[2]})"
    if tag == "r":
        return f"r(v{sym[1]},{sym[2]},{sym[3]})"
    return f"{tag}({','.join(map(str, sym[1:]))})"


def render_lit(prog: Program, lit: int) -> str:
    text = render_atom(prog.atoms[lit >> 1])
    return f"not {text}" if lit & 1 else text


def render_rule(prog: Program, r: Rule) -> str:
    body = lambda lits: ", ".join(render_lit(prog, x) for x in lits)  # noqa: E731
    if isinstance(r, Normal):
        head = render_atom(prog.atoms[r.head])
        return f"{head} :- {body(r.body)}." if r.body else f"{head}."
    if isinstance(r, Choice):
        heads = "; ".join(render_atom(prog.atoms[h]) for h in r.heads)
        return f"{{{heads}}} :- {body(r.body)}." if r.body else f"{{{heads}}}."
    if isinstance(r, Integrity):
        return f":- {body(r.body)}." if r.body else ":- ."
    lits = "; ".join(render_lit(prog, x) for x in r.lits)
    return f":- {r.bound} {{{lits}}}."


def serialize_program(prog: Program) -> bytes:
    """Render ``prog`` one rule per line; variable layouts go in ``%`` comments."""
    lines = []
    for v in sorted(prog.layout):
        lay = prog.layout[v]
        lines.append(f"% var v{v} lo={lay.lo} hi={lay.hi} ladders={','.join(sorted(lay.ladders))}")
    lines.extend(render_rule(prog, r) for r in prog.rules)
    return ("\n".join(lines) + "\n").encode("utf-8")


_ATOM_RE = re.compile(r"(not\s+)?([a-z]+)\(([^()]*)\)")
_LAYOUT_RE = re.compile(r"% var v(\d+) lo=(-?\d+) hi=(-?\d+) ladders=([a-z,]*)")


def _parse_atom(tag: str, args: str) -> tuple:
    parts = [a.strip() for a in args.split(",")]
    return (tag, *(int(a[1:]) if a.startswith("v") else int(a) for a in parts))


def _parse_lits(prog: Program, text: str) -> tuple:
    out = []
    for m in _ATOM_RE.finditer(text):
        aid = prog.intern(_parse_atom(m.group(2), m.group(3)))
        out.append(neg(aid) if m.group(1) else pos(aid))
    return tuple(out)


def parse_program(data: bytes | str) -> Program:
    """Inverse of ``serialize_program`` (atom ids may differ)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    prog = Program()
    card_re = re.compile(r":-\s*(\d+)\s*\{(.*)\}\s*\.$")
    for lineno, line in enumerate(data.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("%"):
            m = _LAYOUT_RE.match(line)
            if m:
                v = int(m.group(1))
                ladders = set(filter(None, m.group(4).split(",")))
                prog.layout[v] = VarLayout(v, int(m.group(2)), int(m.group(3)), ladders)
            continue
        if not line.endswith("."):
            raise ValueError(f"line {lineno}: rule must end with '.'")
        m = card_re.match(line)
        if m:
            prog.rules.append(CardIntegrity(int(m.group(1)), _parse_lits(prog, m.group(2))))
            continue
        head, sep, body = line[:-1].partition(":-")
        body_lits = _parse_lits(prog, body) if sep else ()
        head = head.strip()
        if not head:
            prog.rules.append(Integrity(body_lits))
        elif head.startswith("{"):
            heads = _parse_lits(prog, head)
            prog.rules.append(Choice(tuple(h >> 1 for h in heads), body_lits))
        else:
            prog.rules.append(Normal(_parse_lits(prog, head)[0] >> 1, body_lits))
    return prog
