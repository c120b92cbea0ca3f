"""Compile CSP variables and constraints into ground logic programs.

Every variable ``v`` with initial domain ``[lo, hi]`` is laid out over the
shifted domain ``[1, d]`` with ``d = hi - lo + 1``.  Constraint encoders work
on original values and translate through each variable's ``VarLayout``, so
variables with different domains can share a constraint.

Ladder atoms that fall outside a variable's shifted domain (``r(v,1,0)``,
``r(v,d+1,d)``, ``b(v,0)``) are constant false: ``not`` of them is dropped
from a body and a positive occurrence drops the whole rule.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from .csp import Constraint, CspInstance, Kind, Polarity, validate
from .program import B, E, R, SUP, Program, Rule, VarLayout, translate_cardinality, is_tight

MAX_TABLE_BOX = 2_000_000


class ConfigError(ValueError):
    """Raised for inconsistent encoding configurations or missing ladders."""


class VarEncoding(str, enum.Enum):
    DIRECT = "direct"
    BOUND = "bound"
    RANGE = "range"
    BOUND_HYBRID = "bound-hybrid"
    RANGE_HYBRID = "range-hybrid"


class ConEncoding(str, enum.Enum):
    DIRECT = "direct"
    SUPPORT = "support"
    KSUPPORT = "ksupport"
    RANGE = "range"
    BOUND = "bound"


LADDERS = {
    VarEncoding.DIRECT: {"e"},
    VarEncoding.BOUND: {"b"},
    VarEncoding.RANGE: {"r"},
    VarEncoding.BOUND_HYBRID: {"b", "e"},
    VarEncoding.RANGE_HYBRID: {"r", "e"},
}

NEEDS = {
    ConEncoding.DIRECT: "e",
    ConEncoding.SUPPORT: "e",
    ConEncoding.KSUPPORT: "e",
    ConEncoding.RANGE: "r",
    ConEncoding.BOUND: "b",
}


@dataclass(frozen=True)
class EncodingConfig:
    variable_encoding: VarEncoding = VarEncoding.DIRECT
    constraint_encoding: ConEncoding = ConEncoding.SUPPORT
    k: int = 1
    hall_cap: Optional[int] = None
    permutation_strengthening: bool = False
    # Encoding used for TABLE constraints; None means constraint_encoding.
    table_encoding: Optional[ConEncoding] = None

    def check(self) -> None:
        ladders = LADDERS[VarEncoding(self.variable_encoding)]
        for enc in {self.constraint_encoding, self.table_encoding or self.constraint_encoding}:
            if NEEDS[enc] not in ladders:
                raise ConfigError(
                    f"{enc.value} constraint encoding needs a {NEEDS[enc]}-ladder, "
                    f"which {self.variable_encoding.value} variables lack")
        if self.constraint_encoding is ConEncoding.KSUPPORT and self.k < 1:
            raise ConfigError("k-support needs k >= 1")
        if self.hall_cap is not None and self.hall_cap < 1:
            raise ConfigError("hall cap must be a positive integer")

    @property
    def name(self) -> str:
        enc = self.constraint_encoding
        if enc is ConEncoding.SUPPORT:
            base = "S"
        elif enc in (ConEncoding.RANGE, ConEncoding.BOUND):
            base = "R" if enc is ConEncoding.RANGE else "B"
            if self.hall_cap is not None:
                base += f"_h{self.hall_cap}"
        elif enc is ConEncoding.KSUPPORT:
            base = f"ksupport{self.k}"
        else:
            base = "direct"
        return base


_NAME_RE = re.compile(r"^(S|B|R|direct|ksupport)(?:_?h?(\d+))?$")


def named_config(name: str, tables_direct: bool = False) -> EncodingConfig:
    """Configs used by the benchmarks: ``S``, ``B``, ``R``, ``B_h3``, ``R_h1``, ``direct``, ``ksupport2``.

    ``tables_direct`` compiles TABLE constraints with the direct encoding and
    switches bound/range variables to their hybrids so ``e`` atoms exist.
    """
    m = _NAME_RE.match(name)
    if not m:
        raise ConfigError(f"unknown encoding name {name!r}")
    base, num = m.group(1), m.group(2)
    num = int(num) if num else None
    if base == "S":
        cfg = EncodingConfig(VarEncoding.DIRECT, ConEncoding.SUPPORT)
    elif base == "direct":
        cfg = EncodingConfig(VarEncoding.DIRECT, ConEncoding.DIRECT)
    elif base == "ksupport":
        cfg = EncodingConfig(VarEncoding.DIRECT, ConEncoding.KSUPPORT, k=num or 1)
    elif base == "B":
        var = VarEncoding.BOUND_HYBRID if tables_direct else VarEncoding.BOUND
        cfg = EncodingConfig(var, ConEncoding.BOUND, hall_cap=num)
    else:
        var = VarEncoding.RANGE_HYBRID if tables_direct else VarEncoding.RANGE
        cfg = EncodingConfig(var, ConEncoding.RANGE, hall_cap=num)
    cfg = replace(cfg, permutation_strengthening=True)
    if tables_direct:
        cfg = replace(cfg, table_encoding=ConEncoding.DIRECT)
    return cfg


@dataclass
class EncodedInstance:
    program: Program
    instance: CspInstance
    config: EncodingConfig
    audit: list = field(default_factory=list)  # per constraint: (first rule, end rule)

    @property
    def var_map(self) -> dict[int, VarLayout]:
        return self.program.layout

    def lowered(self) -> Program:
        return translate_cardinality(self.program)


def _since(prog: Program, start: int) -> list[Rule]:
    return prog.rules[start:]


def _layout(prog: Program, v: int, d: int) -> VarLayout:
    lay = prog.layout.get(v)
    if lay is None:
        lay = prog.layout[v] = VarLayout(v, 1, d)
    return lay


def _require(prog: Program, v: int, ladder: str) -> VarLayout:
    lay = prog.layout.get(v)
    if lay is None or ladder not in lay.ladders:
        raise ConfigError(f"variable v{v} has no {ladder}-ladder")
    return lay


# -- variable ladders ---------------------------------------------------------

def encode_var_direct(prog: Program, v: int, d: int) -> list[Rule]:
    """Choice over ``e(v,1..d)``, at least one value, at most one value."""
    if d < 1:
        raise ConfigError("empty domain")
    start = len(prog.rules)
    atoms = [E(v, i) for i in range(1, d + 1)]
    prog.add_choice(atoms)
    prog.add_integrity(prog.n(a) for a in atoms)
    prog.add_cardinality(2, (prog.p(a) for a in atoms))
    _layout(prog, v, d).ladders.add("e")
    return _since(prog, start)


def encode_var_bound(prog: Program, v: int, d: int) -> list[Rule]:
    """Choice over ``b(v,1..d)`` with the ladder ``v <= i => v <= i+1`` and ``v <= d``."""
    if d < 1:
        raise ConfigError("empty domain")
    start = len(prog.rules)
    prog.add_choice(B(v, i) for i in range(1, d + 1))
    for i in range(1, d):
        prog.add_integrity((prog.p(B(v, i)), prog.n(B(v, i + 1))))
    prog.add_integrity((prog.n(B(v, d)),))
    _layout(prog, v, d).ladders.add("b")
    return _since(prog, start)


def encode_var_range(prog: Program, v: int, d: int) -> list[Rule]:
    """Range atoms ``r(v,l,u)`` for all subintervals of ``[1, d]``.

    Monotonicity is posted as ``v in [l,u] => v in [l-1,u]`` and
    ``v in [l,u] => v in [l,u+1]``.
    """
    if d < 1:
        raise ConfigError("empty domain")
    start = len(prog.rules)
    for l in range(1, d + 1):
        for u in range(l, d + 1):
            body = []
            if l >= 2:
                body.append(prog.n(R(v, 1, l - 1)))
            if u <= d - 1:
                body.append(prog.n(R(v, u + 1, d)))
            prog.add_normal(R(v, l, u), body)
    for l in range(1, d + 1):
        for u in range(l, d + 1):
            if l >= 2:
                prog.add_integrity((prog.p(R(v, l, u)), prog.n(R(v, l - 1, u))))
            if u <= d - 1:
                prog.add_integrity((prog.p(R(v, l, u)), prog.n(R(v, l, u + 1))))
    _layout(prog, v, d).ladders.add("r")
    return _since(prog, start)


def link_range_direct(prog: Program, v: int, d: int) -> list[Rule]:
    """``v = i <=> v in [i, i]``."""
    _require(prog, v, "r")
    start = len(prog.rules)
    for i in range(1, d + 1):
        prog.add_normal(E(v, i), (prog.p(R(v, i, i)),))
        prog.add_integrity((prog.p(E(v, i)), prog.n(R(v, i, i))))
    prog.layout[v].ladders.add("e")
    return _since(prog, start)


def link_bound_direct(prog: Program, v: int, d: int) -> list[Rule]:
    """``v = i <=> v <= i and not v <= i-1``."""
    _require(prog, v, "b")
    start = len(prog.rules)
    for i in range(1, d + 1):
        body = [prog.p(B(v, i))]
        if i >= 2:
            body.append(prog.n(B(v, i - 1)))
        prog.add_normal(E(v, i), body)
        prog.add_integrity((prog.p(E(v, i)), prog.n(B(v, i))))
        if i >= 2:
            prog.add_integrity((prog.p(E(v, i)), prog.p(B(v, i - 1))))
    prog.layout[v].ladders.add("e")
    return _since(prog, start)


def link_bound_range(prog: Program, v: int, d: int) -> list[Rule]:
    """Define every ``r(v,l,u)`` from the bound ladder."""
    lay = _require(prog, v, "b")
    start = len(prog.rules)
    for l in range(1, d + 1):
        for u in range(l, d + 1):
            body = [] if l == 1 else [prog.n(B(v, l - 1))]
            body.append(prog.p(B(v, u)))
            prog.add_normal(R(v, l, u), body)
            if l >= 2:
                prog.add_integrity((prog.p(R(v, l, u)), prog.p(B(v, l - 1))))
            prog.add_integrity((prog.p(R(v, l, u)), prog.n(B(v, u))))
    lay.ladders.add("rb")
    return _since(prog, start)


# -- value translation --------------------------------------------------------

def _e(prog: Program, v: int, x: int) -> Optional[tuple]:
    lay = prog.layout[v]
    return E(v, x - lay.lo + 1) if lay.lo <= x <= lay.hi else None


def _r(prog: Program, v: int, lo: int, hi: int) -> Optional[tuple]:
    """Atom for ``v in [lo, hi]`` (original values); None when constant false."""
    lay = prog.layout[v]
    lo, hi = max(lo, lay.lo), min(hi, lay.hi)
    if lo > hi:
        return None
    return R(v, lo - lay.lo + 1, hi - lay.lo + 1)


def _domains(instance: CspInstance, c: Constraint) -> list[range]:
    return [range(instance.variables[v].lo, instance.variables[v].hi + 1) for v in c.scope]


def allowed_tuples(instance: CspInstance, c: Constraint) -> set[tuple]:
    """Allowed tuples of ``c`` inside the initial domain box of its scope."""
    doms = _domains(instance, c)
    size = 1
    for d in doms:
        size *= len(d)
    if c.kind is Kind.TABLE and c.polarity is Polarity.ALLOWED:
        return {t for t in c.tuples if all(x in d for x, d in zip(t, doms))}
    if size > MAX_TABLE_BOX:
        raise ConfigError(f"domain box of {size} tuples is too large to tabulate")
    universe = instance.universe(c) if c.kind is Kind.PERMUTATION else None
    return {t for t in itertools.product(*doms) if c.accepts(t, universe)}


def forbidden_tuples(instance: CspInstance, c: Constraint) -> list[tuple]:
    doms = _domains(instance, c)
    if c.kind is Kind.TABLE and c.polarity is Polarity.FORBIDDEN:
        return sorted(t for t in c.tuples if all(x in d for x, d in zip(t, doms)))
    allowed = allowed_tuples(instance, c)
    return [t for t in itertools.product(*doms) if t not in allowed]


# -- table encodings ----------------------------------------------------------

def encode_table_direct(prog: Program, instance: CspInstance, c: Constraint) -> list[Rule]:
    """One integrity per forbidden tuple."""
    start = len(prog.rules)
    for v in c.scope:
        _require(prog, v, "e")
    for t in forbidden_tuples(instance, c):
        prog.add_integrity(prog.p(_e(prog, v, x)) for v, x in zip(c.scope, t))
    return _since(prog, start)


def encode_table_support(prog: Program, instance: CspInstance, c: Constraint) -> list[Rule]:
    """Whenever ``v = i`` some supporting value of the other variable must hold."""
    if c.arity != 2:
        raise ConfigError("support encoding is binary")
    start = len(prog.rules)
    for v in c.scope:
        _require(prog, v, "e")
    allowed = allowed_tuples(instance, c)
    doms = _domains(instance, c)
    for a, b in ((0, 1), (1, 0)):
        v, w = c.scope[a], c.scope[b]
        for x in doms[a]:
            supports = [t[b] for t in sorted(allowed) if t[a] == x]
            body = [prog.p(_e(prog, v, x))]
            body.extend(prog.n(_e(prog, w, y)) for y in supports)
            prog.add_integrity(body)
    return _since(prog, start)


class _SupportIndex:
    """Interns k-support extensions so equal extensions share one ``sup`` atom."""

    def __init__(self, prog: Program):
        self.prog = prog
        self.keys: dict = getattr(prog, "_sup_keys", None)
        if self.keys is None:
            self.keys = prog._sup_keys = {}

    def atom(self, key, defining_body) -> tuple:
        idx = self.keys.get(key)
        if idx is None:
            idx = self.keys[key] = len(self.keys)
            self.prog.add_normal(SUP(idx), defining_body)
        return SUP(idx)


def encode_table_ksupport(prog: Program, instance: CspInstance, c: Constraint, k: int,
                          tag: int = 0) -> list[Rule]:
    """k-support rules: each assignment of ``k`` scope variables needs a support.

    ``tag`` distinguishes constraints so their support atoms stay apart.
    """
    if not 1 <= k < c.arity:
        raise ConfigError(f"k-support needs 1 <= k < arity, got k={k}, arity={c.arity}")
    start = len(prog.rules)
    for v in c.scope:
        _require(prog, v, "e")
    allowed = sorted(allowed_tuples(instance, c))
    doms = _domains(instance, c)
    sups = _SupportIndex(prog)
    for subset in itertools.combinations(range(c.arity), k):
        rest = [i for i in range(c.arity) if i not in subset]
        extensions: dict[tuple, list[tuple]] = {}
        for t in allowed:
            ext = tuple(t[i] for i in rest)
            bucket = extensions.setdefault(tuple(t[i] for i in subset), [])
            if not bucket or bucket[-1] != ext:
                bucket.append(ext)
        for assignment in itertools.product(*(doms[i] for i in subset)):
            body = [prog.p(_e(prog, c.scope[i], x)) for i, x in zip(subset, assignment)]
            for ext in extensions.get(assignment, ()):
                key = (tag, tuple(rest), ext)
                atom = sups.atom(key, [prog.p(_e(prog, c.scope[i], x)) for i, x in zip(rest, ext)])
                body.append(prog.n(atom))
            prog.add_integrity(body)
    return _since(prog, start)


def conflict_boxes(instance: CspInstance, c: Constraint, maximal: bool = True) -> list[tuple]:
    """Boxes ``((l1,u1), ..., (ln,un))`` of original values containing no allowed tuple.

    With ``maximal`` only boxes with no conflicting strict enclosure are kept.
    """
    doms = _domains(instance, c)
    shape = tuple(len(d) for d in doms)
    nboxes = 1
    for s in shape:
        nboxes *= s * (s + 1) // 2
    if nboxes > MAX_TABLE_BOX:
        raise ConfigError(f"{nboxes} candidate boxes exceed the enumeration guard")
    grid = np.zeros(shape, dtype=np.int64)
    for t in allowed_tuples(instance, c):
        grid[tuple(x - d.start for x, d in zip(t, doms))] = 1
    prefix = grid
    for axis in range(len(shape)):
        prefix = prefix.cumsum(axis=axis)
    prefix = np.pad(prefix, [(1, 0)] * len(shape))
    corners = list(itertools.product((0, 1), repeat=len(shape)))

    def count(box) -> int:
        total = 0
        for corner in corners:
            idx = tuple(u + 1 if hi else l for (l, u), hi in zip(box, corner))
            sign = -1 if (len(shape) - sum(corner)) % 2 else 1
            total += sign * prefix[idx]
        return int(total)

    intervals = [[(l, u) for l in range(s) for u in range(l, s)] for s in shape]
    boxes = [box for box in itertools.product(*intervals) if count(box) == 0]
    if maximal:
        def extends(box):
            for i, (l, u) in enumerate(box):
                if l > 0:
                    yield box[:i] + ((l - 1, u),) + box[i + 1:]
                if u < shape[i] - 1:
                    yield box[:i] + ((l, u + 1),) + box[i + 1:]

        boxes = [box for box in boxes if all(count(b) > 0 for b in extends(box))]
    return [tuple((l + d.start, u + d.start) for (l, u), d in zip(box, doms)) for box in boxes]


def encode_table_range(prog: Program, instance: CspInstance, c: Constraint,
                       maximal: bool = True) -> list[Rule]:
    """One integrity ``:- r(v1,l1,u1), ..., r(vn,ln,un)`` per (maximal) conflict box."""
    start = len(prog.rules)
    for v in c.scope:
        _require(prog, v, "r")
    for box in conflict_boxes(instance, c, maximal):
        prog.add_integrity(prog.p(_r(prog, v, l, u)) for v, (l, u) in zip(c.scope, box))
    return _since(prog, start)


def encode_table_bound(prog: Program, instance: CspInstance, c: Constraint,
                       maximal: bool = True) -> list[Rule]:
    """Maximal conflict boxes rendered as half-open bound regions ``l-1 < v <= u``."""
    start = len(prog.rules)
    for v in c.scope:
        _require(prog, v, "b")
    for box in conflict_boxes(instance, c, maximal):
        body = []
        for v, (l, u) in zip(c.scope, box):
            lay = prog.layout[v]
            body.append(prog.p(B(v, lay.shift(u))))
        for v, (l, u) in zip(c.scope, box):
            lay = prog.layout[v]
            if lay.shift(l) - 1 >= 1:
                body.append(prog.n(B(v, lay.shift(l) - 1)))
        prog.add_integrity(body)
    return _since(prog, start)


# -- all-different and permutation --------------------------------------------

def _frame(instance: CspInstance, c: Constraint) -> tuple[int, int]:
    vs = [instance.variables[v] for v in c.scope]
    return min(v.lo for v in vs), max(v.hi for v in vs)


def encode_alldiff_direct(prog: Program, instance: CspInstance, c: Constraint) -> list[Rule]:
    """Direct encoding of the binary decomposition: ``:- e(v,i), e(w,i)``."""
    start = len(prog.rules)
    for v in c.scope:
        _require(prog, v, "e")
    lo, hi = _frame(instance, c)
    for v, w in itertools.combinations(c.scope, 2):
        for x in range(lo, hi + 1):
            a, b = _e(prog, v, x), _e(prog, w, x)
            if a is not None and b is not None:
                prog.add_integrity((prog.p(a), prog.p(b)))
    return _since(prog, start)


def encode_alldiff_support(prog: Program, instance: CspInstance, c: Constraint) -> list[Rule]:
    """Per value ``i``: ``:- 2 {e(v1,i), ..., e(vn,i)}``."""
    start = len(prog.rules)
    for v in c.scope:
        _require(prog, v, "e")
    lo, hi = _frame(instance, c)
    for x in range(lo, hi + 1):
        atoms = [a for a in (_e(prog, v, x) for v in c.scope) if a is not None]
        prog.add_cardinality(2, (prog.p(a) for a in atoms))
    return _since(prog, start)


def encode_alldiff_range(prog: Program, instance: CspInstance, c: Constraint,
                         hall_cap: Optional[int] = None) -> list[Rule]:
    """No interval ``[l,u]`` holds more than ``u-l+1`` variables.

    With ``hall_cap`` only intervals of size at most the cap are posted.
    """
    start = len(prog.rules)
    for v in c.scope:
        lay = prog.layout.get(v)
        if lay is None or not {"r", "rb"} & lay.ladders:
            raise ConfigError(f"variable v{v} has no range atoms")
    lo, hi = _frame(instance, c)
    for l in range(lo, hi + 1):
        for u in range(l, hi + 1):
            if hall_cap is not None and u - l + 1 > hall_cap:
                break
            atoms = [a for a in (_r(prog, v, l, u) for v in c.scope) if a is not None]
            prog.add_cardinality(u - l + 2, (prog.p(a) for a in atoms))
    return _since(prog, start)


def encode_alldiff_bound(prog: Program, instance: CspInstance, c: Constraint,
                         hall_cap: Optional[int] = None) -> list[Rule]:
    """Range atoms linked to the bound ladder, then the interval cardinalities."""
    start = len(prog.rules)
    for v in c.scope:
        lay = _require(prog, v, "b")
        if "rb" not in lay.ladders and "r" not in lay.ladders:
            link_bound_range(prog, v, lay.d)
    encode_alldiff_range(prog, instance, c, hall_cap)
    return _since(prog, start)


def _alldiff_base(prog: Program, instance: CspInstance, c: Constraint, cfg: EncodingConfig,
                  tag: int) -> None:
    enc = cfg.constraint_encoding
    if enc is ConEncoding.DIRECT:
        encode_alldiff_direct(prog, instance, c)
    elif enc is ConEncoding.SUPPORT:
        encode_alldiff_support(prog, instance, c)
    elif enc is ConEncoding.KSUPPORT:
        encode_table_ksupport(prog, instance, c, min(cfg.k, c.arity - 1), tag)
    elif enc is ConEncoding.RANGE:
        encode_alldiff_range(prog, instance, c, cfg.hall_cap)
    else:
        encode_alldiff_bound(prog, instance, c, cfg.hall_cap)


def encode_permutation(prog: Program, instance: CspInstance, c: Constraint,
                       config: EncodingConfig, tag: int = 0) -> list[Rule]:
    """All-different plus the covering rules that every value is taken."""
    universe = sorted(instance.universe(c))
    if len(universe) != c.arity:
        raise ConfigError("not a permutation")
    start = len(prog.rules)
    _alldiff_base(prog, instance, c, config, tag)
    if config.constraint_encoding in (ConEncoding.RANGE, ConEncoding.BOUND):
        values = set(universe)
        lo, hi = universe[0], universe[-1]
        for l in range(lo, hi + 1):
            for u in range(l, hi + 1):
                inside = sum(1 for x in range(l, u + 1) if x in values)
                if not inside:
                    continue
                bound = c.arity - inside + 1
                lits = []
                for v in c.scope:
                    atom = _r(prog, v, l, u)
                    if atom is None:
                        bound -= 1  # "not false" always holds
                    else:
                        lits.append(prog.n(atom))
                prog.add_cardinality(bound, lits)
    else:
        for x in universe:
            atoms = [a for a in (_e(prog, v, x) for v in c.scope) if a is not None]
            prog.add_integrity(prog.n(a) for a in atoms)
    return _since(prog, start)


# -- whole instances ----------------------------------------------------------

def _encode_variable(prog: Program, v: int, lo: int, hi: int, venc: VarEncoding) -> None:
    d = hi - lo + 1
    prog.layout[v] = VarLayout(v, lo, hi)
    if venc is VarEncoding.DIRECT:
        encode_var_direct(prog, v, d)
    elif venc in (VarEncoding.BOUND, VarEncoding.BOUND_HYBRID):
        encode_var_bound(prog, v, d)
        if venc is VarEncoding.BOUND_HYBRID:
            link_bound_direct(prog, v, d)
    else:
        encode_var_range(prog, v, d)
        if venc is VarEncoding.RANGE_HYBRID:
            link_range_direct(prog, v, d)


def _encode_table(prog: Program, instance: CspInstance, c: Constraint, cfg: EncodingConfig,
                  tag: int) -> None:
    enc = cfg.table_encoding or cfg.constraint_encoding
    if enc is ConEncoding.DIRECT:
        encode_table_direct(prog, instance, c)
    elif enc is ConEncoding.SUPPORT:
        encode_table_support(prog, instance, c)
    elif enc is ConEncoding.KSUPPORT:
        encode_table_ksupport(prog, instance, c, min(cfg.k, c.arity - 1), tag)
    elif enc is ConEncoding.RANGE:
        encode_table_range(prog, instance, c)
    else:
        encode_table_bound(prog, instance, c)


def encode_instance(instance: CspInstance, config: EncodingConfig) -> EncodedInstance:
    """Encode every variable and constraint of ``instance`` under ``config``."""
    diags = validate(instance)
    if diags:
        raise ConfigError("invalid instance: " + "; ".join(diags))
    config.check()
    prog = Program()
    for var in instance.variables:
        _encode_variable(prog, var.id, var.lo, var.hi, VarEncoding(config.variable_encoding))
    out = EncodedInstance(prog, instance, config)
    for ci, c in enumerate(instance.constraints):
        start = len(prog.rules)
        if c.kind is Kind.TABLE:
            _encode_table(prog, instance, c, config, ci)
        elif c.kind is Kind.PERMUTATION and config.permutation_strengthening:
            encode_permutation(prog, instance, c, config, ci)
        else:
            _alldiff_base(prog, instance, c, config, ci)
        out.audit.append((start, len(prog.rules)))
    return out


def lowered_tight_program(encoded: EncodedInstance) -> Program:
    """Lower cardinalities and insist on tightness."""
    low = encoded.lowered()
    if not is_tight(low):
        raise ConfigError("encoded program is not tight")
    return low


def all_configs(include_ksupport: bool = True) -> list[EncodingConfig]:
    """One representative per variable/constraint encoding pairing, with and without
    Hall caps and permutation strengthening."""
    out = []
    pairs = [
        (VarEncoding.DIRECT, ConEncoding.DIRECT),
        (VarEncoding.DIRECT, ConEncoding.SUPPORT),
        (VarEncoding.RANGE, ConEncoding.RANGE),
        (VarEncoding.RANGE_HYBRID, ConEncoding.RANGE),
        (VarEncoding.BOUND, ConEncoding.BOUND),
        (VarEncoding.BOUND_HYBRID, ConEncoding.BOUND),
        (VarEncoding.BOUND_HYBRID, ConEncoding.SUPPORT),
        (VarEncoding.RANGE_HYBRID, ConEncoding.DIRECT),
    ]
    if include_ksupport:
        pairs.append((VarEncoding.DIRECT, ConEncoding.KSUPPORT))
    for venc, cenc in pairs:
        for strengthen in (False, True):
            out.append(EncodingConfig(venc, cenc, permutation_strengthening=strengthen))
        if cenc in (ConEncoding.RANGE, ConEncoding.BOUND) and venc in (VarEncoding.RANGE, VarEncoding.BOUND):
            out.append(EncodingConfig(venc, cenc, hall_cap=1, permutation_strengthening=True))
    return out


def var_encoding_of(layout: VarLayout) -> str:
    """Which ladder extraction should read: ``e`` first, then ``b``, then ``r``."""
    for ladder in ("e", "b", "r"):
        if ladder in layout.ladders:
            return ladder
    raise ConfigError(f"variable v{layout.var} has no ladder")


def iter_layouts(encoded: EncodedInstance) -> Iterable[VarLayout]:
    return (encoded.var_map[v.id] for v in encoded.instance.variables)
