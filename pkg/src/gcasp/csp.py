"""Finite-domain CSP instances: domains, constraints, validation and JSON I/O."""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional


class InstanceFormatError(ValueError):
    """Raised when an instance document cannot be parsed."""


class Kind(str, enum.Enum):
    ALL_DIFFERENT = "alldifferent"
    PERMUTATION = "permutation"
    TABLE = "table"


class Polarity(str, enum.Enum):
    ALLOWED = "allowed"
    FORBIDDEN = "forbidden"


@dataclass(frozen=True)
class Domain:
    """Integer domain ``[lo, hi]`` minus the values in ``removed``."""

    lo: int
    hi: int
    removed: frozenset = frozenset()

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        if any(not self.lo < i < self.hi for i in self.removed):
            raise ValueError("removed values must lie strictly inside (lo, hi)")
        if not isinstance(self.removed, frozenset):
            object.__setattr__(self, "removed", frozenset(self.removed))

    @classmethod
    def from_values(cls, values: Iterable[int]) -> Optional["Domain"]:
        """Smallest domain holding exactly ``values``; None when empty."""
        vals = set(values)
        if not vals:
            return None
        lo, hi = min(vals), max(vals)
        return cls(lo, hi, frozenset(i for i in range(lo, hi + 1) if i not in vals))

    def member(self, i: int) -> bool:
        return self.lo <= i <= self.hi and i not in self.removed

    def __contains__(self, i: int) -> bool:
        return self.member(i)

    @property
    def min(self) -> int:
        return self.lo

    @property
    def max(self) -> int:
        return self.hi

    def values(self) -> list[int]:
        return [i for i in range(self.lo, self.hi + 1) if i not in self.removed]

    def __len__(self) -> int:
        return self.hi - self.lo + 1 - len(self.removed)

    def __iter__(self):
        return iter(self.values())

    def is_interval(self) -> bool:
        return not self.removed

    def __str__(self) -> str:
        if not self.removed:
            return f"[{self.lo},{self.hi}]"
        return "{" + ",".join(map(str, self.values())) + "}"


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    lo: int
    hi: int

    @property
    def domain(self) -> Domain:
        return Domain(self.lo, self.hi)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class Constraint:
    kind: Kind
    scope: tuple
    tuples: Optional[frozenset] = None
    polarity: Optional[Polarity] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "scope", tuple(self.scope))
        if self.kind is Kind.TABLE:
            object.__setattr__(self, "tuples", frozenset(tuple(t) for t in (self.tuples or ())))
            object.__setattr__(self, "polarity", Polarity(self.polarity or Polarity.ALLOWED))

    @property
    def arity(self) -> int:
        return len(self.scope)

    def accepts(self, values: tuple, universe: Optional[set] = None) -> bool:
        """Check a full tuple of values (in scope order) against the constraint."""
        if self.kind is Kind.TABLE:
            listed = tuple(values) in self.tuples
            return listed if self.polarity is Polarity.ALLOWED else not listed
        if len(set(values)) != len(values):
            return False
        if self.kind is Kind.PERMUTATION and universe is not None:
            return set(values) == universe
        return True


def alldifferent(*scope: int) -> Constraint:
    return Constraint(Kind.ALL_DIFFERENT, scope)


def permutation(*scope: int) -> Constraint:
    return Constraint(Kind.PERMUTATION, scope)


def table(scope: Iterable[int], tuples: Iterable[tuple], polarity=Polarity.ALLOWED) -> Constraint:
    return Constraint(Kind.TABLE, tuple(scope), frozenset(map(tuple, tuples)), Polarity(polarity))


@dataclass(frozen=True)
class CspInstance:
    variables: tuple
    constraints: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @classmethod
    def build(cls, domains: Iterable[tuple[int, int]], constraints: Iterable[Constraint] = (),
              names: Optional[Iterable[str]] = None) -> "CspInstance":
        domains = list(domains)
        names = list(names) if names is not None else [f"v{i}" for i in range(len(domains))]
        variables = [Variable(i, n, lo, hi) for i, (n, (lo, hi)) in enumerate(zip(names, domains))]
        return cls(tuple(variables), tuple(constraints))

    def var(self, vid: int) -> Variable:
        return self.variables[vid]

    def universe(self, c: Constraint) -> set[int]:
        """Union of the initial domains over the scope of ``c``."""
        vals: set[int] = set()
        for v in c.scope:
            var = self.variables[v]
            vals.update(range(var.lo, var.hi + 1))
        return vals

    def domains(self) -> dict[int, Domain]:
        return {v.id: v.domain for v in self.variables}


def validate(instance: CspInstance) -> list[str]:
    """Return a list of diagnostics; empty iff the instance is well formed."""
    diags = []
    ids = [v.id for v in instance.variables]
    if ids != list(range(len(ids))):
        diags.append(f"variable ids not dense from 0: {ids}")
    known = set(ids)
    for v in instance.variables:
        if v.lo > v.hi:
            diags.append(f"variable {v.name}: empty domain [{v.lo},{v.hi}]")
    for ci, c in enumerate(instance.constraints):
        tag = f"constraint {ci} ({c.kind.value})"
        if len(c.scope) < 2:
            diags.append(f"{tag}: scope has fewer than 2 variables")
        if len(set(c.scope)) != len(c.scope):
            diags.append(f"{tag}: repeated variable in scope")
        missing = [v for v in c.scope if v not in known]
        if missing:
            diags.append(f"{tag}: undeclared variables {missing}")
            continue
        if c.kind is Kind.PERMUTATION:
            count = len(instance.universe(c))
            if count != len(c.scope):
                diags.append(f"{tag}: permutation arity {len(c.scope)} ≠ value count {count}")
        elif c.kind is Kind.TABLE:
            doms = [instance.variables[v] for v in c.scope]
            for t in sorted(c.tuples):
                if len(t) != len(c.scope):
                    diags.append(f"{tag}: arity mismatch, tuple {t} under scope of size {len(c.scope)}")
                    break
                if any(not var.lo <= x <= var.hi for var, x in zip(doms, t)):
                    diags.append(f"{tag}: tuple {t} outside the scope's domains")
                    break
    return diags


def satisfies(instance: CspInstance, assignment: Mapping[int, int]) -> bool:
    """True iff the total ``assignment`` satisfies every constraint."""
    if any(v.id not in assignment for v in instance.variables):
        raise ValueError("assignment not total")
    for c in instance.constraints:
        values = tuple(assignment[v] for v in c.scope)
        universe = instance.universe(c) if c.kind is Kind.PERMUTATION else None
        if not c.accepts(values, universe):
            return False
    return True


def binary_decomposition(c: Constraint) -> list[tuple[int, int]]:
    """Pairs (i < j) of the ``v_i != v_j`` decomposition of an all-different."""
    return list(itertools.combinations(c.scope, 2))


# -- JSON ------------------------------------------------------------------

def _to_doc(instance: CspInstance) -> dict:
    cons = []
    for c in instance.constraints:
        entry = {"kind": c.kind.value, "scope": list(c.scope)}
        if c.kind is Kind.TABLE:
            entry["polarity"] = c.polarity.value
            entry["tuples"] = [list(t) for t in sorted(c.tuples)]
        cons.append(entry)
    return {
        "variables": [{"id": v.id, "name": v.name, "lo": v.lo, "hi": v.hi}
                      for v in sorted(instance.variables, key=lambda v: v.id)],
        "constraints": cons,
    }


def serialize_instance(instance: CspInstance) -> bytes:
    """Canonical UTF-8 JSON: sorted keys, variables by id, tuples sorted."""
    text = json.dumps(_to_doc(instance), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def _require(obj: dict, key: str, typ, where: str):
    if key not in obj:
        raise InstanceFormatError(f"{where}: missing field {key!r}")
    val = obj[key]
    if not isinstance(val, typ) or isinstance(val, bool):
        raise InstanceFormatError(f"{where}: field {key!r} has wrong type")
    return val


def parse_instance(data: bytes | str) -> CspInstance:
    """Parse a JSON instance document and check it against the schema."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise InstanceFormatError("document root must be an object")
    variables = []
    for k, v in enumerate(_require(doc, "variables", list, "document")):
        where = f"variables[{k}]"
        if not isinstance(v, dict):
            raise InstanceFormatError(f"{where}: expected object")
        variables.append(Variable(_require(v, "id", int, where), _require(v, "name", str, where),
                                  _require(v, "lo", int, where), _require(v, "hi", int, where)))
    constraints = []
    for k, c in enumerate(_require(doc, "constraints", list, "document")):
        where = f"constraints[{k}]"
        if not isinstance(c, dict):
            raise InstanceFormatError(f"{where}: expected object")
        kind = _require(c, "kind", str, where)
        try:
            kind = Kind(kind)
        except ValueError:
            raise InstanceFormatError(f"{where}: unknown kind {kind!r}") from None
        scope = _require(c, "scope", list, where)
        if not all(isinstance(x, int) for x in scope):
            raise InstanceFormatError(f"{where}: field 'scope' must hold integers")
        if kind is Kind.TABLE:
            pol = c.get("polarity", "allowed")
            if pol not in ("allowed", "forbidden"):
                raise InstanceFormatError(f"{where}: field 'polarity' must be 'allowed' or 'forbidden'")
            tuples = _require(c, "tuples", list, where)
            if not all(isinstance(t, list) and all(isinstance(x, int) for x in t) for t in tuples):
                raise InstanceFormatError(f"{where}: field 'tuples' must hold integer lists")
            constraints.append(table(scope, tuples, pol))
        else:
            constraints.append(Constraint(kind, tuple(scope)))
    variables.sort(key=lambda v: v.id)
    return CspInstance(tuple(variables), tuple(constraints))
