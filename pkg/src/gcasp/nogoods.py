"""Completion nogoods of tight ground programs.

Propositions are numbered atoms first (same ids as the program), then one
proposition per distinct rule body.  A signed literal is ``2*p`` for ``T p``
and ``2*p + 1`` for ``F p``; its complement is ``lit ^ 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .program import CardIntegrity, Choice, Integrity, Normal, Program, is_tight, render_atom

MAX_BRUTE_PROPS = 18


class NotTightError(ValueError):
    pass


def T(p: int) -> int:
    return p << 1


def F(p: int) -> int:
    return (p << 1) | 1


def complement(lit: int) -> int:
    return lit ^ 1


def render_signed(lit: int, num_atoms: int, program: Optional[Program] = None) -> str:
    sign = "F" if lit & 1 else "T"
    p = lit >> 1
    if p < num_atoms:
        name = render_atom(program.atoms[p]) if program is not None else f"a({p})"
    else:
        name = f"body({p - num_atoms})"
    return f"{sign} {name}"


@dataclass
class NogoodDb:
    """Compiled nogoods.  Watch lists are built by each engine on its own copy."""

    nogoods: list = field(default_factory=list)
    num_atoms: int = 0
    bodies: list = field(default_factory=list)  # body literal tuples; prop = num_atoms + index
    program: Optional[Program] = None

    @property
    def num_props(self) -> int:
        return self.num_atoms + len(self.bodies)

    def __len__(self) -> int:
        return len(self.nogoods)

    def add(self, lits: Iterable[int]) -> bool:
        """Append a nogood; returns False when it is vacuous (complementary pair)."""
        ng = tuple(dict.fromkeys(lits))
        seen = set(ng)
        if any(l ^ 1 in seen for l in ng):
            return False
        self.nogoods.append(ng)
        return True

    def body_prop(self, index: int) -> int:
        return self.num_atoms + index

    def occurrences(self) -> dict[int, list[int]]:
        """Proposition -> ids of nogoods mentioning it."""
        occ: dict[int, list[int]] = {}
        for i, ng in enumerate(self.nogoods):
            for lit in ng:
                occ.setdefault(lit >> 1, []).append(i)
        return occ

    def dump(self) -> str:
        lines = []
        for ng in self.nogoods:
            lines.append("{" + ", ".join(render_signed(l, self.num_atoms) for l in ng) + "}")
        return "\n".join(lines) + ("\n" if lines else "")


def body_nogoods(body: tuple, bprop: int) -> list[tuple]:
    """Nogoods forcing ``bprop`` true exactly when every literal of ``body`` holds."""
    out = [tuple(body) + (F(bprop),)]
    out.extend((lit ^ 1, T(bprop)) for lit in body)
    return out


def atom_nogoods(atom: int, bprops: list[int]) -> list[tuple]:
    """Nogoods tying ``atom`` to the disjunction of its rule bodies."""
    out = [tuple(F(b) for b in bprops) + (T(atom),)]
    out.extend((T(b), F(atom)) for b in bprops)
    return out


def compile_program(program: Program, inline_integrity: bool = True) -> NogoodDb:
    """Build the completion nogoods of a tight program without cardinality rules.

    Integrity rules whose body is not shared with another rule compile to one
    nogood over the body literals when ``inline_integrity`` is set; otherwise
    they get a body proposition ``b`` and the unit nogood ``{T b}``.
    """
    if any(isinstance(r, CardIntegrity) for r in program.rules):
        raise ValueError("lower cardinality constraints before compiling")
    if not is_tight(program):
        raise NotTightError("loop nogoods unsupported")

    db = NogoodDb(num_atoms=len(program.atoms), program=program)
    body_index: dict[tuple, int] = {}

    def intern_body(lits: tuple) -> int:
        key = tuple(sorted(set(lits)))
        idx = body_index.get(key)
        if idx is None:
            idx = body_index[key] = len(db.bodies)
            db.bodies.append(key)
        return idx

    normal_bodies: dict[int, list[int]] = {}
    choice_bodies: dict[int, list[int]] = {}
    integrities = []
    for r in program.rules:
        if isinstance(r, Normal):
            normal_bodies.setdefault(r.head, []).append(intern_body(r.body))
        elif isinstance(r, Choice):
            b = intern_body(r.body)
            for h in r.heads:
                choice_bodies.setdefault(h, []).append(b)
        else:
            integrities.append(r.body)

    integrity_props = []
    for body in integrities:
        key = tuple(sorted(set(body)))
        if inline_integrity and key not in body_index:
            db.add(key)
        else:
            integrity_props.append(intern_body(key))

    for i, body in enumerate(db.bodies):
        for ng in body_nogoods(body, db.num_atoms + i):
            db.add(ng)

    for atom in range(db.num_atoms):
        nb = sorted(set(db.num_atoms + b for b in normal_bodies.get(atom, ())))
        if atom in choice_bodies:
            cb = sorted(set(db.num_atoms + b for b in choice_bodies[atom]))
            for b in nb:
                db.add((T(b), F(atom)))
            db.add(tuple(F(b) for b in sorted(set(nb) | set(cb))) + (T(atom),))
        else:
            for ng in atom_nogoods(atom, nb):
                db.add(ng)

    for b in integrity_props:
        db.add((T(db.num_atoms + b),))
    return db


def solutions(db: NogoodDb) -> list[int]:
    """All total assignments (as bitmasks of true propositions) violating no nogood."""
    n = db.num_props
    if n > MAX_BRUTE_PROPS:
        raise ValueError(f"{n} propositions exceed the brute-force guard of {MAX_BRUTE_PROPS}")
    masks = np.arange(1 << n, dtype=np.int64)
    bad = np.zeros(1 << n, dtype=bool)
    for ng in db.nogoods:
        t = sum(1 << (l >> 1) for l in ng if not l & 1)
        f = sum(1 << (l >> 1) for l in ng if l & 1)
        bad |= ((masks & t) == t) & ((masks & f) == 0)
    return [int(m) for m in masks[~bad]]


def projected_solutions(db: NogoodDb) -> set[frozenset]:
    """Solutions projected to true atoms, as sets of atom symbols."""
    prog = db.program
    out = set()
    for m in solutions(db):
        out.add(frozenset(prog.atoms[a] for a in range(db.num_atoms) if m >> a & 1))
    return out


def solutions_equal_answer_sets(program: Program, inline_integrity: bool = True) -> bool:
    """Cross-check: brute-force nogood solutions vs. reduct-based answer sets."""
    from .oracles import brute_force_answer_sets

    db = compile_program(program, inline_integrity)
    expected = {frozenset(program.atoms[a] for a in s) for s in brute_force_answer_sets(program)}
    return projected_solutions(db) == expected
