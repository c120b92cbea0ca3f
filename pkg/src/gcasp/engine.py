"""Unit propagation and conflict-driven nogood learning over a ``NogoodDb``.

Signed literals follow ``nogoods``: ``2*p`` is ``T p`` and ``2*p + 1`` is
``F p``.  ``value[lit]`` is 1 when ``lit`` is in the assignment, -1 when its
complement is, 0 otherwise.  A nogood is violated once all its literals have
value 1; each nogood of size >= 2 watches its first two positions.
"""

from __future__ import annotations

import heapq
import json
import random
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .csp import Domain
from .encoders import EncodedInstance, var_encoding_of
from .nogoods import NogoodDb
from .program import B, E, R

DECISION = -1


class InternalConsistencyError(RuntimeError):
    """A model does not decode to a CSP value; points at an encoder bug."""


def luby(i: int) -> int:
    """The ``i``-th element (from 0) of 1, 1, 2, 1, 1, 2, 4, ..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i %= size
    return 1 << seq


@dataclass
class PropagationOutcome:
    conflict: Optional[int]  # violated nogood id, DECISION for clashing assumptions
    values: list  # per proposition: 1 true, -1 false, 0 unassigned

    @property
    def is_conflict(self) -> bool:
        return self.conflict is not None

    @property
    def status(self) -> str:
        return "CONFLICT" if self.conflict is not None else "FIXPOINT"


@dataclass
class SolveResult:
    status: str  # SAT | UNSAT | LIMIT
    model: Optional[list] = None
    stats: dict = field(default_factory=dict)

    def stats_json(self) -> str:
        return json.dumps({"status": self.status, **self.stats}, sort_keys=True)


class Engine:
    """One search state over a private copy of the nogoods and watch lists.

    Branching picks the most active unassigned proposition (lowest id on ties,
    tiny seeded jitter when ``seed`` is nonzero) with saved phases, starting
    from ``initial_phase``.  Learned nogoods are minimised unless
    ``minimize`` is off; every ``reduce_base`` conflicts (growing) the worse
    half by LBD is dropped, and ``reduce_base=None`` keeps them all.
    """

    def __init__(self, db: NogoodDb, seed: int = 0, decay: float = 0.95,
                 restarts: bool = True, restart_base: int = 64, check_asserting: bool = False,
                 reduce_base: Optional[int] = 2000, initial_phase: bool = True, minimize: bool = True):
        n = db.num_props
        self.db = db
        self.num_props = n
        self.nogoods: list[list[int]] = [list(ng) for ng in db.nogoods]
        self.num_original = len(self.nogoods)
        self.value = [0] * (2 * n)
        self.level = [0] * n
        self.reason = [DECISION] * n
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[int]] = [[] for _ in range(2 * n)]
        self.root_conflict: Optional[int] = None

        self.seed = seed
        self.decay = decay
        self.restarts = restarts
        self.restart_base = restart_base
        self.check_asserting = check_asserting
        self.minimize = minimize
        rng = random.Random(seed)
        self.activity = [rng.random() * 1e-3 if seed else 0.0 for _ in range(n)]
        self.var_inc = 1.0
        self.phase = [2 * p + (not initial_phase) for p in range(n)]
        self.heap = [(-self.activity[p], p) for p in range(n)]
        heapq.heapify(self.heap)
        self.seen = bytearray(n)

        self.decisions = self.conflicts = self.propagations = self.learned = self.restarts_done = 0
        self.deleted = self.reductions = 0
        self.lbd: dict[int, int] = {}
        self.reduce_base = reduce_base
        self.next_reduce = reduce_base

        units = []
        for cid, ng in enumerate(self.nogoods):
            if not ng:
                self.root_conflict = cid
            elif len(ng) == 1:
                units.append(cid)
            else:
                self.watches[ng[0]].append(cid)
                self.watches[ng[1]].append(cid)
        for cid in units:
            lit = self.nogoods[cid][0]
            if self.value[lit] == 1:
                self.root_conflict = cid
            elif self.value[lit] == 0:
                self._assign(lit ^ 1, cid)

    # -- assignment ------------------------------------------------------------

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    def _assign(self, lit: int, reason: int) -> None:
        self.value[lit] = 1
        self.value[lit ^ 1] = -1
        p = lit >> 1
        self.level[p] = len(self.trail_lim)
        self.reason[p] = reason
        self.trail.append(lit)

    def values(self) -> list:
        return self.value[0::2]

    def propagate(self) -> Optional[int]:
        """Run unit propagation to fixpoint; return a violated nogood id or None."""
        if self.root_conflict is not None:
            return self.root_conflict
        value, nogoods, watches = self.value, self.nogoods, self.watches
        trail, level, reason = self.trail, self.level, self.reason
        dl = len(self.trail_lim)
        props = 0
        while self.qhead < len(trail):
            lit = trail[self.qhead]
            self.qhead += 1
            ws = watches[lit]
            i = j = 0
            n = len(ws)
            while i < n:
                cid = ws[i]
                i += 1
                ng = nogoods[cid]
                if ng[0] == lit:
                    ng[0] = ng[1]
                    ng[1] = lit
                other = ng[0]
                vo = value[other]
                if vo == -1:
                    ws[j] = cid
                    j += 1
                    continue
                for k in range(2, len(ng)):
                    cand = ng[k]
                    if value[cand] != 1:
                        ng[1] = cand
                        ng[k] = lit
                        watches[cand].append(cid)
                        break
                else:
                    ws[j] = cid
                    j += 1
                    if vo == 1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.propagations += props
                        return cid
                    comp = other ^ 1
                    value[comp] = 1
                    value[other] = -1
                    p = other >> 1
                    level[p] = dl
                    reason[p] = cid
                    trail.append(comp)
                    props += 1
            del ws[j:]
        self.propagations += props
        return None

    def cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        value, phase, reason, act, heap = self.value, self.phase, self.reason, self.activity, self.heap
        for lit in self.trail[start:]:
            value[lit] = 0
            value[lit ^ 1] = 0
            p = lit >> 1
            reason[p] = DECISION
            phase[p] = lit
            heapq.heappush(heap, (-act[p], p))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = start

    # -- assumptions -------------------------------------------------------------

    def _enqueue_all(self, lits: Iterable[int]) -> Optional[int]:
        for lit in lits:
            v = self.value[lit]
            if v == -1:
                return DECISION
            if v == 0:
                self._assign(lit, DECISION)
        return None

    def assume(self, assumptions: Iterable[int]) -> PropagationOutcome:
        """Enqueue ``assumptions`` at level 0 and propagate."""
        if self.decision_level:
            self.cancel_until(0)
        conflict = self.propagate()
        if conflict is None:
            conflict = self._enqueue_all(assumptions)
            if conflict is None:
                conflict = self.propagate()
        if conflict is not None and self.root_conflict is None:
            self.root_conflict = conflict
        return PropagationOutcome(conflict, self.values())

    def probe(self, assumptions: Iterable[int]) -> PropagationOutcome:
        """Propagate ``assumptions`` on a fresh level, then undo it."""
        conflict = self.propagate()
        if conflict is not None:
            return PropagationOutcome(conflict, self.values())
        self.trail_lim.append(len(self.trail))
        conflict = self._enqueue_all(assumptions)
        if conflict is None:
            conflict = self.propagate()
        out = PropagationOutcome(conflict, self.values())
        self.cancel_until(self.decision_level - 1)
        return out

    # -- learning ----------------------------------------------------------------

    def _bump(self, p: int) -> None:
        act = self.activity
        act[p] += self.var_inc
        if act[p] > 1e100:
            for q in range(self.num_props):
                act[q] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[q], q) for q in range(self.num_props) if not self.value[2 * q]]
            heapq.heapify(self.heap)
        elif not self.value[2 * p]:
            heapq.heappush(self.heap, (-act[p], p))

    def analyze(self, conflict: int) -> tuple[list[int], int]:
        """First-UIP learning.  Returns (nogood, backjump level).

        The nogood's first literal is the UIP; its second (if any) has the
        backjump level, so after backjumping both can be watched directly.
        """
        dl = self.decision_level
        if dl == 0:
            raise ValueError("conflict at level 0: UNSAT")
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        learnt = [0]
        touched = []
        counter = 0
        pivot = -1
        ng = self.nogoods[conflict]
        idx = len(trail) - 1
        while True:
            for q in ng:
                if q == pivot:
                    continue
                p = q >> 1
                if not seen[p] and level[p] > 0:
                    seen[p] = 1
                    touched.append(p)
                    self._bump(p)
                    if level[p] >= dl:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            sigma = trail[idx]
            idx -= 1
            p = sigma >> 1
            seen[p] = 0
            counter -= 1
            if counter == 0:
                break
            ng = self.nogoods[reason[p]]
            pivot = sigma ^ 1
        learnt[0] = sigma
        if self.minimize:
            learnt = [learnt[0]] + [q for q in learnt[1:] if not self._redundant(q, touched)]
        for p in touched:
            seen[p] = 0
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _redundant(self, q: int, touched: list[int]) -> bool:
        """Is ``q`` implied by the other learnt literals through reason nogoods?

        Marks proven-redundant propositions with 2 and failures with 3 in
        ``seen`` so the search never revisits them.
        """
        seen, reason, level, nogoods = self.seen, self.reason, self.level, self.nogoods
        if reason[q >> 1] == DECISION:
            return False
        stack = [q]
        pending = []
        while stack:
            lit = stack.pop()
            for r in nogoods[reason[lit >> 1]]:
                p = r >> 1
                if r == lit ^ 1 or level[p] == 0 or seen[p] in (1, 2):
                    continue
                if reason[p] == DECISION or seen[p] == 3:
                    for x in pending:
                        seen[x] = 3
                        touched.append(x)
                    return False
                seen[p] = 2
                touched.append(p)
                pending.append(p)
                stack.append(r)
        return True

    def _add_learned(self, learnt: list[int]) -> None:
        cid = len(self.nogoods)
        self.nogoods.append(learnt)
        self.learned += 1
        if len(learnt) >= 2:
            self.watches[learnt[0]].append(cid)
            self.watches[learnt[1]].append(cid)
        if self.check_asserting:
            assert self.value[learnt[0]] == 0, "UIP literal must be free after backjump"
            assert all(self.value[l] == 1 for l in learnt[1:]), "learned nogood not asserting"
        self._assign(learnt[0] ^ 1, cid)

    def reduce_learned(self) -> None:
        """Drop the worse half of the learned nogoods by LBD, keeping reasons and glue ones."""
        self.reductions += 1
        self.next_reduce = self.conflicts + self.reduce_base + 300 * self.reductions
        nogoods, value, reason = self.nogoods, self.value, self.reason
        cands = []
        for cid, lbd in self.lbd.items():
            ng = nogoods[cid]
            if lbd <= 2 or len(ng) <= 2:
                continue
            if any(value[l] == -1 and reason[l >> 1] == cid for l in ng[:2]):
                continue
            cands.append((lbd, len(ng), cid))
        cands.sort(reverse=True)
        drop = {cid for _, _, cid in cands[:len(cands) // 2]}
        if not drop:
            return
        for cid in drop:
            nogoods[cid] = None
            del self.lbd[cid]
        for ws in self.watches:
            if ws:
                ws[:] = [c for c in ws if c not in drop]
        self.deleted += len(drop)

    def add_nogood(self, lits: Iterable[int]) -> None:
        """Add a nogood at level 0 (e.g. to block a model)."""
        self.cancel_until(0)
        keep = []
        for lit in dict.fromkeys(lits):
            v = self.value[lit]
            if v == -1:
                return
            if v == 0:
                keep.append(lit)
        cid = len(self.nogoods)
        self.nogoods.append(keep)
        if not keep:
            self.root_conflict = cid
        elif len(keep) == 1:
            self._assign(keep[0] ^ 1, cid)
        else:
            self.watches[keep[0]].append(cid)
            self.watches[keep[1]].append(cid)

    # -- search --------------------------------------------------------------------

    def _pick(self) -> Optional[int]:
        heap, act, value = self.heap, self.activity, self.value
        if len(heap) > 4 * self.num_props + 1024:
            self.heap = heap = [(-act[p], p) for p in range(self.num_props) if not value[2 * p]]
            heapq.heapify(heap)
        while heap:
            a, p = heapq.heappop(heap)
            if value[2 * p] or -a != act[p]:
                continue
            return p
        return None

    def solve(self, max_conflicts: Optional[int] = None, max_time_ms: Optional[float] = None,
              max_decisions: Optional[int] = None) -> SolveResult:
        t0 = time.perf_counter()
        deadline = t0 + max_time_ms / 1000.0 if max_time_ms is not None else None
        restart_idx = 0
        budget = self.restart_base * luby(restart_idx)
        since_restart = 0
        status = None
        while status is None:
            conflict = self.propagate()
            if conflict is not None:
                self.conflicts += 1
                if self.decision_level == 0:
                    self.root_conflict = conflict
                    status = "UNSAT"
                    break
                learnt, back = self.analyze(conflict)
                lbd = len({self.level[l >> 1] for l in learnt})
                self.cancel_until(back)
                self._add_learned(learnt)
                self.lbd[len(self.nogoods) - 1] = lbd
                if self.reduce_base is not None and self.conflicts >= self.next_reduce:
                    self.reduce_learned()
                self.var_inc /= self.decay
                since_restart += 1
                if max_conflicts is not None and self.conflicts >= max_conflicts:
                    status = "LIMIT"
                elif self.restarts and since_restart >= budget:
                    self.cancel_until(0)
                    self.restarts_done += 1
                    restart_idx += 1
                    budget = self.restart_base * luby(restart_idx)
                    since_restart = 0
                continue
            if deadline is not None and time.perf_counter() > deadline:
                status = "LIMIT"
                break
            if max_decisions is not None and self.decisions >= max_decisions:
                status = "LIMIT"
                break
            p = self._pick()
            if p is None:
                status = "SAT"
                break
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._assign(self.phase[p], DECISION)
        model = self.values() if status == "SAT" else None
        if status == "SAT":
            self.cancel_until(0)
        return SolveResult(status, model, self.stats(time.perf_counter() - t0))

    def stats(self, elapsed: float = 0.0) -> dict:
        return {
            "decisions": self.decisions,
            "conflicts": self.conflicts,
            "propagations": self.propagations,
            "learned": self.learned,
            "deleted": self.deleted,
            "restarts": self.restarts_done,
            "time_ms": round(elapsed * 1000.0, 3),
            "seed": self.seed,
        }


# -- module-level operations ---------------------------------------------------

def propagate(engine: Engine) -> PropagationOutcome:
    return PropagationOutcome(engine.propagate(), engine.values())


def assume_and_propagate(db: NogoodDb, assumptions: Iterable[int]) -> PropagationOutcome:
    return Engine(db).assume(assumptions)


def solve(db: NogoodDb, seed: int = 0, restarts: bool = True, **limits) -> SolveResult:
    return Engine(db, seed=seed, restarts=restarts).solve(**limits)


def learn_from_conflict(engine: Engine, conflict: int) -> tuple[list[int], int]:
    return engine.analyze(conflict)


def violates(model: list, nogoods: Iterable[Iterable[int]]) -> bool:
    """True iff some nogood is contained in the total ``model``."""
    for ng in nogoods:
        if all((model[l >> 1] == 1) != bool(l & 1) for l in ng):
            return True
    return False


def enumerate_models(db: NogoodDb, project: Iterable[int], limit: int = 10_000, seed: int = 0) -> list:
    """All models, blocking each on the atoms in ``project`` before looking again."""
    project = list(project)
    engine = Engine(db, seed=seed, restarts=False)
    models = []
    while len(models) < limit:
        res = engine.solve()
        if res.status != "SAT":
            break
        models.append(res.model)
        engine.add_nogood([2 * a if res.model[a] == 1 else 2 * a + 1 for a in project])
    return models


# -- decoding -----------------------------------------------------------------

def _val(values: list, encoded: EncodedInstance, sym: tuple) -> int:
    aid = encoded.program.lookup(sym)
    if aid is None:
        raise InternalConsistencyError(f"atom {sym} missing")
    return values[aid]


def extract_csp_solution(model: list, encoded: EncodedInstance) -> dict[int, int]:
    """Decode a total model into a CSP assignment (original values)."""
    out = {}
    for var in encoded.instance.variables:
        lay = encoded.var_map[var.id]
        v, d = var.id, lay.d
        ladder = var_encoding_of(lay)
        if ladder == "e":
            hits = [i for i in range(1, d + 1) if _val(model, encoded, E(v, i)) == 1]
        elif ladder == "b":
            hits = [i for i in range(1, d + 1) if _val(model, encoded, B(v, i)) == 1
                    and (i == 1 or _val(model, encoded, B(v, i - 1)) == -1)]
        else:
            hits = [i for i in range(1, d + 1) if _val(model, encoded, R(v, i, i)) == 1]
        if len(hits) != 1:
            raise InternalConsistencyError(f"variable v{v}: {len(hits)} witnesses on the {ladder}-ladder")
        out[v] = lay.unshift(hits[0])
    return out


def extract_domains(values: list, encoded: EncodedInstance, v: int,
                    ladder: Optional[str] = None) -> Optional[Domain]:
    """Domain of ``v`` left by a propagation fixpoint; None when empty."""
    lay = encoded.var_map[v]
    ladder = ladder or var_encoding_of(lay)
    if ladder not in lay.ladders:
        raise InternalConsistencyError(f"variable v{v} has no {ladder}-ladder")
    d = lay.d
    if ladder == "e":
        kept = [i for i in range(1, d + 1) if _val(values, encoded, E(v, i)) != -1]
    elif ladder == "r":
        kept = [i for i in range(1, d + 1) if _val(values, encoded, R(v, i, i)) != -1]
    else:
        falses = [i for i in range(1, d + 1) if _val(values, encoded, B(v, i)) == -1]
        trues = [i for i in range(1, d + 1) if _val(values, encoded, B(v, i)) == 1]
        lo = 1 + max(falses, default=0)
        hi = min(trues, default=d)
        kept = list(range(lo, hi + 1))
    return Domain.from_values(lay.unshift(i) for i in kept)
