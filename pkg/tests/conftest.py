import random
from collections import Counter

from gcasp.encoders import encode_instance, lowered_tight_program
from gcasp.engine import enumerate_models, extract_csp_solution
from gcasp.nogoods import compile_program
from gcasp.program import AUX, Program


def engine_solutions(instance, config) -> Counter:
    """Multiset of CSP assignments over all engine models, blocking on every atom."""
    enc = encode_instance(instance, config)
    db = compile_program(lowered_tight_program(enc))
    models = enumerate_models(db, range(db.num_atoms), limit=100_000)
    return Counter(tuple(sorted(extract_csp_solution(m, enc).items())) for m in models)


def oracle_solutions(instance) -> Counter:
    from gcasp.oracles import enumerate_solutions

    return Counter(tuple(sorted(s.items())) for s in enumerate_solutions(instance))


def random_tight_program(rng: random.Random, max_atoms: int = 5) -> Program:
    """Positive body literals only point to lower-numbered atoms, so the program is tight."""
    p = Program()
    n = rng.randint(1, max_atoms)
    for i in range(n):
        p.intern(AUX(i))

    def body(head: int) -> list[int]:
        lits = []
        for _ in range(rng.randint(0, 2)):
            a = rng.randrange(n)
            if a < head and rng.random() < 0.5:
                lits.append(p.p(AUX(a)))
            else:
                lits.append(p.n(AUX(a)))
        return lits

    for _ in range(rng.randint(1, 5)):
        kind = rng.random()
        head = rng.randrange(n)
        if kind < 0.55:
            p.add_normal(AUX(head), body(head))
        elif kind < 0.8:
            p.add_choice([AUX(head)], body(head))
        else:
            p.add_integrity(body(n))
    return p


ACCEPTANCE: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE.append(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE[-1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
