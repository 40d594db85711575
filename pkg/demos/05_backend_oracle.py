"""Cross-check the SQL backend against the in-memory reference backend.

The same seeded request stream goes to both; results must agree.

    python3 demos/05_backend_oracle.py
"""

import random
from pathlib import Path

from midd import DynamicObject, Engine, MemoryBackend, OperationKind, SqlBackend, ensure_schema, load_rules
from midd.cli import EngineConfig, load_engine

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
registry = load_engine(EngineConfig(FIXTURES / "car_rental.xmi")).registry
rules = tuple(load_rules((FIXTURES / "car_rental.rules").read_text(), registry))

engines = []
for backend in (MemoryBackend(), SqlBackend()):
    ensure_schema(registry, backend)
    engines.append(Engine(registry, backend, rules))

rng = random.Random(7)
agree = 0
requests = 500
for _ in range(requests):
    op = rng.choice(list(OperationKind))
    values = {"status": rng.choice([1, 2, None, "x"])}
    refs = {"client": rng.randint(1, 4)}
    obj = DynamicObject("Rental", values, refs, id=rng.randint(1, 20) if op.value in ("update", "delete") else None)
    if rng.random() < 0.3:
        obj = DynamicObject("Client", {"name": rng.choice("ab"), "license": rng.choice([None, "L"])})
        op = OperationKind.CREATE
    memory, sql = (e.request(obj, op) for e in engines)
    agree += memory.to_wire() == sql.to_wire()
print(f"{agree}/{requests} requests gave identical outcomes on both backends")
