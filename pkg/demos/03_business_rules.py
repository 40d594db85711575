"""Business rules gate writes before anything reaches storage.

A rental may only be created for a client who holds a license.

    python3 demos/03_business_rules.py
"""

from pathlib import Path

from midd import DynamicObject, EngineConfig, OperationKind, load_engine

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
engine = load_engine(EngineConfig(FIXTURES / "car_rental.mdl", rules_path=FIXTURES / "car_rental.rules"))
print("rules:", (FIXTURES / "car_rental.rules").read_text().strip())

create = OperationKind.CREATE
engine.request(DynamicObject("Client", {"name": "Ana", "license": "B123"}), create)
engine.request(DynamicObject("Client", {"name": "Bruno"}), create)

before = engine.backend.dump()
for client in (2, 1):
    outcome = engine.request(DynamicObject("Rental", {"status": 1}, {"client": client}), create)
    print(f"rental for client {client}: {outcome.status.value} {outcome.to_wire()['detail'] or ''}")
    if client == 2:
        print("store unchanged after rejection:", engine.backend.dump() == before)
