"""Drive create/read/update/delete through the single request entry point.

Every request is interpreted against the loaded metadata; the SQL backend
logs the parameterized statements it ran.

    python3 demos/02_crud_requests.py
"""

import json
from pathlib import Path

from midd import DynamicObject, EngineConfig, OperationKind, load_engine

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
engine = load_engine(EngineConfig(FIXTURES / "car_rental.xmi", backend="sql"))


def show(obj, op):
    outcome = engine.request(obj, op)
    print(f"{op.value:6} {obj.clazz:8} -> {json.dumps(outcome.to_wire(), default=str)}")


show(DynamicObject("Vehicle", {"model": "Volkswagen Golf", "plate": "MS23C09"}), OperationKind.CREATE)
show(DynamicObject("Vehicle", {"model": "Volkswagen Polo", "plate": "WE231CK"}), OperationKind.CREATE)
show(DynamicObject("Vehicle", {"model": "Volkswagen Golf"}), OperationKind.READ)
show(DynamicObject("Vehicle", {"plate": "MS 23 C09"}, id=1), OperationKind.UPDATE)
show(DynamicObject("Vehicle", id=2), OperationKind.DELETE)
show(DynamicObject("Vehicle", {"color": "red"}), OperationKind.CREATE)
show(DynamicObject("Vehicle", id=42), OperationKind.DELETE)

print("\nstatements executed:")
for sql in dict.fromkeys(engine.backend.statements):
    print("  " + sql)
