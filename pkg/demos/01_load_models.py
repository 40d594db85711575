"""Load a model from either notation and inspect what the engine learned.

    python3 demos/01_load_models.py
"""

from pathlib import Path

from midd import build_registry, parse_native, parse_xmi

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

from_xmi = build_registry(parse_xmi((FIXTURES / "car_rental.xmi").read_text()))
from_text = build_registry(parse_native((FIXTURES / "car_rental.mdl").read_text()))

for name in from_xmi.list_classes():
    meta = from_xmi.get_class_by_name(name)
    attrs = ", ".join(f"{a.name}: {a.value_type.value}" for a in meta.attributes)
    roles = ", ".join(f"{r.role} -> {r.target_class} ({r.multiplicity.value})" for r in meta.associations)
    print(f"{name:8} columns={list(meta.columns)}")
    print(f"{'':8} attributes [{attrs}]")
    if roles:
        print(f"{'':8} roles [{roles}]")

print("XMI and text notation give the same registry:", from_xmi == from_text)
