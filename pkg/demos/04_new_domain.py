"""The same engine serves domains it has never seen.

First the rent-of-goods fixture, then a model written inline right here.
No engine code changes between them.

    python3 demos/04_new_domain.py
"""

from pathlib import Path

from midd import DynamicObject, Engine, MemoryBackend, OperationKind, build_registry, ensure_schema, parse_native
from midd.cli import EngineConfig, cmd_script, load_engine

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

goods = load_engine(EngineConfig(FIXTURES / "rent_of_goods.xmi", rules_path=FIXTURES / "rent_of_goods.rules"))
cmd_script(goods, FIXTURES / "rent_of_goods.jsonl")

library = build_registry(parse_native("""
class Book   { title: String; isbn: String; shelf -> Shelf; }
class Shelf  { label: String; books ->* Book; }
"""))
store = MemoryBackend()
ensure_schema(library, store)
engine = Engine(library, store)
engine.request(DynamicObject("Shelf", {"label": "A1"}), OperationKind.CREATE)
engine.request(DynamicObject("Book", {"title": "Dune", "isbn": "978-0441013593"}, {"shelf": 1}),
               OperationKind.CREATE)
found = engine.request(DynamicObject("Book", refs={"shelf": 1}), OperationKind.READ)
print("\nbooks on shelf 1:", [b.to_wire() for b in found.objects])
