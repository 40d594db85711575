import datetime
from decimal import Decimal
from pathlib import Path

import pytest

from conftest import load_registry
from midd import persistence
from midd.dynamic_object import DynamicObject
from midd.model_parser import parse_native
from midd.registry import build_registry
from midd.errors import (
    BackendFailure,
    IdAlreadySet,
    MissingId,
    NotFound,
    TypeMismatch,
    UnknownClass,
    ValidationFailed,
)
from midd.persistence import (
    MemoryBackend,
    PlanKind,
    SqlBackend,
    StatementPlan,
    ensure_schema,
    plan_create_table,
    plan_delete,
    plan_insert,
    plan_select,
    plan_update,
    render_sql,
)

GOLDEN = Path(__file__).parent / "golden"
GOLF = {"model": "Volkswagen Golf", "plate": "MS23C09"}


def golden(name):
    return (GOLDEN / f"{name}.sql").read_text(encoding="utf-8")


# The two statement templates of the runtime mapping, filled the way the
# original string builder fills them, but with placeholders for values.
SELECT_TEMPLATE = "SELECT * FROM {table} WHERE {predicate}"
INSERT_TEMPLATE = "INSERT INTO {table} ({cols}) VALUES ({values})"


def template_select(table, keys):
    predicate = "".join(f"{k} = ? AND " for k in keys).removesuffix(" AND ")
    text = SELECT_TEMPLATE.replace("{table}", table).replace("{predicate}", predicate)
    return text.removesuffix(" WHERE ")


def template_insert(table, cols):
    return (INSERT_TEMPLATE.replace("{table}", table)
            .replace("{cols}", "".join(f"{c}, " for c in cols).removesuffix(", "))
            .replace("{values}", "".join("?, " for _ in cols).removesuffix(", ")))


@pytest.fixture
def metas(car_registry):
    return {name: car_registry.get_class_by_name(name) for name in car_registry.classes}


def test_select_golden(metas):
    plan = plan_select(metas["Vehicle"], DynamicObject("Vehicle", {"model": "Volkswagen Golf"}))
    assert plan.kind is PlanKind.SELECT and plan.table == "Vehicle"
    assert plan.predicate == (("model", "=", 0),)
    assert plan.params == ("Volkswagen Golf",)
    assert render_sql(plan) + "\n" == golden("select_vehicle_by_model")
    assert golden("select_vehicle_by_model") == template_select("Vehicle", ["model"]) + "\n"


def test_select_empty_filter(metas):
    plan = plan_select(metas["Vehicle"], DynamicObject("Vehicle"))
    assert plan.predicate == () and plan.params == ()
    assert render_sql(plan) + "\n" == golden("select_vehicle_all")
    assert golden("select_vehicle_all") == template_select("Vehicle", []) + "\n"


def test_select_conjunction(metas):
    plan = plan_select(metas["Rental"], DynamicObject("Rental", {"status": 1}, {"client": 42}))
    assert plan.predicate == (("status", "=", 0), ("client", "=", 1))
    assert plan.params == (1, 42)
    assert render_sql(plan) + "\n" == golden("select_rental_by_status_client")
    assert golden("select_rental_by_status_client") == template_select(
        "Rental", ["status", "client"]) + "\n"


def test_insert_golden(metas):
    plan = plan_insert(metas["Vehicle"], DynamicObject("Vehicle", GOLF), 1)
    assert plan.columns == ("id", "model", "plate")
    assert plan.params == (1, "Volkswagen Golf", "MS23C09")
    assert render_sql(plan) + "\n" == golden("insert_vehicle")
    assert golden("insert_vehicle") == template_insert("Vehicle", ["id", "model", "plate"]) + "\n"


def test_insert_absent_values_are_null(metas):
    plan = plan_insert(metas["Vehicle"], DynamicObject("Vehicle"), 2)
    assert plan.params == (2, None, None)


def test_insert_rental(metas):
    obj = DynamicObject("Rental", {"status": 1, "expires": datetime.date(2025, 3, 1)},
                        {"client": 7, "vehicle": 1, "office": 3})
    plan = plan_insert(metas["Rental"], obj, 10)
    assert plan.params == (10, 1, datetime.date(2025, 3, 1), 7, 1, 3)
    assert render_sql(plan) + "\n" == golden("insert_rental")
    assert golden("insert_rental") == template_insert(
        "Rental", ["id", "status", "expires", "client", "vehicle", "office"]) + "\n"


def test_update_plans(metas):
    plan = plan_update(metas["Vehicle"], DynamicObject("Vehicle", {"plate": "WE231CK"}, id=1))
    assert plan.columns == ("plate",)
    assert plan.params == ("WE231CK", 1)
    assert plan.predicate == (("id", "=", 1),)
    assert render_sql(plan) + "\n" == golden("update_vehicle_plate")
    plan = plan_update(metas["Rental"], DynamicObject("Rental", {"status": 2}, id=10))
    assert render_sql(plan) == "UPDATE Rental SET status = ? WHERE id = ?"
    assert plan.params == (2, 10)
    with pytest.raises(MissingId):
        plan_update(metas["Vehicle"], DynamicObject("Vehicle", {"plate": "x"}))


def test_delete_plans(metas):
    plan = plan_delete(metas["Vehicle"], 1)
    assert (plan.params, plan.predicate) == ((1,), (("id", "=", 0),))
    assert render_sql(plan) + "\n" == golden("delete_vehicle")
    assert render_sql(plan_delete(metas["Office"], 99)) == "DELETE FROM Office WHERE id = ?"


def test_create_table(metas):
    assert render_sql(plan_create_table(metas["Rental"])) + "\n" == golden("create_rental")
    assert render_sql(plan_create_table(metas["Vehicle"])) + "\n" == golden("create_vehicle")
    # ToMany roles get no column
    assert plan_create_table(metas["Client"]).columns == ("id", "name", "address", "license")


def test_statement_determinism(metas):
    obj = DynamicObject("Rental", {"expires": "x", "status": 1}, {"office": 1, "client": 2})
    first = render_sql(plan_update(metas["Rental"], obj.copy(id=1)))
    reordered = DynamicObject("Rental", {"status": 1, "expires": "x"}, {"client": 2, "office": 1}, 1)
    assert render_sql(plan_update(metas["Rental"], reordered)) == first
    assert first.encode() == "UPDATE Rental SET status = ?, expires = ?, client = ?, office = ? WHERE id = ?".encode()


def test_values_never_inlined(metas):
    hostile = "x'; DROP TABLE Vehicle; --"
    obj = DynamicObject("Vehicle", {"model": hostile, "plate": hostile})
    for plan in (plan_select(metas["Vehicle"], obj), plan_insert(metas["Vehicle"], obj, 1),
                 plan_update(metas["Vehicle"], obj.copy(id=1))):
        assert hostile not in render_sql(plan)
        assert hostile in plan.params


# --------------------------------------------------------------------------
# execution, on both backends


def test_ensure_schema(car_registry, backend):
    assert ensure_schema(car_registry, backend) == 4
    assert ensure_schema(car_registry, backend) == 0
    assert all(backend.has_table(n) for n in car_registry.classes)
    assert ensure_schema(build_registry(parse_native("")), backend) == 0


def test_schema_columns_sql():
    registry = load_registry("car_rental")
    store = SqlBackend()
    ensure_schema(registry, store)
    cols = [r[1] for r in store.conn.execute("PRAGMA table_info(Rental)")]
    assert cols == ["id", "status", "expires", "client", "vehicle", "office"]


def test_insert_then_read(car_store):
    registry, store = car_store
    stored = persistence.insert(registry, store, DynamicObject("Vehicle", GOLF))
    assert stored == DynamicObject("Vehicle", GOLF, {}, 1)
    found = persistence.read(registry, store, DynamicObject("Vehicle", {"model": "Volkswagen Golf"}))
    assert [o.values["plate"] for o in found] == ["MS23C09"]
    assert persistence.read(registry, store, DynamicObject("Vehicle", {"model": "Fiat"})) == []


def test_read_empty_and_unknown(car_store):
    registry, store = car_store
    assert persistence.read(registry, store, DynamicObject("Vehicle")) == []
    with pytest.raises(UnknownClass):
        persistence.read(registry, store, DynamicObject("Boat"))
    with pytest.raises(TypeMismatch):
        persistence.read(registry, store, DynamicObject("Rental", {"status": "open"}))


def test_insert_errors(car_store):
    registry, store = car_store
    with pytest.raises(IdAlreadySet):
        persistence.insert(registry, store, DynamicObject("Vehicle", GOLF, id=3))
    with pytest.raises(ValidationFailed) as err:
        persistence.insert(registry, store, DynamicObject("Vehicle", {"color": "red"}))
    assert err.value.report.issues[0].key == "color"


def test_ids_monotonic_per_table(car_store):
    registry, store = car_store
    ids = [persistence.insert(registry, store, DynamicObject("Office", {"name": n})).id
           for n in "abc"]
    assert ids == [1, 2, 3]
    assert persistence.insert(registry, store, DynamicObject("Vehicle")).id == 1
    persistence.delete(registry, store, "Office", 3)
    assert persistence.insert(registry, store, DynamicObject("Office")).id == 4


def test_rental_round_trip_all_types(car_store):
    registry, store = car_store
    client = persistence.insert(registry, store, DynamicObject("Client", {"name": "Ana"}))
    rental = persistence.insert(registry, store, DynamicObject(
        "Rental", {"status": 1, "expires": datetime.date(2025, 3, 1)}, {"client": client.id}))
    assert rental.values == {"status": 1, "expires": datetime.date(2025, 3, 1)}
    assert rental.refs == {"client": 1, "vehicle": None, "office": None}
    # Client.rentals is answered by the owning side's column
    assert persistence.read(registry, store, DynamicObject("Rental", refs={"client": 1})) == [rental]


def test_decimal_and_boolean_storage(backend):
    registry = load_registry("rent_of_goods")
    ensure_schema(registry, backend)
    loan = persistence.insert(registry, backend, DynamicObject(
        "Loan", {"fee": Decimal("12.10"), "expires": "2025-03-01"}))
    assert loan.values["fee"] == Decimal("12.10") and str(loan.values["fee"]) == "12.10"
    item = persistence.insert(registry, backend, DynamicObject("Resource", {"available": True}))
    assert item.values["available"] is True
    assert persistence.read(registry, backend, DynamicObject("Loan", {"fee": "12.1"})) == [loan]
    assert persistence.read(registry, backend, DynamicObject("Resource", {"available": False})) == []


def test_update(car_store):
    registry, store = car_store
    persistence.insert(registry, store, DynamicObject("Vehicle", GOLF))
    updated = persistence.update(registry, store, DynamicObject("Vehicle", {"plate": "WE231CK"}, id=1))
    assert updated.values == {"model": "Volkswagen Golf", "plate": "WE231CK"}
    unchanged = persistence.update(registry, store, DynamicObject("Vehicle", id=1))
    assert unchanged == updated
    with pytest.raises(NotFound):
        persistence.update(registry, store, DynamicObject("Vehicle", {"plate": "x"}, id=2))
    with pytest.raises(MissingId):
        persistence.update(registry, store, DynamicObject("Vehicle", {"plate": "x"}))


def test_delete_then_select(car_store):
    registry, store = car_store
    persistence.insert(registry, store, DynamicObject("Vehicle", GOLF))
    removed = persistence.delete(registry, store, "Vehicle", 1)
    assert removed.values == GOLF
    assert persistence.read(registry, store, DynamicObject("Vehicle", id=1)) == []
    with pytest.raises(NotFound):
        persistence.delete(registry, store, "Vehicle", 1)


def test_dangling_refs_survive_delete(car_store):
    registry, store = car_store
    persistence.insert(registry, store, DynamicObject("Client"))
    rental = persistence.insert(registry, store, DynamicObject("Rental", refs={"client": 1}))
    persistence.delete(registry, store, "Client", 1)
    assert persistence.read(registry, store, DynamicObject("Rental"))[0].refs["client"] == 1
    assert rental.refs["client"] == 1


def test_unit_of_work_rollback(car_store):
    registry, store = car_store
    persistence.insert(registry, store, DynamicObject("Office", {"name": "a"}))
    before = store.dump()
    with pytest.raises(RuntimeError):
        with store.unit_of_work():
            persistence.insert(registry, store, DynamicObject("Office", {"name": "b"}))
            raise RuntimeError("abort")
    assert store.dump() == before
    assert persistence.insert(registry, store, DynamicObject("Office")).id == 2


def test_backend_failures():
    store = MemoryBackend()
    with pytest.raises(BackendFailure):
        store.execute_plan(StatementPlan(PlanKind.SELECT, "Nowhere"))
    sql = SqlBackend()
    with pytest.raises(BackendFailure):
        sql.execute_plan(StatementPlan(PlanKind.SELECT, "Nowhere"))


def test_sql_backend_renders_what_it_runs(car_registry):
    store = SqlBackend()
    ensure_schema(car_registry, store)
    persistence.insert(car_registry, store, DynamicObject("Vehicle", GOLF))
    assert "INSERT INTO Vehicle (id, model, plate) VALUES (?, ?, ?)" in store.statements
    assert all("Volkswagen" not in s for s in store.statements)


def test_sql_store_file_persists(tmp_path, car_registry):
    path = tmp_path / "store.db"
    store = SqlBackend(path)
    assert ensure_schema(car_registry, store) == 4
    persistence.insert(car_registry, store, DynamicObject("Vehicle", GOLF))
    store.close()
    store = SqlBackend(path)
    assert ensure_schema(car_registry, store) == 0
    assert len(persistence.read(car_registry, store, DynamicObject("Vehicle"))) == 1
    assert persistence.insert(car_registry, store, DynamicObject("Vehicle")).id == 2
