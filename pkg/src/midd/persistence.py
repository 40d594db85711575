"""Object-relational mapping performed at call time from registry metadata.

Table and column names are never known here ahead of time: every statement
is synthesized from a :class:`ClassMeta` when a request arrives. Plans are
plain values; a :class:`StorageBackend` executes them.
"""

from __future__ import annotations

import contextlib
import copy
import datetime
import enum
import json
import sqlite3
import threading
from dataclasses import dataclass
from decimal import Decimal

from .dynamic_object import (
    DynamicObject,
    normalize_for_write,
    to_wire_value,
    validate_for_filter,
)
from .errors import BackendFailure, IdAlreadySet, MissingId, NotFound
from .registry import ClassMeta, MetadataRegistry, ScalarType

ID = "id"
ID_SQL_TYPE = "BIGINT"

SQL_TYPES = {
    ScalarType.STRING: "TEXT",
    ScalarType.INTEGER: "BIGINT",
    ScalarType.DECIMAL: "DECIMAL(15,2)",
    ScalarType.BOOLEAN: "INTEGER",
    ScalarType.DATE: "TEXT",
}


class PlanKind(enum.Enum):
    CREATE_TABLE = "CreateTable"
    SELECT = "Select"
    INSERT = "Insert"
    UPDATE = "Update"
    DELETE = "Delete"


@dataclass(frozen=True)
class StatementPlan:
    """A synthesized storage command.

    ``predicate`` holds ``(column, "=", param_index)`` terms joined by AND.
    ``column_types`` is only filled for CreateTable plans.
    """

    kind: PlanKind
    table: str
    columns: tuple = ()
    params: tuple = ()
    predicate: tuple = ()
    column_types: tuple = ()


def _where(plan):
    if not plan.predicate:
        return ""
    return " WHERE " + " AND ".join(f"{col} {op} ?" for col, op, _ in plan.predicate)


def render_sql(plan: StatementPlan) -> str:
    """Render ``plan`` as SQL text with ``?`` placeholders.

    Placeholders appear in parameter order, so ``plan.params`` can be bound
    positionally.
    """
    if plan.kind is PlanKind.CREATE_TABLE:
        cols = ", ".join(
            f"{col} {ctype}" + (" PRIMARY KEY" if col == ID else "")
            for col, ctype in zip(plan.columns, plan.column_types)
        )
        return f"CREATE TABLE {plan.table} ({cols})"
    if plan.kind is PlanKind.SELECT:
        return f"SELECT * FROM {plan.table}" + _where(plan)
    if plan.kind is PlanKind.INSERT:
        cols = ", ".join(plan.columns)
        marks = ", ".join("?" for _ in plan.columns)
        return f"INSERT INTO {plan.table} ({cols}) VALUES ({marks})"
    if plan.kind is PlanKind.UPDATE:
        sets = ", ".join(f"{col} = ?" for col in plan.columns)
        return f"UPDATE {plan.table} SET {sets}" + _where(plan)
    if plan.kind is PlanKind.DELETE:
        return f"DELETE FROM {plan.table}" + _where(plan)
    raise ValueError(f"unknown plan kind {plan.kind!r}")


def plan_create_table(class_meta: ClassMeta) -> StatementPlan:
    columns = class_meta.columns
    types = (
        (ID_SQL_TYPE,)
        + tuple(SQL_TYPES[a.value_type] for a in class_meta.attributes)
        + tuple(ID_SQL_TYPE for _ in class_meta.to_one)
    )
    return StatementPlan(PlanKind.CREATE_TABLE, class_meta.name, columns, column_types=types)


def plan_select(class_meta: ClassMeta, filter: DynamicObject) -> StatementPlan:
    terms = []
    if filter.id is not None:
        terms.append((ID, filter.id))
    terms += [(a, filter.values[a]) for a in class_meta.attribute_names if a in filter.values]
    terms += [(r, filter.refs[r]) for r in class_meta.to_one_roles if r in filter.refs]
    predicate = tuple((col, "=", i) for i, (col, _) in enumerate(terms))
    return StatementPlan(
        PlanKind.SELECT,
        class_meta.name,
        class_meta.columns,
        tuple(value for _, value in terms),
        predicate,
    )


def plan_insert(class_meta: ClassMeta, obj: DynamicObject, new_id: int) -> StatementPlan:
    params = (
        (new_id,)
        + tuple(obj.values.get(a) for a in class_meta.attribute_names)
        + tuple(obj.refs.get(r) for r in class_meta.to_one_roles)
    )
    return StatementPlan(PlanKind.INSERT, class_meta.name, class_meta.columns, params)


def plan_update(class_meta: ClassMeta, obj: DynamicObject) -> StatementPlan:
    if obj.id is None:
        raise MissingId(obj.clazz)
    cols = [a for a in class_meta.attribute_names if a in obj.values]
    cols += [r for r in class_meta.to_one_roles if r in obj.refs]
    params = tuple({**obj.values, **obj.refs}[c] for c in cols) + (obj.id,)
    return StatementPlan(
        PlanKind.UPDATE, class_meta.name, tuple(cols), params, ((ID, "=", len(cols)),)
    )


def plan_delete(class_meta: ClassMeta, id_: int) -> StatementPlan:
    return StatementPlan(PlanKind.DELETE, class_meta.name, (), (id_,), ((ID, "=", 0),))


# --------------------------------------------------------------------------
# backends


class StorageBackend:
    """Executes plans; one writer at a time per handle.

    Subclasses implement ``execute_plan``, ``has_table``, ``allocate_id``,
    ``dump`` and the ``_begin``/``_commit``/``_rollback`` hooks.
    """

    def __init__(self):
        self._lock = threading.RLock()
        self._depth = 0

    def execute_plan(self, plan: StatementPlan) -> list:
        raise NotImplementedError

    def has_table(self, name) -> bool:
        raise NotImplementedError

    def allocate_id(self, table) -> int:
        """Next surrogate id for ``table``; never reuses a deleted id."""
        raise NotImplementedError

    def dump(self) -> str:
        """Full textual image of the store, for before/after comparisons."""
        raise NotImplementedError

    def begin(self):
        self._lock.acquire()
        if self._depth == 0:
            self._begin()
        self._depth += 1

    def commit(self):
        self._depth -= 1
        if self._depth == 0:
            self._commit()
        self._lock.release()

    def rollback(self):
        self._depth -= 1
        if self._depth == 0:
            self._rollback()
        self._lock.release()

    @contextlib.contextmanager
    def unit_of_work(self):
        self.begin()
        try:
            yield self
        except BaseException:
            self.rollback()
            raise
        else:
            self.commit()

    def close(self):
        pass

    def _begin(self):
        pass

    def _commit(self):
        pass

    def _rollback(self):
        pass


class MemoryBackend(StorageBackend):
    """Reference store: each table is a dict from id to row.

    Plans are interpreted directly, without SQL, so this backend serves as
    the oracle for :class:`SqlBackend`.
    """

    def __init__(self):
        super().__init__()
        self.tables: dict[str, dict] = {}
        self.sequences: dict[str, int] = {}
        self._snapshot = None

    def _table(self, name):
        try:
            return self.tables[name]
        except KeyError:
            raise BackendFailure(f"no such table: {name}") from None

    @staticmethod
    def _matches(row, plan):
        for col, _, index in plan.predicate:
            value = row.get(col)
            if value is None or value != plan.params[index]:
                return False
        return True

    def execute_plan(self, plan):
        kind = plan.kind
        if kind is PlanKind.CREATE_TABLE:
            if plan.table in self.tables:
                raise BackendFailure(f"table {plan.table} already exists")
            self.tables[plan.table] = {"columns": tuple(plan.columns), "rows": {}}
            return []
        table = self._table(plan.table)
        rows = table["rows"]
        if kind is PlanKind.SELECT:
            return [dict(row) for row in rows.values() if self._matches(row, plan)]
        if kind is PlanKind.INSERT:
            unknown = set(plan.columns) - set(table["columns"])
            if unknown:
                raise BackendFailure(f"table {plan.table} has no column {sorted(unknown)[0]}")
            row = {col: None for col in table["columns"]}
            row.update(zip(plan.columns, plan.params))
            if row[ID] in rows:
                raise BackendFailure(f"duplicate id {row[ID]} in {plan.table}")
            rows[row[ID]] = row
            return []
        targets = [key for key, row in rows.items() if self._matches(row, plan)]
        if kind is PlanKind.UPDATE:
            for key in targets:
                rows[key].update(zip(plan.columns, plan.params))
            return []
        if kind is PlanKind.DELETE:
            for key in targets:
                del rows[key]
            return []
        raise BackendFailure(f"unsupported plan kind {kind}")

    def has_table(self, name):
        return name in self.tables

    def allocate_id(self, table):
        self._table(table)
        self.sequences[table] = self.sequences.get(table, 0) + 1
        return self.sequences[table]

    def dump(self):
        image = {
            name: [[row[col] for col in table["columns"]] for _, row in sorted(table["rows"].items())]
            for name, table in sorted(self.tables.items())
        }
        return json.dumps(
            {"tables": image, "sequences": dict(sorted(self.sequences.items()))},
            default=repr,
        )

    def _begin(self):
        self._snapshot = copy.deepcopy((self.tables, self.sequences))

    def _commit(self):
        self._snapshot = None

    def _rollback(self):
        self.tables, self.sequences = self._snapshot
        self._snapshot = None


SEQUENCE_TABLE = "_midd_sequence"  # leading underscore cannot collide with a class name


def _to_storage(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (Decimal, datetime.date)):
        return to_wire_value(value)
    return value


class SqlBackend(StorageBackend):
    """Renders every plan to SQL text and runs it on an embedded SQLite store."""

    def __init__(self, path=":memory:"):
        super().__init__()
        try:
            self.conn = sqlite3.connect(path, isolation_level=None, check_same_thread=False)
            self.conn.execute(
                f"CREATE TABLE IF NOT EXISTS {SEQUENCE_TABLE} (tbl TEXT PRIMARY KEY, last BIGINT)"
            )
        except sqlite3.Error as exc:
            raise BackendFailure(str(exc)) from None
        self.statements: list[str] = []

    def _run(self, sql, params=()):
        try:
            return self.conn.execute(sql, params)
        except sqlite3.Error as exc:
            raise BackendFailure(f"{exc} [{sql}]") from None

    def execute_plan(self, plan):
        sql = render_sql(plan)
        self.statements.append(sql)
        cursor = self._run(sql, [_to_storage(p) for p in plan.params])
        if plan.kind is not PlanKind.SELECT:
            return []
        names = [d[0] for d in cursor.description]
        return [dict(zip(names, row)) for row in cursor.fetchall()]

    def has_table(self, name):
        row = self._run(
            "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = ?", (name,)
        ).fetchone()
        return row[0] > 0

    def allocate_id(self, table):
        with self.unit_of_work():
            row = self._run(f"SELECT last FROM {SEQUENCE_TABLE} WHERE tbl = ?", (table,)).fetchone()
            last = (row[0] if row else 0) + 1
            self._run(
                f"INSERT OR REPLACE INTO {SEQUENCE_TABLE} (tbl, last) VALUES (?, ?)", (table, last)
            )
        return last

    def dump(self):
        return "\n".join(self.conn.iterdump())

    def close(self):
        self.conn.close()

    def _begin(self):
        self._run("BEGIN")

    def _commit(self):
        self._run("COMMIT")

    def _rollback(self):
        self._run("ROLLBACK")


def open_backend(kind="memory", store_path=None) -> StorageBackend:
    if kind == "memory":
        return MemoryBackend()
    if kind == "sql":
        return SqlBackend(store_path or ":memory:")
    raise ValueError(f"unknown backend {kind!r}")


# --------------------------------------------------------------------------
# interpreter


def _from_storage(value, value_type):
    if value is None:
        return None
    if value_type is ScalarType.BOOLEAN:
        return bool(value)
    if value_type is ScalarType.DECIMAL:
        if isinstance(value, float):
            value = repr(value)
        return Decimal(value).quantize(Decimal("0.01"))
    if value_type is ScalarType.DATE and isinstance(value, str):
        return datetime.date.fromisoformat(value)
    if value_type is ScalarType.INTEGER:
        return int(value)
    return value


def row_to_object(class_meta: ClassMeta, row: dict) -> DynamicObject:
    values = {a.name: _from_storage(row.get(a.name), a.value_type) for a in class_meta.attributes}
    refs = {}
    for role in class_meta.to_one_roles:
        ref = row.get(role)
        refs[role] = None if ref is None else int(ref)
    return DynamicObject(class_meta.name, values, refs, int(row[ID]))


def ensure_schema(registry: MetadataRegistry, backend: StorageBackend) -> int:
    """Create one table per class that lacks one; return how many were created."""
    created = 0
    with backend.unit_of_work():
        for name in registry.list_classes():
            if backend.has_table(name):
                continue
            backend.execute_plan(plan_create_table(registry.get_class_by_name(name)))
            created += 1
    return created


def fetch(registry: MetadataRegistry, backend: StorageBackend, clazz, id_):
    """Stored object ``clazz`` with ``id_``, or ``None``."""
    meta = registry.get_class_by_name(clazz)
    rows = backend.execute_plan(plan_select(meta, DynamicObject(clazz, id=id_)))
    return row_to_object(meta, rows[0]) if rows else None


def read(registry: MetadataRegistry, backend: StorageBackend, filter: DynamicObject):
    meta = registry.get_class_by_name(filter.clazz)
    plan = plan_select(meta, validate_for_filter(filter, meta))
    rows = backend.execute_plan(plan)
    return sorted((row_to_object(meta, row) for row in rows), key=lambda o: o.id)


def insert(registry: MetadataRegistry, backend: StorageBackend, obj: DynamicObject):
    meta = registry.get_class_by_name(obj.clazz)
    if obj.id is not None:
        raise IdAlreadySet(obj.clazz, obj.id)
    clean = normalize_for_write(obj, meta)
    with backend.unit_of_work():
        new_id = backend.allocate_id(meta.name)
        backend.execute_plan(plan_insert(meta, clean, new_id))
        return fetch(registry, backend, meta.name, new_id)


def update(registry: MetadataRegistry, backend: StorageBackend, obj: DynamicObject):
    """Partial update: only the keys present in ``obj`` are written."""
    meta = registry.get_class_by_name(obj.clazz)
    if obj.id is None:
        raise MissingId(obj.clazz)
    clean = normalize_for_write(obj, meta)
    with backend.unit_of_work():
        if fetch(registry, backend, meta.name, obj.id) is None:
            raise NotFound(meta.name, obj.id)
        plan = plan_update(meta, clean)
        if plan.columns:
            backend.execute_plan(plan)
        return fetch(registry, backend, meta.name, obj.id)


def delete(registry: MetadataRegistry, backend: StorageBackend, clazz, id_):
    """Remove one object and return it as it was stored."""
    meta = registry.get_class_by_name(clazz)
    if id_ is None:
        raise MissingId(clazz)
    with backend.unit_of_work():
        existing = fetch(registry, backend, meta.name, id_)
        if existing is None:
            raise NotFound(meta.name, id_)
        backend.execute_plan(plan_delete(meta, id_))
        return existing
