"""Untyped class-tagged records and their validation against metadata.

Scalar values use plain Python types: ``str``, ``int``, ``Decimal``
(scale 2), ``bool``, ``datetime.date`` and ``None`` for Null.
"""

from __future__ import annotations

import datetime
import enum
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from .errors import Uncoercible, TypeMismatch, ValidationFailed
from .registry import RESERVED_NAMES, ClassMeta, ScalarType

INT_MIN, INT_MAX = -(2**63), 2**63 - 1
DECIMAL_SCALE = Decimal("0.01")
DECIMAL_LIMIT = Decimal(10) ** 13  # DECIMAL(15,2): 15 significant digits survive a double

_INT_TEXT = re.compile(r"[+-]?[0-9]+\Z")
_DEC_TEXT = re.compile(r"[+-]?[0-9]+(\.[0-9]+)?\Z")
_DATE_TEXT = re.compile(r"[0-9]{4}-[0-9]{2}-[0-9]{2}\Z")


def scalar_type_of(value) -> Optional[ScalarType]:
    """Tag of an already-typed value; ``None`` for Null or foreign types."""
    if isinstance(value, bool):
        return ScalarType.BOOLEAN
    if isinstance(value, int):
        return ScalarType.INTEGER
    if isinstance(value, Decimal):
        return ScalarType.DECIMAL
    if isinstance(value, datetime.datetime):
        return None
    if isinstance(value, datetime.date):
        return ScalarType.DATE
    if isinstance(value, str):
        return ScalarType.STRING
    return None


def _decimal(value, original):
    if not value.is_finite() or abs(value) >= DECIMAL_LIMIT:
        raise Uncoercible(original, ScalarType.DECIMAL)
    quantized = value.quantize(DECIMAL_SCALE)
    if quantized != value:
        raise Uncoercible(original, ScalarType.DECIMAL)
    return quantized


def coerce(value, target: ScalarType):
    """Convert ``value`` to the Python representation of ``target``.

    Already-typed values pass through (integers widen to Decimal); text is
    read in canonical form only. Null passes to every target.
    """
    if value is None:
        return None
    if target is ScalarType.STRING:
        if isinstance(value, str):
            return value
    elif target is ScalarType.INTEGER:
        if isinstance(value, int) and not isinstance(value, bool):
            number = value
        elif isinstance(value, str) and _INT_TEXT.match(value):
            number = int(value)
        else:
            raise Uncoercible(value, target)
        if INT_MIN <= number <= INT_MAX:
            return number
    elif target is ScalarType.DECIMAL:
        try:
            if isinstance(value, Decimal):
                return _decimal(value, value)
            if isinstance(value, int) and not isinstance(value, bool):
                return _decimal(Decimal(value), value)
            if isinstance(value, float):
                return _decimal(Decimal(repr(value)), value)
            if isinstance(value, str) and _DEC_TEXT.match(value):
                return _decimal(Decimal(value), value)
        except InvalidOperation:
            pass
    elif target is ScalarType.BOOLEAN:
        if isinstance(value, bool):
            return value
        if value == "true":
            return True
        if value == "false":
            return False
    elif target is ScalarType.DATE:
        if isinstance(value, datetime.date) and not isinstance(value, datetime.datetime):
            return value
        if isinstance(value, str) and _DATE_TEXT.match(value):
            try:
                return datetime.date.fromisoformat(value)
            except ValueError:
                pass
    raise Uncoercible(value, target)


def to_wire_value(value):
    if isinstance(value, Decimal):
        return str(value)
    if isinstance(value, datetime.date):
        return value.isoformat()
    return value


@dataclass
class DynamicObject:
    """A class-tagged record standing in for a domain class instance.

    ``values`` holds attribute values, ``refs`` holds the surrogate id of
    the target of each single-valued role.
    """

    clazz: str
    values: dict = field(default_factory=dict)
    refs: dict = field(default_factory=dict)
    id: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.clazz, str) or not self.clazz:
            raise ValueError("clazz must be a non-empty string")
        for key in list(self.values) + list(self.refs):
            if key in RESERVED_NAMES:
                raise ValueError(f"{key!r} is reserved and cannot be used as a member name")

    def copy(self, **changes):
        data = dict(clazz=self.clazz, values=dict(self.values), refs=dict(self.refs), id=self.id)
        data.update(changes)
        return DynamicObject(**data)

    def keys(self):
        return list(self.values) + list(self.refs)

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {"clazz": self.clazz}
        if self.id is not None:
            wire["id"] = self.id
        for key, value in self.values.items():
            wire[key] = to_wire_value(value)
        wire.update(self.refs)
        return wire

    @classmethod
    def from_wire(cls, data: dict, class_meta: Optional[ClassMeta] = None) -> "DynamicObject":
        """Build from the flat wire form.

        With ``class_meta``, members naming a single-valued role become refs;
        without it every non-reserved member is treated as a value.
        """
        if not isinstance(data, dict):
            raise ValueError("wire object must be a JSON object")
        if "clazz" not in data:
            raise ValueError("wire object has no 'clazz' member")
        roles = set(class_meta.to_one_roles) if class_meta is not None else set()
        values, refs = {}, {}
        for key, value in data.items():
            if key in RESERVED_NAMES:
                continue
            (refs if key in roles else values)[key] = value
        id_ = data.get("id")
        if id_ is not None and (isinstance(id_, bool) or not isinstance(id_, int)):
            raise ValueError(f"'id' must be an integer, got {id_!r}")
        return cls(data["clazz"], values, refs, id_)

    @classmethod
    def from_json(cls, text: str, class_meta: Optional[ClassMeta] = None) -> "DynamicObject":
        return cls.from_wire(json.loads(text, parse_float=Decimal), class_meta)


class IssueKind(enum.Enum):
    UNKNOWN_KEY = "UnknownKey"
    TYPE_MISMATCH = "TypeMismatch"
    MISSING_REQUIRED = "MissingRequired"


@dataclass(frozen=True)
class Issue:
    key: str
    kind: IssueKind
    message: str

    def to_wire(self):
        return {"key": self.key, "kind": self.kind.value, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self):
        return not self.issues

    def to_wire(self):
        return {"ok": self.ok, "issues": [i.to_wire() for i in self.issues]}


def _coerce_ref(value):
    return coerce(value, ScalarType.INTEGER)


def validate_for_write(obj: DynamicObject, class_meta: ClassMeta) -> ValidationReport:
    """Report every unknown key and uncoercible value; absent keys are fine."""
    issues = []
    for key, value in obj.values.items():
        attr = class_meta.attribute(key)
        if attr is None:
            issues.append(Issue(key, IssueKind.UNKNOWN_KEY,
                                f"{class_meta.name} has no attribute {key!r}"))
            continue
        try:
            coerce(value, attr.value_type)
        except Uncoercible:
            issues.append(Issue(key, IssueKind.TYPE_MISMATCH,
                                f"{value!r} is not a valid {attr.value_type}"))
    roles = class_meta.to_one_roles
    for role, value in obj.refs.items():
        if role not in roles:
            issues.append(Issue(role, IssueKind.UNKNOWN_KEY,
                                f"{class_meta.name} has no single-valued role {role!r}"))
            continue
        try:
            _coerce_ref(value)
        except Uncoercible:
            issues.append(Issue(role, IssueKind.TYPE_MISMATCH,
                                f"{value!r} is not a valid reference id"))
    return ValidationReport(tuple(issues))


def normalize_for_write(obj: DynamicObject, class_meta: ClassMeta) -> DynamicObject:
    """Validated copy with every value coerced; raises :class:`ValidationFailed`."""
    report = validate_for_write(obj, class_meta)
    if not report.ok:
        raise ValidationFailed(report)
    values = {a.name: coerce(obj.values[a.name], a.value_type)
              for a in class_meta.attributes if a.name in obj.values}
    refs = {r: _coerce_ref(obj.refs[r]) for r in class_meta.to_one_roles if r in obj.refs}
    return DynamicObject(obj.clazz, values, refs, obj.id)


def validate_for_filter(obj: DynamicObject, class_meta: ClassMeta) -> DynamicObject:
    """Copy keeping only declared attributes and single-valued roles.

    Unknown keys and Null values are dropped; a known key whose value cannot
    be coerced raises :class:`TypeMismatch`. Keys come out in declaration
    order.
    """
    values, refs = {}, {}
    for attr in class_meta.attributes:
        if attr.name in obj.values:
            try:
                value = coerce(obj.values[attr.name], attr.value_type)
            except Uncoercible as exc:
                raise TypeMismatch(attr.name, str(exc)) from None
            if value is not None:
                values[attr.name] = value
    merged = {**obj.values, **obj.refs}
    for role in class_meta.to_one_roles:
        if role in merged:
            try:
                value = _coerce_ref(merged[role])
            except Uncoercible as exc:
                raise TypeMismatch(role, str(exc)) from None
            if value is not None:
                refs[role] = value
    return DynamicObject(obj.clazz, values, refs, obj.id)
