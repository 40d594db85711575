"""Single request entry point for every class of every loaded model."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

from . import persistence
from .dynamic_object import DynamicObject, ValidationReport, normalize_for_write
from .errors import (
    BackendFailure,
    IdAlreadySet,
    MissingId,
    NotFound,
    TypeMismatch,
    UnknownClass,
    ValidationFailed,
)
from .operation import OperationKind
from .registry import MetadataRegistry
from .rules import RuleVerdict, check_constraints


class Status(enum.Enum):
    OK = "Ok"
    REJECTED = "Rejected"
    INVALID = "Invalid"
    NOT_FOUND = "NotFound"
    FAILED = "Failed"


@dataclass(frozen=True)
class RequestOutcome:
    status: Status
    objects: tuple = ()
    detail: Union[ValidationReport, RuleVerdict, str, None] = None

    @property
    def ok(self):
        return self.status is Status.OK

    def to_wire(self):
        detail = self.detail
        if hasattr(detail, "to_wire"):
            detail = detail.to_wire()
        return {
            "status": self.status.value,
            "objects": [o.to_wire() for o in self.objects],
            "detail": detail,
        }


class _Rejected(Exception):
    def __init__(self, verdict):
        self.verdict = verdict


@dataclass
class Engine:
    """Control concern: validation, then rules, then persistence.

    Each request is one unit of work on the backend; any outcome other than
    ``Ok`` leaves the store untouched.
    """

    registry: MetadataRegistry
    backend: persistence.StorageBackend
    rules: tuple = field(default_factory=tuple)

    def request(self, obj: DynamicObject, operation: OperationKind) -> RequestOutcome:
        operation = OperationKind(operation)
        try:
            with self.backend.unit_of_work():
                objects = self._dispatch(obj, operation)
        except _Rejected as exc:
            return RequestOutcome(Status.REJECTED, detail=exc.verdict)
        except ValidationFailed as exc:
            return RequestOutcome(Status.INVALID, detail=exc.report)
        except (UnknownClass, TypeMismatch, MissingId, IdAlreadySet) as exc:
            return RequestOutcome(Status.INVALID, detail=str(exc))
        except NotFound as exc:
            return RequestOutcome(Status.NOT_FOUND, detail=str(exc))
        except BackendFailure as exc:
            return RequestOutcome(Status.FAILED, detail=str(exc))
        return RequestOutcome(Status.OK, tuple(objects))

    def _gate(self, obj, operation):
        verdict = check_constraints(self.rules, obj, operation, self.registry, self.backend)
        if not verdict.allowed:
            raise _Rejected(verdict)

    def _dispatch(self, obj, operation):
        registry, backend = self.registry, self.backend
        meta = registry.get_class_by_name(obj.clazz)
        if operation is OperationKind.READ:
            return persistence.read(registry, backend, obj)
        if operation is OperationKind.CREATE:
            if obj.id is not None:
                raise IdAlreadySet(obj.clazz, obj.id)
            clean = normalize_for_write(obj, meta)
            self._gate(clean, operation)
            return [persistence.insert(registry, backend, clean)]
        if obj.id is None:
            raise MissingId(obj.clazz)
        if operation is OperationKind.UPDATE:
            clean = normalize_for_write(obj, meta)
            stored = persistence.fetch(registry, backend, meta.name, obj.id)
            if stored is None:
                raise NotFound(meta.name, obj.id)
            # rules see the object as it would be after the partial update
            prospective = stored.copy(
                values={**stored.values, **clean.values}, refs={**stored.refs, **clean.refs}
            )
            self._gate(prospective, operation)
            return [persistence.update(registry, backend, clean)]
        stored = persistence.fetch(registry, backend, meta.name, obj.id)
        if stored is None:
            raise NotFound(meta.name, obj.id)
        self._gate(stored, operation)
        return [persistence.delete(registry, backend, meta.name, obj.id)]


def object_from_wire(registry: MetadataRegistry, data: dict) -> DynamicObject:
    """Wire form to :class:`DynamicObject`, splitting refs by the class metadata."""
    clazz = data.get("clazz") if isinstance(data, dict) else None
    meta = registry.classes.get(clazz) if isinstance(clazz, str) else None
    return DynamicObject.from_wire(data, meta)


def request(engine: Engine, obj: DynamicObject, operation: OperationKind) -> RequestOutcome:
    return engine.request(obj, operation)
