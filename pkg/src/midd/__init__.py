"""Domain-agnostic CRUD engine driven by a class model loaded at startup."""

from .cli import EngineConfig, load_engine
from .control import Engine, RequestOutcome, Status, object_from_wire, request
from .dynamic_object import (
    DynamicObject,
    ValidationReport,
    coerce,
    validate_for_filter,
    validate_for_write,
)
from .model_parser import Multiplicity, parse_model, parse_native, parse_xmi
from .operation import OperationKind
from .persistence import MemoryBackend, SqlBackend, ensure_schema, render_sql
from .registry import (
    ClassMeta,
    MetadataRegistry,
    ScalarType,
    build_registry,
    get_class_by_name,
    list_classes,
)
from .rules import RuleVerdict, check_constraints, load_rules

__all__ = [
    "ClassMeta", "DynamicObject", "Engine", "EngineConfig", "MemoryBackend",
    "MetadataRegistry", "Multiplicity", "OperationKind", "RequestOutcome",
    "RuleVerdict", "ScalarType", "SqlBackend", "Status", "ValidationReport",
    "build_registry", "check_constraints", "coerce", "ensure_schema",
    "get_class_by_name", "list_classes", "load_engine", "load_rules",
    "object_from_wire", "parse_model", "parse_native", "parse_xmi",
    "render_sql", "request", "validate_for_filter", "validate_for_write",
]
