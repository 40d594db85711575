"""Immutable internal representation of a domain model.

The registry is built once at startup from parsed model nodes and is then
shared, read-only, by every interpreter.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .errors import DanglingAssociation, DuplicateName, ReservedName, UnknownClass
from .model_parser import Multiplicity, XmiModelNode

RESERVED_NAMES = frozenset({"clazz", "id"})


class ScalarType(enum.Enum):
    STRING = "String"
    INTEGER = "Integer"
    DECIMAL = "Decimal"
    BOOLEAN = "Boolean"
    DATE = "Date"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class AttributeMeta:
    name: str
    value_type: ScalarType


@dataclass(frozen=True)
class AssociationMeta:
    role: str
    target_class: str
    multiplicity: Multiplicity

    @property
    def is_to_one(self):
        return self.multiplicity is Multiplicity.TO_ONE


@dataclass(frozen=True)
class ClassMeta:
    name: str
    attributes: tuple[AttributeMeta, ...] = ()
    associations: tuple[AssociationMeta, ...] = ()

    def attribute(self, name):
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None

    def association(self, role):
        for assoc in self.associations:
            if assoc.role == role:
                return assoc
        return None

    @property
    def attribute_names(self):
        return tuple(a.name for a in self.attributes)

    @property
    def to_one(self):
        """Single-valued roles; each is stored as a column holding the target id."""
        return tuple(a for a in self.associations if a.is_to_one)

    @property
    def to_one_roles(self):
        return tuple(a.role for a in self.to_one)

    @property
    def columns(self):
        return ("id",) + self.attribute_names + self.to_one_roles


class MetadataRegistry:
    """Name to :class:`ClassMeta` map; case-sensitive and read-only."""

    __slots__ = ("_classes",)

    def __init__(self, classes: Mapping[str, ClassMeta]):
        object.__setattr__(self, "_classes", MappingProxyType(dict(classes)))

    def __setattr__(self, name, value):
        raise AttributeError("MetadataRegistry is immutable")

    @property
    def classes(self) -> Mapping[str, ClassMeta]:
        return self._classes

    def __contains__(self, name):
        return name in self._classes

    def __len__(self):
        return len(self._classes)

    def __eq__(self, other):
        if not isinstance(other, MetadataRegistry):
            return NotImplemented
        return dict(self._classes) == dict(other._classes)

    def __repr__(self):
        return f"MetadataRegistry({list_classes(self)!r})"

    def get_class_by_name(self, name) -> ClassMeta:
        try:
            return self._classes[name]
        except (KeyError, TypeError):
            raise UnknownClass(name) from None

    def list_classes(self):
        return sorted(self._classes)


def _convert(node) -> ClassMeta:
    seen = set()
    for name in [a.name for a in node.attributes] + [r.name for r in node.associations]:
        if name in RESERVED_NAMES:
            raise ReservedName(name, node.name)
        if name in seen:
            raise DuplicateName(name, f"class {node.name!r}")
        seen.add(name)
    return ClassMeta(
        node.name,
        tuple(AttributeMeta(a.name, ScalarType(a.type_name)) for a in node.attributes),
        tuple(AssociationMeta(r.name, r.target_class, r.multiplicity) for r in node.associations),
    )


def build_registry(model: XmiModelNode) -> MetadataRegistry:
    classes = {}
    for node in model.classes:
        if node.name in classes:
            raise DuplicateName(node.name)
        classes[node.name] = _convert(node)
    for meta in classes.values():
        for assoc in meta.associations:
            if assoc.target_class not in classes:
                raise DanglingAssociation(assoc.target_class)
    return MetadataRegistry(classes)


def get_class_by_name(registry: MetadataRegistry, name) -> ClassMeta:
    return registry.get_class_by_name(name)


def list_classes(registry: MetadataRegistry):
    return registry.list_classes()
