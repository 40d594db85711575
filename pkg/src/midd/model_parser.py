"""Parsers turning model documents into neutral description nodes.

Two input notations are accepted and produce equal nodes for equal content:

* a closed subset of XMI 2.x (UML class diagrams as exported by modelling
  tools), read with :func:`parse_xmi`;
* a small line-oriented text notation, read with :func:`parse_native`::

      # comment
      class Order {
          number: Integer;
          placed: Date;
          buyer -> Party;
          lines ->* OrderLine;
      }
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from xml.parsers import expat

from .errors import (
    DuplicateName,
    MalformedDocument,
    ModelSyntaxError,
    UnknownType,
    UnsupportedConstruct,
)

SCALAR_TYPE_NAMES = ("String", "Integer", "Decimal", "Boolean", "Date")

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class Multiplicity(enum.Enum):
    TO_ONE = "ToOne"
    TO_MANY = "ToMany"


@dataclass(frozen=True)
class XmiAttributeNode:
    name: str
    type_name: str


@dataclass(frozen=True)
class XmiAssociationNode:
    name: str
    target_class: str
    multiplicity: Multiplicity


@dataclass(frozen=True)
class XmiClassNode:
    name: str
    attributes: tuple[XmiAttributeNode, ...] = ()
    associations: tuple[XmiAssociationNode, ...] = ()


@dataclass(frozen=True)
class XmiModelNode:
    classes: tuple[XmiClassNode, ...] = ()


def _check_unique(classes):
    seen = set()
    for node in classes:
        if node.name in seen:
            raise DuplicateName(node.name)
        seen.add(node.name)
        members = set()
        for member in [a.name for a in node.attributes] + [r.name for r in node.associations]:
            if member in members:
                raise DuplicateName(member, f"class {node.name!r}")
            members.add(member)


# --------------------------------------------------------------------------
# XMI subset

XMI_TYPE = "type"  # local name of the xmi:type attribute
XMI_ID = "id"


@dataclass
class _Elem:
    ns: str
    tag: str
    attrs: dict
    line: int
    column: int
    children: list = field(default_factory=list)

    @property
    def location(self):
        return f"{self.line}:{self.column}"

    def get(self, local, xmi=False):
        """Attribute lookup by local name; ``xmi=True`` selects the XMI namespace."""
        for key, value in self.attrs.items():
            ns, _, name = key.rpartition(" ")
            if name != local:
                continue
            if xmi == _is_xmi_ns(ns):
                return value
        return None

    @property
    def xmi_type(self):
        return self.get(XMI_TYPE, xmi=True)

    @property
    def xmi_id(self):
        return self.get(XMI_ID, xmi=True)


def _is_xmi_ns(uri):
    return "XMI" in uri.upper()


def _is_uml_ns(uri):
    return "UML" in uri.upper()


def _build_tree(text):
    parser = expat.ParserCreate("UTF-8", namespace_separator=" ")
    stack: list[_Elem] = []
    root: list[_Elem] = []

    def start(name, attrs):
        ns, _, tag = name.rpartition(" ")
        elem = _Elem(ns, tag, attrs, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(elem)
        else:
            root.append(elem)
        stack.append(elem)

    def end(name):
        stack.pop()

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        parser.Parse(text.encode("utf-8") if isinstance(text, str) else text, True)
    except expat.ExpatError as exc:
        raise MalformedDocument(f"not well-formed XML: {exc}") from None
    if not root:
        raise MalformedDocument("document has no root element")
    return root[0]


def _unsupported(elem):
    kind = elem.xmi_type
    label = f"{elem.tag}[{kind}]" if kind else elem.tag
    return UnsupportedConstruct(label, elem.location)


def _upper(end):
    """Multiplicity from an ``upperValue`` child; a missing bound means 1."""
    value = "1"
    for child in end.children:
        if child.tag == "upperValue":
            value = child.get("value") or "1"
        elif child.tag in ("lowerValue", "type"):
            continue
        else:
            raise _unsupported(child)
    if value == "1":
        return Multiplicity.TO_ONE
    if value in ("*", "-1"):
        return Multiplicity.TO_MANY
    raise UnsupportedConstruct(f"upperValue={value}", end.location)


def _type_ref(elem):
    ref = elem.get("type")
    if ref:
        return ref
    for child in elem.children:
        if child.tag == "type":
            href = child.get("href") or child.get("idref", xmi=True) or ""
            return href.rpartition("#")[2] or None
    return None


class _XmiReader:
    def __init__(self, root):
        self.root = root
        self.classes: list[_Elem] = []
        self.associations: list[_Elem] = []
        self.primitives: dict[str, str] = {}
        self.class_ids: dict[str, str] = {}
        self.attr_ids: dict[str, tuple[_Elem, _Elem]] = {}

    def read(self):
        root = self.root
        if root.tag == "XMI" and _is_xmi_ns(root.ns):
            models = []
            for child in root.children:
                if child.tag == "Model" and _is_uml_ns(child.ns):
                    models.append(child)
                elif child.tag == "Documentation" and _is_xmi_ns(child.ns):
                    continue
                else:
                    raise _unsupported(child)
        elif root.tag == "Model" and _is_uml_ns(root.ns):
            models = [root]
        else:
            raise UnsupportedConstruct(root.tag, root.location)
        for model in models:
            self._collect(model)
        for cls in self.classes:
            for attr in cls.children:
                if attr.xmi_id:
                    self.attr_ids[attr.xmi_id] = (cls, attr)
        return self._convert()

    def _collect(self, container):
        for elem in container.children:
            if elem.tag != "packagedElement":
                raise _unsupported(elem)
            kind = elem.xmi_type
            if kind == "uml:Class":
                name = elem.get("name")
                if not name or not NAME_RE.match(name):
                    raise UnsupportedConstruct(f"class name {name!r}", elem.location)
                if any(c.get("name") == name for c in self.classes):
                    raise DuplicateName(name)
                self.classes.append(elem)
                self.class_ids[elem.xmi_id or name] = name
            elif kind == "uml:Association":
                self.associations.append(elem)
            elif kind in ("uml:PrimitiveType", "uml:DataType"):
                name = elem.get("name")
                if name not in SCALAR_TYPE_NAMES:
                    raise UnsupportedConstruct(f"{kind} {name!r}", elem.location)
                self.primitives[elem.xmi_id or name] = name
            elif kind == "uml:Package":
                self._collect(elem)
            else:
                raise _unsupported(elem)

    def _resolve(self, ref):
        """Return ("scalar", name), ("class", name) or None for a type reference."""
        if ref is None:
            return None
        if ref in self.primitives:
            return "scalar", self.primitives[ref]
        if ref in self.class_ids:
            return "class", self.class_ids[ref]
        if ref in SCALAR_TYPE_NAMES:
            return "scalar", ref
        if ref in self.class_ids.values():
            return "class", ref
        return None

    def _convert(self):
        attributes = {cls.get("name"): [] for cls in self.classes}
        roles = {cls.get("name"): [] for cls in self.classes}
        for cls in self.classes:
            owner = cls.get("name")
            for child in cls.children:
                if child.tag != "ownedAttribute":
                    raise _unsupported(child)
                name = child.get("name")
                if not name or not NAME_RE.match(name):
                    raise UnsupportedConstruct(f"attribute name {name!r}", child.location)
                resolved = self._resolve(_type_ref(child))
                if resolved is None:
                    raise UnsupportedConstruct(
                        f"ownedAttribute {name!r} type {_type_ref(child)!r}", child.location
                    )
                kind, target = resolved
                if kind == "scalar":
                    for sub in child.children:
                        if sub.tag not in ("type", "lowerValue", "upperValue"):
                            raise _unsupported(sub)
                        if sub.tag == "upperValue" and (sub.get("value") or "1") != "1":
                            raise UnsupportedConstruct(
                                f"multi-valued attribute {name!r}", sub.location
                            )
                    attributes[owner].append(XmiAttributeNode(name, target))
                else:
                    roles[owner].append(XmiAssociationNode(name, target, _upper(child)))
        for assoc in self.associations:
            self._association(assoc, roles)
        nodes = tuple(
            XmiClassNode(
                cls.get("name"),
                tuple(attributes[cls.get("name")]),
                tuple(roles[cls.get("name")]),
            )
            for cls in self.classes
        )
        _check_unique(nodes)
        return XmiModelNode(nodes)

    def _association(self, assoc, roles):
        owned = []
        for child in assoc.children:
            if child.tag == "ownedEnd":
                owned.append(child)
            elif child.tag == "memberEnd":
                continue
            else:
                raise _unsupported(child)
        ends = []
        member_ids = (assoc.get("memberEnd") or "").split()
        member_ids += [
            c.get("idref", xmi=True) for c in assoc.children if c.tag == "memberEnd"
        ]
        owned_ids = {e.xmi_id for e in owned if e.xmi_id}
        ends.extend(owned)
        for ref in member_ids:
            if ref and ref not in owned_ids:
                if ref not in self.attr_ids:
                    raise UnsupportedConstruct(f"memberEnd {ref!r}", assoc.location)
                ends.append(self.attr_ids[ref][1])
        if len(ends) != 2:
            raise UnsupportedConstruct(
                f"association with {len(ends)} ends", assoc.location
            )
        end_types = []
        for end in ends:
            resolved = self._resolve(_type_ref(end))
            if resolved is None or resolved[0] != "class":
                raise UnsupportedConstruct(
                    f"association end type {_type_ref(end)!r}", end.location
                )
            end_types.append(resolved[1])
        # An end owned by the association is a role of the class at the opposite end.
        for index, end in enumerate(ends):
            if not any(end is o for o in owned):
                continue
            name = end.get("name")
            if not name:
                continue  # not navigable
            if not NAME_RE.match(name):
                raise UnsupportedConstruct(f"role name {name!r}", end.location)
            owner = end_types[1 - index]
            roles[owner].append(XmiAssociationNode(name, end_types[index], _upper(end)))


def parse_xmi(document_text) -> XmiModelNode:
    """Parse an XMI document into an :class:`XmiModelNode`.

    Unknown XML attributes are ignored; unknown elements raise
    :class:`UnsupportedConstruct` with their ``line:column``.
    """
    return _XmiReader(_build_tree(document_text)).read()


# --------------------------------------------------------------------------
# native notation

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->\*?)
  | (?P<punct>[{}:;])
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


def _tokenize(text):
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ModelSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = match.lastgroup
        if kind == "nl":
            line += 1
            line_start = match.end()
        elif kind not in ("ws", "comment"):
            yield kind, match.group(), line, pos - line_start + 1
        pos = match.end()
    yield "eof", "", line, pos - line_start + 1


class _NativeParser:
    def __init__(self, text):
        self.tokens = list(_tokenize(text))
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def take(self, kind, value=None):
        tok = self.tokens[self.index]
        if tok[0] != kind or (value is not None and tok[1] != value):
            wanted = repr(value) if value else kind
            found = repr(tok[1]) if tok[0] != "eof" else "end of document"
            raise ModelSyntaxError(f"expected {wanted}, found {found}", tok[2], tok[3])
        self.index += 1
        return tok

    def parse(self):
        classes = []
        while self.peek()[0] != "eof":
            classes.append(self.parse_class())
        _check_unique(classes)
        return XmiModelNode(tuple(classes))

    def parse_class(self):
        self.take("name", "class")
        name = self.take("name")[1]
        self.take("punct", "{")
        attributes, roles = [], []
        while self.peek()[1] != "}":
            member = self.take("name")
            tok = self.peek()
            if tok[1] == ":":
                self.take("punct", ":")
                type_tok = self.take("name")
                if type_tok[1] not in SCALAR_TYPE_NAMES:
                    raise UnknownType(type_tok[1], f"line {type_tok[2]}, column {type_tok[3]}")
                attributes.append(XmiAttributeNode(member[1], type_tok[1]))
            elif tok[0] == "arrow":
                self.index += 1
                target = self.take("name")[1]
                multiplicity = Multiplicity.TO_MANY if tok[1] == "->*" else Multiplicity.TO_ONE
                roles.append(XmiAssociationNode(member[1], target, multiplicity))
            else:
                raise ModelSyntaxError(
                    f"expected ':' or '->' after {member[1]!r}", tok[2], tok[3]
                )
            self.take("punct", ";")
        self.take("punct", "}")
        return XmiClassNode(name, tuple(attributes), tuple(roles))


def parse_native(document_text) -> XmiModelNode:
    return _NativeParser(document_text).parse()


def parse_model(document_text, model_format) -> XmiModelNode:
    if model_format == "xmi":
        return parse_xmi(document_text)
    if model_format == "native":
        return parse_native(document_text)
    raise ValueError(f"unknown model format {model_format!r}")
