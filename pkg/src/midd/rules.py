"""Declarative business rules bound to (class, operation).

One rule per line::

    rule <name> on <Class> for <op>[,<op>]*: <expr>

    expr ::= attr <a> not-null
           | attr <a> equals <literal>
           | ref <role> attr <a> not-null
           | ref <role> attr <a> equals <literal>
           | all(<expr>; ...) | any(<expr>; ...) | not(<expr>)

``op`` is one of insert, update, delete. Literals are bare tokens or
double-quoted JSON strings and are coerced to the attribute type at load.
Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .dynamic_object import DynamicObject, coerce
from .errors import (
    DuplicateName,
    ModelSyntaxError,
    Uncoercible,
    UnknownAttribute,
    UnknownRole,
)
from .operation import OperationKind
from .persistence import fetch
from .registry import ClassMeta, MetadataRegistry

RULE_OPERATIONS = {
    "insert": OperationKind.CREATE,
    "update": OperationKind.UPDATE,
    "delete": OperationKind.DELETE,
}


@dataclass(frozen=True)
class NotNull:
    attribute: str


@dataclass(frozen=True)
class Equals:
    attribute: str
    literal: object


@dataclass(frozen=True)
class RefAttrNotNull:
    role: str
    attribute: str


@dataclass(frozen=True)
class RefAttrEquals:
    role: str
    attribute: str
    literal: object


@dataclass(frozen=True)
class AllOf:
    items: tuple


@dataclass(frozen=True)
class AnyOf:
    items: tuple


@dataclass(frozen=True)
class Not:
    expr: object


@dataclass(frozen=True)
class RuleDef:
    name: str
    class_name: str
    operations: frozenset
    constraint: object


@dataclass(frozen=True)
class RuleVerdict:
    failed_rules: tuple = ()

    @property
    def allowed(self):
        return not self.failed_rules

    def to_wire(self):
        return {"allowed": self.allowed, "failed_rules": list(self.failed_rules)}


class DanglingReference(Exception):
    """A role holds an id that resolves to no stored object."""

    def __init__(self, role, target, id_):
        self.role = role
        super().__init__(f"{role} -> {target} #{id_} does not exist")


# --------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<punct>[();,:])
  | (?P<word>[^\s();,:"]+)
    """,
    re.VERBOSE,
)

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*\Z")


class _LineParser:
    def __init__(self, text, line_no):
        self.line_no = line_no
        self.tokens = []
        pos = 0
        while pos < len(text):
            match = _TOKEN_RE.match(text, pos)
            if match is None:
                raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line_no, pos + 1)
            if match.lastgroup != "ws":
                self.tokens.append((match.lastgroup, match.group(), pos + 1))
            pos = match.end()
        self.tokens.append(("eof", "", len(text) + 1))
        self.index = 0

    def error(self, message, tok=None):
        tok = tok or self.tokens[self.index]
        return ModelSyntaxError(message, self.line_no, tok[2])

    def peek(self):
        return self.tokens[self.index]

    def take(self, value=None, kind=None):
        tok = self.tokens[self.index]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            found = repr(tok[1]) if tok[0] != "eof" else "end of line"
            raise self.error(f"expected {value or kind!r}, found {found}")
        self.index += 1
        return tok

    def name(self, what):
        tok = self.take(kind="word")
        if not _NAME_RE.match(tok[1]):
            raise self.error(f"invalid {what} {tok[1]!r}", tok)
        return tok[1]

    def literal(self):
        tok = self.peek()
        if tok[0] == "string":
            self.index += 1
            return json.loads(tok[1]), tok
        if tok[0] == "word":
            self.index += 1
            return tok[1], tok
        raise self.error("expected a literal")


class _RuleReader:
    def __init__(self, registry: MetadataRegistry):
        self.registry = registry

    def rule(self, p: _LineParser) -> RuleDef:
        p.take("rule")
        name = p.name("rule name")
        p.take("on")
        class_name = p.name("class name")
        meta = self.registry.get_class_by_name(class_name)
        p.take("for")
        ops = set()
        while True:
            tok = p.take(kind="word")
            if tok[1] not in RULE_OPERATIONS:
                raise p.error(f"unknown operation {tok[1]!r}", tok)
            ops.add(RULE_OPERATIONS[tok[1]])
            if p.peek()[1] != ",":
                break
            p.take(",")
        p.take(":")
        expr = self.expr(p, meta)
        p.take(kind="eof")
        return RuleDef(name, class_name, frozenset(ops), expr)

    def expr(self, p: _LineParser, meta: ClassMeta):
        tok = p.take(kind="word")
        word = tok[1]
        if word in ("all", "any"):
            p.take("(")
            items = [self.expr(p, meta)]
            while p.peek()[1] == ";":
                p.take(";")
                items.append(self.expr(p, meta))
            p.take(")")
            return (AllOf if word == "all" else AnyOf)(tuple(items))
        if word == "not":
            p.take("(")
            inner = self.expr(p, meta)
            p.take(")")
            return Not(inner)
        if word == "attr":
            attr = self._attribute(p, meta)
            return self._test(p, attr, NotNull, Equals)
        if word == "ref":
            role = p.name("role")
            assoc = meta.association(role)
            if assoc is None or not assoc.is_to_one:
                raise UnknownRole(role, meta.name)
            target = self.registry.get_class_by_name(assoc.target_class)
            p.take("attr")
            attr = self._attribute(p, target)
            return self._test(
                p, attr,
                lambda a: RefAttrNotNull(role, a),
                lambda a, lit: RefAttrEquals(role, a, lit),
            )
        raise p.error(f"unknown expression {word!r}", tok)

    @staticmethod
    def _attribute(p, meta):
        name = p.name("attribute")
        attr = meta.attribute(name)
        if attr is None:
            raise UnknownAttribute(name, meta.name)
        return attr

    @staticmethod
    def _test(p, attr, not_null, equals):
        tok = p.take(kind="word")
        if tok[1] == "not-null":
            return not_null(attr.name)
        if tok[1] == "equals":
            text, lit_tok = p.literal()
            try:
                value = coerce(text, attr.value_type)
            except Uncoercible:
                raise p.error(f"{text!r} is not a valid {attr.value_type}", lit_tok) from None
            return equals(attr.name, value)
        raise p.error(f"expected 'not-null' or 'equals', found {tok[1]!r}", tok)


def load_rules(document_text: str, registry: MetadataRegistry) -> list:
    reader = _RuleReader(registry)
    rules = []
    names = set()
    for line_no, line in enumerate(document_text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rule = reader.rule(_LineParser(line, line_no))
        if rule.name in names:
            raise DuplicateName(rule.name, "rules")
        names.add(rule.name)
        rules.append(rule)
    return rules


# --------------------------------------------------------------------------
# evaluation


def evaluate(expr, obj: DynamicObject, resolve) -> bool:
    """Truth of ``expr`` on ``obj``; ``resolve(role)`` yields the target object.

    A Null value (or a Null reference) makes every leaf test false.
    """
    if isinstance(expr, NotNull):
        return obj.values.get(expr.attribute) is not None
    if isinstance(expr, Equals):
        value = obj.values.get(expr.attribute)
        return value is not None and value == expr.literal
    if isinstance(expr, (RefAttrNotNull, RefAttrEquals)):
        target = resolve(expr.role)
        if target is None:
            return False
        value = target.values.get(expr.attribute)
        if isinstance(expr, RefAttrNotNull):
            return value is not None
        return value is not None and value == expr.literal
    if isinstance(expr, AllOf):
        return all([evaluate(e, obj, resolve) for e in expr.items])
    if isinstance(expr, AnyOf):
        return any([evaluate(e, obj, resolve) for e in expr.items])
    if isinstance(expr, Not):
        return not evaluate(expr.expr, obj, resolve)
    raise TypeError(f"not a constraint expression: {expr!r}")


def check_constraints(rules, obj: DynamicObject, operation: OperationKind,
                      registry: MetadataRegistry, backend) -> RuleVerdict:
    """Evaluate every rule bound to ``(obj.clazz, operation)``.

    All bound rules are evaluated; a dangling reference fails its rule.
    """
    meta = registry.get_class_by_name(obj.clazz)
    cache = {}

    def resolve(role):
        if role not in cache:
            id_ = obj.refs.get(role)
            if id_ is None:
                cache[role] = None
            else:
                target = meta.association(role).target_class
                found = fetch(registry, backend, target, id_)
                if found is None:
                    raise DanglingReference(role, target, id_)
                cache[role] = found
        return cache[role]

    failed = []
    for rule in rules:
        if rule.class_name != obj.clazz or operation not in rule.operations:
            continue
        try:
            ok = evaluate(rule.constraint, obj, resolve)
        except DanglingReference:
            ok = False
        if not ok:
            failed.append(rule.name)
    return RuleVerdict(tuple(failed))
