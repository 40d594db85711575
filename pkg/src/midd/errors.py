"""Exception hierarchy shared by every engine module."""


class MiddError(Exception):
    """Base class for all engine errors."""


class MalformedDocument(MiddError):
    pass


class UnsupportedConstruct(MiddError):
    def __init__(self, element, location=None):
        self.element = element
        self.location = location
        where = f" at {location}" if location else ""
        super().__init__(f"unsupported construct {element!r}{where}")


class DuplicateName(MiddError):
    def __init__(self, name, scope="model"):
        self.name = name
        super().__init__(f"duplicate name {name!r} in {scope}")


class ModelSyntaxError(MiddError):
    """Syntax error in a line-oriented document, with 1-based position."""

    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class UnknownType(MiddError):
    def __init__(self, type_name, location=None):
        self.type_name = type_name
        where = f" at {location}" if location else ""
        super().__init__(f"unknown type {type_name!r}{where}")


class DanglingAssociation(MiddError):
    def __init__(self, target):
        self.target = target
        super().__init__(f"association targets undeclared class {target!r}")


class ReservedName(MiddError):
    def __init__(self, name, owner):
        self.name = name
        super().__init__(f"{name!r} is reserved and cannot be declared on {owner!r}")


class UnknownClass(MiddError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown class {name!r}")


class UnknownAttribute(MiddError):
    def __init__(self, name, owner):
        self.name = name
        super().__init__(f"class {owner!r} has no attribute {name!r}")


class UnknownRole(MiddError):
    def __init__(self, name, owner):
        self.name = name
        super().__init__(f"class {owner!r} has no single-valued role {name!r}")


class Uncoercible(MiddError):
    def __init__(self, value, target):
        self.value = value
        self.target = target
        super().__init__(f"cannot coerce {value!r} to {target}")


class TypeMismatch(MiddError):
    def __init__(self, key, message=""):
        self.key = key
        super().__init__(f"type mismatch on {key!r}" + (f": {message}" if message else ""))


class ValidationFailed(MiddError):
    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(issue.message for issue in report.issues))


class MissingId(MiddError):
    def __init__(self, clazz):
        super().__init__(f"{clazz} object carries no id")


class IdAlreadySet(MiddError):
    def __init__(self, clazz, id_):
        super().__init__(f"{clazz} object already has id {id_}; use update")


class NotFound(MiddError):
    def __init__(self, clazz, id_):
        self.clazz = clazz
        self.id = id_
        super().__init__(f"no {clazz} with id {id_}")


class BackendFailure(MiddError):
    pass
