import enum


class OperationKind(enum.Enum):
    CREATE = "create"
    READ = "read"
    UPDATE = "update"
    DELETE = "delete"

    @property
    def rule_gated(self):
        return self is not OperationKind.READ
