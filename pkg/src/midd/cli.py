"""Command line front end: ``midd load|create|read|update|delete|script``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Optional

from .control import Engine, RequestOutcome, Status, object_from_wire
from .errors import MiddError
from .model_parser import parse_model
from .operation import OperationKind
from .persistence import ensure_schema, open_backend
from .registry import build_registry
from .rules import load_rules

EXIT_CODES = {
    Status.OK: 0,
    Status.REJECTED: 2,
    Status.INVALID: 3,
    Status.NOT_FOUND: 4,
    Status.FAILED: 5,
}
EXIT_ERROR = 1

FORMAT_BY_SUFFIX = {".xmi": "xmi", ".mdl": "native"}


@dataclass
class EngineConfig:
    model_path: Path
    model_format: Optional[str] = None
    rules_path: Optional[Path] = None
    backend: str = "memory"
    store_path: Optional[Path] = None

    @property
    def resolved_format(self):
        if self.model_format:
            return self.model_format
        suffix = Path(self.model_path).suffix.lower()
        if suffix not in FORMAT_BY_SUFFIX:
            raise MiddError(f"cannot infer model format from {suffix!r}; pass --format")
        return FORMAT_BY_SUFFIX[suffix]


class LoadError(MiddError):
    def __init__(self, path, cause):
        self.path = path
        self.cause = cause
        super().__init__(f"{path}: {type(cause).__name__}: {cause}")


def load_engine(config: EngineConfig) -> Engine:
    """Parse the model, build the registry, load rules and ensure the schema."""
    path = Path(config.model_path)
    try:
        text = path.read_text(encoding="utf-8")
        registry = build_registry(parse_model(text, config.resolved_format))
    except (OSError, MiddError) as exc:
        raise LoadError(path, exc) from exc
    rules = ()
    if config.rules_path:
        try:
            rules = tuple(load_rules(Path(config.rules_path).read_text(encoding="utf-8"), registry))
        except (OSError, MiddError) as exc:
            raise LoadError(config.rules_path, exc) from exc
    store = str(config.store_path) if config.store_path else None
    backend = open_backend(config.backend, store)
    ensure_schema(registry, backend)
    return Engine(registry, backend, rules)


def cmd_load(config: EngineConfig, out=None):
    out = out or sys.stdout
    engine = load_engine(config)
    tables = sum(engine.backend.has_table(name) for name in engine.registry.list_classes())
    print(f"{len(engine.registry)} classes, {tables} tables", file=out)
    return engine


def dumps(document) -> str:
    return json.dumps(document, ensure_ascii=False, sort_keys=False)


def parse_payload(text: str) -> dict:
    data = json.loads(text, parse_float=Decimal)
    if not isinstance(data, dict) or not isinstance(data.get("clazz"), str):
        raise ValueError('payload must be a flat JSON object with a string "clazz" member')
    return data


def cmd_request(engine: Engine, operation, payload_text: str, out=None) -> int:
    out = out or sys.stdout
    operation = OperationKind(operation)
    try:
        obj = object_from_wire(engine.registry, parse_payload(payload_text))
    except ValueError as exc:
        outcome = RequestOutcome(Status.INVALID, detail=f"malformed payload: {exc}")
    else:
        outcome = engine.request(obj, operation)
    print(dumps(outcome.to_wire()), file=out)
    return EXIT_CODES[outcome.status]


# --------------------------------------------------------------------------
# scripts


@dataclass(frozen=True)
class ScriptLine:
    number: int
    operation: OperationKind
    payload: dict
    expect: Optional[dict] = None


class ScriptError(MiddError):
    pass


def parse_script(text: str) -> list:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw, parse_float=Decimal)
            operation = OperationKind(record["op"])
            payload = record["payload"]
            if not isinstance(payload, dict) or not isinstance(payload.get("clazz"), str):
                raise ValueError('"payload" must be an object with a "clazz" member')
            expect = record.get("expect")
            if expect is not None:
                if not isinstance(expect, dict) or set(expect) - {"status", "count"}:
                    raise ValueError('"expect" may only hold "status" and "count"')
                if "status" in expect:
                    Status(expect["status"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ScriptError(f"script line {number}: {exc}") from None
        lines.append(ScriptLine(number, operation, payload, expect))
    return lines


@dataclass(frozen=True)
class LineResult:
    line: ScriptLine
    outcome: RequestOutcome
    passed: bool
    reason: str = ""


def run_script(engine: Engine, lines) -> list:
    results = []
    for line in lines:
        outcome = engine.request(object_from_wire(engine.registry, line.payload), line.operation)
        expect = line.expect or {}
        reasons = []
        if "status" in expect and expect["status"] != outcome.status.value:
            reasons.append(f"expected {expect['status']}, got {outcome.status.value}")
        if "count" in expect and expect["count"] != len(outcome.objects):
            reasons.append(f"expected {expect['count']} objects, got {len(outcome.objects)}")
        results.append(LineResult(line, outcome, not reasons, "; ".join(reasons)))
    return results


def cmd_script(engine: Engine, script_path, out=None) -> int:
    out = out or sys.stdout
    lines = parse_script(Path(script_path).read_text(encoding="utf-8"))
    results = run_script(engine, lines)
    for r in results:
        mark = "ok" if r.passed else "FAIL"
        summary = f"{r.outcome.status.value}, {len(r.outcome.objects)} object(s)"
        tail = f" ({r.reason})" if r.reason else ""
        print(f"{mark} line {r.line.number}: {r.line.operation.value} "
              f"{r.line.payload['clazz']} -> {summary}{tail}", file=out)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} passed", file=out)
    return 0 if passed == len(results) else EXIT_ERROR


# --------------------------------------------------------------------------
# argument handling


def _engine_options(parser):
    parser.add_argument("--model", default=os.environ.get("MIDD_MODEL"),
                        help="model document (.xmi or .mdl); defaults to $MIDD_MODEL")
    parser.add_argument("--format", choices=("xmi", "native"), dest="model_format")
    parser.add_argument("--rules", help="business rules document")
    parser.add_argument("--backend", choices=("memory", "sql"), default="memory")
    parser.add_argument("--store", help="SQLite file for the sql backend")


def build_parser():
    parser = argparse.ArgumentParser(prog="midd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _engine_options(sub.add_parser("load", help="load a model and report its schema"))
    for op in ("create", "read", "update", "delete"):
        p = sub.add_parser(op, help=f"{op} request with a JSON payload")
        _engine_options(p)
        p.add_argument("payload", help='flat JSON object, e.g. \'{"clazz": "X", ...}\'')
    p = sub.add_parser("script", help="run a JSON-lines request script")
    _engine_options(p)
    p.add_argument("script")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not args.model:
        print("error: --model is required (or set MIDD_MODEL)", file=sys.stderr)
        return EXIT_ERROR
    config = EngineConfig(
        Path(args.model), args.model_format,
        Path(args.rules) if args.rules else None,
        args.backend,
        Path(args.store) if args.store else None,
    )
    try:
        if args.command == "load":
            cmd_load(config)
            return 0
        engine = load_engine(config)
        if args.command == "script":
            return cmd_script(engine, args.script)
        return cmd_request(engine, args.command, args.payload)
    except (MiddError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
