import json
from pathlib import Path

import pytest

from midd import MemoryBackend, SqlBackend, build_registry, ensure_schema, parse_native, parse_xmi

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
DOMAINS = ("car_rental", "rent_of_goods")


def fixture_text(name):
    return (FIXTURES / name).read_text(encoding="utf-8")


def load_registry(domain, fmt="xmi"):
    parse = parse_xmi if fmt == "xmi" else parse_native
    return build_registry(parse(fixture_text(f"{domain}.{'xmi' if fmt == 'xmi' else 'mdl'}")))


def transfer_map():
    return json.loads(fixture_text("domain_transfer.json"))


def substitute_record(record, mapping):
    """Rename classes and members of one script record."""
    payload = {}
    for key, value in record["payload"].items():
        if key == "clazz":
            value = mapping["classes"].get(value, value)
        payload[mapping["members"].get(key, key)] = value
    return {**record, "payload": payload}


def substitute_script(text, mapping):
    lines = [json.loads(raw) for raw in text.splitlines() if raw.strip()]
    return "".join(json.dumps(substitute_record(r, mapping)) + "\n" for r in lines)


@pytest.fixture
def car_registry():
    return load_registry("car_rental")


@pytest.fixture
def goods_registry():
    return load_registry("rent_of_goods")


@pytest.fixture(params=["memory", "sql"])
def backend(request):
    store = MemoryBackend() if request.param == "memory" else SqlBackend()
    yield store
    store.close()


@pytest.fixture
def car_store(car_registry, backend):
    ensure_schema(car_registry, backend)
    return car_registry, backend
