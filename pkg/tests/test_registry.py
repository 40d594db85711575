import pytest
from hypothesis import given, strategies as st

from conftest import load_registry
from midd.errors import DanglingAssociation, DuplicateName, ReservedName, UnknownClass
from midd.model_parser import (
    SCALAR_TYPE_NAMES,
    Multiplicity,
    XmiAssociationNode,
    XmiAttributeNode,
    XmiClassNode,
    XmiModelNode,
    parse_native,
)
from midd.registry import (
    AttributeMeta,
    MetadataRegistry,
    ScalarType,
    build_registry,
    get_class_by_name,
    list_classes,
)


def test_car_rental_keys(car_registry):
    assert set(car_registry.classes) == {"Client", "Vehicle", "Office", "Rental"}


def test_empty_model():
    registry = build_registry(XmiModelNode(()))
    assert dict(registry.classes) == {}
    assert list_classes(registry) == []


def test_dangling_association():
    model = parse_native("class Rental { status: Integer; customer -> Customer; }")
    with pytest.raises(DanglingAssociation) as err:
        build_registry(model)
    assert err.value.target == "Customer"


@pytest.mark.parametrize("member", ["clazz: String;", "id: Integer;", "id -> A;"])
def test_reserved_names(member):
    with pytest.raises(ReservedName):
        build_registry(parse_native(f"class A {{ {member} }}"))


def test_role_attribute_collision():
    model = XmiModelNode((XmiClassNode(
        "A", (XmiAttributeNode("b", "String"),),
        (XmiAssociationNode("b", "A", Multiplicity.TO_ONE),),
    ),))
    with pytest.raises(DuplicateName):
        build_registry(model)


def test_vehicle_lookup(car_registry):
    vehicle = get_class_by_name(car_registry, "Vehicle")
    assert vehicle.attributes == (
        AttributeMeta("model", ScalarType.STRING),
        AttributeMeta("plate", ScalarType.STRING),
    )


def test_lookup_is_case_sensitive(car_registry):
    with pytest.raises(UnknownClass):
        get_class_by_name(car_registry, "vehicle")


def test_loan_lookup(goods_registry):
    loan = get_class_by_name(goods_registry, "Loan")
    assert loan.attribute_names == ("status", "expires", "fee")
    assert loan.to_one_roles == ("customer", "resource", "agency")
    assert loan.attribute("fee").value_type is ScalarType.DECIMAL


def test_list_classes(car_registry, goods_registry):
    assert list_classes(car_registry) == ["Client", "Office", "Rental", "Vehicle"]
    assert list_classes(goods_registry) == sorted(["Customer", "Resource", "Agency", "Loan"])


def test_registry_is_immutable(car_registry):
    with pytest.raises(TypeError):
        car_registry.classes["Boat"] = None
    with pytest.raises(AttributeError):
        car_registry._classes = {}
    first = car_registry.get_class_by_name("Rental")
    second = car_registry.get_class_by_name("Rental")
    assert first == second
    with pytest.raises(Exception):
        first.attributes = ()


def test_xmi_and_native_registries_equal():
    for domain in ("car_rental", "rent_of_goods"):
        assert load_registry(domain, "xmi") == load_registry(domain, "native")


names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda n: n not in ("clazz", "id")
)


@st.composite
def models(draw):
    class_names = draw(st.lists(
        st.from_regex(r"[A-Z][A-Za-z0-9]{0,6}", fullmatch=True), max_size=5, unique=True
    ))
    classes = []
    for name in class_names:
        members = draw(st.lists(names, max_size=8, unique=True))
        split = draw(st.integers(0, len(members)))
        attrs = tuple(
            XmiAttributeNode(m, draw(st.sampled_from(SCALAR_TYPE_NAMES))) for m in members[:split]
        )
        roles = tuple(
            XmiAssociationNode(m, draw(st.sampled_from(class_names)),
                               draw(st.sampled_from(list(Multiplicity))))
            for m in members[split:]
        )
        classes.append(XmiClassNode(name, attrs, roles))
    return XmiModelNode(tuple(classes))


@given(models())
def test_faithful_round_trip(model):
    registry = build_registry(model)
    assert list_classes(registry) == sorted(c.name for c in model.classes)
    for node in model.classes:
        meta = registry.get_class_by_name(node.name)
        assert [(a.name, a.value_type.value) for a in meta.attributes] == [
            (a.name, a.type_name) for a in node.attributes
        ]
        assert [(r.role, r.target_class, r.multiplicity) for r in meta.associations] == [
            (r.name, r.target_class, r.multiplicity) for r in node.associations
        ]


def test_registry_equality_is_structural(car_registry):
    assert car_registry == MetadataRegistry(dict(car_registry.classes))
    assert car_registry != MetadataRegistry({})
