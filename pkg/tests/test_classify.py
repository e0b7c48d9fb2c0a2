import pytest

from askbim.classify import (DEFAULT_RLX, EntityClass, classification_map,
                             classify_entity)
from askbim.errors import UnknownTypeError


def test_object_definition_subtree_is_o(schema):
    assert classify_entity("IfcBeam", schema) is EntityClass.O
    assert classify_entity("IfcProject", schema) is EntityClass.O
    assert classify_entity("IfcTask", schema) is EntityClass.O


def test_relationship_subtree_is_rl(schema):
    assert classify_entity("IfcRelContainedInSpatialStructure", schema) is EntityClass.RL
    assert classify_entity("IfcRelAggregates", schema) is EntityClass.RL


def test_rlx_override(schema):
    assert classify_entity("IfcMappedItem", schema,
                           rlx_config={"IfcMappedItem"}) is EntityClass.RLX
    # without the override it is plain value data
    assert classify_entity("IfcMappedItem", schema, rlx_config=frozenset()) \
        is EntityClass.P
    assert "IfcMappedItem" in DEFAULT_RLX


def test_geometry_subtree_is_g(schema):
    assert classify_entity("IfcShapeRepresentation", schema) is EntityClass.G


def test_resource_layer_is_p(schema):
    for name in ["IfcOwnerHistory", "IfcMaterial", "IfcElementQuantity",
                 "IfcQuantityVolume", "IfcPropertySingleValue", "IfcTaskTime"]:
        assert classify_entity(name, schema) is EntityClass.P


def test_unknown_type_rejected(schema):
    with pytest.raises(UnknownTypeError):
        classify_entity("IfcZorkmid", schema)


def test_classification_is_total_and_partitions(schema):
    classes = classification_map(schema)
    assert set(classes) == set(schema.entities)
    # five classes partition the type set after the RLx override
    by_class = {}
    for name, cls in classes.items():
        by_class.setdefault(cls, set()).add(name)
    total = sum(len(v) for v in by_class.values())
    assert total == len(schema.entities)
    assert by_class[EntityClass.RLX] == set(DEFAULT_RLX)
    assert by_class[EntityClass.O] & by_class[EntityClass.P] == set()


def test_classification_deterministic(schema):
    a = classification_map(schema)
    b = classification_map(schema)
    assert a == b
