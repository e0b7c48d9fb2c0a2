"""Five-part classification of schema entities for storage strategy choice.

O   objects (IfcObjectDefinition subtree): own documents, refs by key
RL  relationships (IfcRelationship subtree): same strategy as O
P   resource/value entities: embedded sub-documents
G   geometry representations: separate collections, payload in blob store
RLX configured override for entities that function as relational objects
"""

from enum import Enum

from .errors import UnknownTypeError


class EntityClass(Enum):
    O = "O"
    RL = "RL"
    P = "P"
    G = "G"
    RLX = "RLx"


OBJECT_ROOT = "IfcObjectDefinition"
RELATIONSHIP_ROOT = "IfcRelationship"

# Entities whose instances carry heavyweight display payloads. This is
# configuration, not schema fact: the subset pins the list here and callers
# may pass their own.
DEFAULT_GEOMETRY_ROOTS = frozenset({"IfcShapeRepresentation"})

# Default override set; IfcMappedItem reuses representations and behaves
# like a relational object.
DEFAULT_RLX = frozenset({"IfcMappedItem"})


def classify_entity(type_name, schema, rlx_config=DEFAULT_RLX,
                    geometry_roots=DEFAULT_GEOMETRY_ROOTS):
    """Classify one schema entity type; total over declared entities."""
    if type_name not in schema.entities:
        raise UnknownTypeError(f"unknown entity type {type_name!r}")
    if type_name in rlx_config:
        return EntityClass.RLX
    if RELATIONSHIP_ROOT in schema.entities and \
            schema.is_kind_of(type_name, RELATIONSHIP_ROOT):
        return EntityClass.RL
    if OBJECT_ROOT in schema.entities and \
            schema.is_kind_of(type_name, OBJECT_ROOT):
        return EntityClass.O
    for root in geometry_roots:
        if root in schema.entities and schema.is_kind_of(type_name, root):
            return EntityClass.G
    return EntityClass.P


def classification_map(schema, rlx_config=DEFAULT_RLX,
                       geometry_roots=DEFAULT_GEOMETRY_ROOTS):
    """type name -> EntityClass for every declared entity."""
    return {name: classify_entity(name, schema, rlx_config, geometry_roots)
            for name in schema.entities}
