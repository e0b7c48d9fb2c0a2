import json

import pytest
from hypothesis import given, settings, strategies as st

from askbim.dictionary import Binding, Concept, Dictionary, stable_guid
from askbim.errors import BindingError, ConceptNotFoundError, DictionaryError


def concept(name, kind="subject", ctype=None, relations=(), binding=None,
            aliases=()):
    rels = [list(r) for r in relations] + [["alias_as", a] for a in aliases]
    return {"guid": stable_guid(name), "kind": kind,
            "characteristic_type": ctype, "preferred_name": name,
            "relations": rels, "ifc_binding": binding}


def load(records, rules=None):
    concepts = [Dictionary._concept_from_json(r) for r in records]
    return Dictionary(concepts, rules)


# --- loading and validation ---------------------------------------------------

def test_seed_loads_and_indexes(dictionary):
    assert len(dictionary) >= 90
    a = dictionary.resolve_concept("beam")
    b = dictionary.resolve_concept("girder")
    assert a.guid == b.guid
    assert a.ifc_binding.entity == "IfcBeam"


def test_duplicate_guid_rejected():
    rec = concept("beam")
    with pytest.raises(DictionaryError) as err:
        load([rec, dict(rec, preferred_name="other")])
    assert "duplicate guid" in str(err.value)


def test_dangling_relation_rejected():
    rec = concept("beam", relations=[("specializes", stable_guid("ghost"))])
    with pytest.raises(DictionaryError) as err:
        load([rec])
    assert "dangling" in str(err.value)


def test_same_to_asymmetry_rejected():
    a = concept("girder", relations=[("same_to", stable_guid("beam"))])
    b = concept("beam")
    with pytest.raises(DictionaryError) as err:
        load([a, b])
    assert "asymmetry" in str(err.value)


def test_specializes_cycle_rejected():
    a = concept("a", relations=[("specializes", stable_guid("b"))])
    b = concept("b", relations=[("specializes", stable_guid("a"))])
    with pytest.raises(DictionaryError) as err:
        load([a, b])
    message = str(err.value)
    assert "cycle" in message and "a" in message and "b" in message


def test_empty_dictionary_valid():
    d = load([])
    assert len(d) == 0
    assert d.normalize("anything") == "anything"


def test_malformed_guid_rejected():
    rec = concept("beam")
    rec["guid"] = "short"
    with pytest.raises(DictionaryError):
        load([rec])


# --- normalize ------------------------------------------------------------------

def test_normalize_plural(dictionary):
    assert dictionary.normalize("beams") == "beam"


def test_normalize_fixpoint(dictionary):
    assert dictionary.normalize("beam") == "beam"


def test_normalize_unknown_passthrough(dictionary):
    assert dictionary.normalize("zorkmid") == "zorkmid"


def test_normalize_idempotent_over_all_forms(dictionary):
    for form in dictionary.name_forms():
        once = dictionary.normalize(form)
        assert dictionary.normalize(once) == once, form


@given(st.text(alphabet=st.characters(whitelist_categories=("Ll", "Lu")),
               min_size=1, max_size=14))
@settings(max_examples=300, deadline=None)
def test_normalize_idempotent_over_random_words(word):
    d = Dictionary.load_seed()
    once = d.normalize(word)
    assert d.normalize(once) == once


# --- resolution ------------------------------------------------------------------

def test_resolution_examples(dictionary):
    assert dictionary.resolve_concept("girder").preferred_name == "beam"
    assert dictionary.resolve_concept("storey").ifc_binding.entity == \
        "IfcBuildingStorey"
    assert dictionary.resolve_concept("Beams").guid == \
        dictionary.resolve_concept("beam").guid


def test_resolution_case_insensitive(dictionary):
    for word in ["BEAM", "Beam", "bEaM", "GIRDERS"]:
        assert dictionary.resolve_concept(word).preferred_name == "beam"


def test_missing_concept_carries_suggestions(dictionary):
    with pytest.raises(ConceptNotFoundError) as err:
        dictionary.resolve_concept("beem")
    assert "beam" in err.value.suggestions
    assert len(err.value.suggestions) <= 3


def test_missing_concept_far_from_everything(dictionary):
    with pytest.raises(ConceptNotFoundError) as err:
        dictionary.resolve_concept("flange")
    assert isinstance(err.value.suggestions, list)


# --- schema mapping -----------------------------------------------------------------

def test_map_subject_binding(dictionary):
    beam = dictionary.resolve_concept("beam")
    assert dictionary.map_to_schema(beam) == Binding("IfcBeam", None)


def test_quantity_rule_table(dictionary):
    quantity = dictionary.resolve_concept("quantity")
    assert dictionary.map_to_schema(quantity, {"material": "steel"}).entity == \
        "IfcQuantityWeight"
    assert dictionary.map_to_schema(quantity, {"material": "concrete"}).entity == \
        "IfcQuantityVolume"
    # synonym in the context still matches the rule
    assert dictionary.map_to_schema(quantity, {"material": "metal"}).entity == \
        "IfcQuantityWeight"


def test_quantity_fallback_to_property(dictionary):
    quantity = dictionary.resolve_concept("quantity")
    binding = dictionary.map_to_schema(
        quantity, {"no_quantity_instances": True, "material": "steel"})
    assert binding.entity == "IfcProperty"


def test_map_is_deterministic(dictionary):
    quantity = dictionary.resolve_concept("quantity")
    ctx = {"material": "steel"}
    assert dictionary.map_to_schema(quantity, ctx) == \
        dictionary.map_to_schema(quantity, ctx)


def test_every_subject_has_binding_without_rules(dictionary):
    for c in dictionary.concepts.values():
        if c.kind == "subject":
            canon = dictionary.canonical(c)
            assert canon.ifc_binding is not None, c.preferred_name


def test_concept_without_binding_or_rule_rejected():
    d = load([concept("mystery", kind="characteristic", ctype="measure")])
    with pytest.raises(BindingError):
        d.map_to_schema(d.resolve_concept("mystery"))


# --- properties for values ------------------------------------------------------------

def test_value_constraint_finds_material(dictionary):
    beam = dictionary.resolve_concept("beam")
    assert dictionary.find_property_for_value(beam, "concrete").preferred_name \
        == "material"


def test_value_constraint_defaults_to_name(dictionary):
    storey = dictionary.resolve_concept("storey")
    assert dictionary.find_property_for_value(storey, "second").preferred_name \
        == "name"
    beam = dictionary.resolve_concept("beam")
    assert dictionary.find_property_for_value(beam, "xyzzy").preferred_name \
        == "name"


def test_value_constraint_phase(dictionary):
    progress = dictionary.resolve_concept("progress")
    assert dictionary.find_property_for_value(progress, "construction") \
        .preferred_name == "phase"


# --- persistence --------------------------------------------------------------------

def test_save_load_round_trip_bit_exact(tmp_path, dictionary):
    out = tmp_path / "concepts.jsonl"
    dictionary.save(out)
    again = Dictionary.load(out)
    out2 = tmp_path / "concepts2.jsonl"
    again.save(out2)
    assert out.read_bytes() == out2.read_bytes()
    assert len(again) == len(dictionary)


def test_seed_file_round_trips_identically(tmp_path, dictionary):
    from conftest import DATA
    out = tmp_path / "c.jsonl"
    dictionary.save(out)
    assert out.read_bytes() == (DATA / "concepts.jsonl").read_bytes()


def test_stable_guid_shape():
    guid = stable_guid("beam")
    assert len(guid) == 22
    assert stable_guid("beam") == guid
    assert stable_guid("beam") != stable_guid("column")
