import pytest

import oracles
from askbim import spf
from askbim.errors import (DuplicateInstanceError, MissingReferenceError,
                           SpfSyntaxError)
from conftest import model_text

MINIMAL = """ISO-10303-21;
HEADER;
FILE_SCHEMA(('IFC_SUBSET'));
ENDSEC;
DATA;
{body}ENDSEC;
END-ISO-10303-21;
"""


def wrap(body):
    return MINIMAL.format(body=body)


def test_single_instance_transcription():
    parsed = spf.parse_spf(wrap("#1=IFCBEAM('g1',#2,$,$,$,$,$);\n"
                                "#2=IFCOWNERHISTORY($,$,$,'now');\n"))
    inst = parsed.instances[1]
    assert inst.type_name == "IFCBEAM"
    assert inst.attributes[0] == "g1"
    assert inst.attributes[1] == spf.Ref(2)
    assert all(a is spf.ABSENT for a in inst.attributes[2:])


def test_empty_data_section():
    parsed = spf.parse_spf(wrap(""))
    assert len(parsed) == 0


def test_fixture_instance_count():
    text = model_text("two_storey")
    parsed = spf.parse_spf(text)
    # oracle: independent line-counting over the fixture
    assert oracles.count_instances(text) == 61
    assert len(parsed) == 61


@pytest.mark.parametrize("name,expected", [
    ("two_storey", 61), ("airport_wing", 90), ("property_only", 24)])
def test_fixture_counts_match_oracle(name, expected):
    text = model_text(name)
    assert oracles.count_instances(text) == expected
    assert len(spf.parse_spf(text)) == expected


def test_value_kinds():
    parsed = spf.parse_spf(wrap(
        "#1=IFCTHING('it''s',.T.,.F.,.ADDED.,3,4.5,1.0E-2,*,(#2,#3),"
        "IFCLABEL('x'),());\n#2=IFCO();\n#3=IFCO();\n"))
    values = parsed.instances[1].attributes
    assert values[0] == "it's"
    assert values[1] is True and values[2] is False
    assert values[3] == spf.Enum("ADDED")
    assert values[4] == 3 and values[5] == 4.5 and values[6] == 0.01
    assert values[7] is spf.DERIVED
    assert values[8] == [spf.Ref(2), spf.Ref(3)]
    assert values[9] == spf.Typed("IFCLABEL", "x")
    assert values[10] == []


def test_multiline_statement():
    parsed = spf.parse_spf(wrap("#1=IFCTHING('a',\n  (#2,\n   #3));\n"
                                "#2=IFCO();\n#3=IFCO();\n"))
    assert parsed.instances[1].attributes[1] == [spf.Ref(2), spf.Ref(3)]


def test_duplicate_id_rejected():
    with pytest.raises(DuplicateInstanceError):
        spf.parse_spf(wrap("#1=IFCO();\n#1=IFCO();\n"))


def test_missing_reference_reported_after_full_pass():
    # the forward reference #3 resolves; only #9 is missing
    with pytest.raises(MissingReferenceError) as err:
        spf.parse_spf(wrap("#1=IFCTHING(#3,#9);\n#3=IFCO();\n"))
    assert "#9" in str(err.value)


def test_syntax_error_carries_location():
    with pytest.raises(SpfSyntaxError) as err:
        spf.parse_spf(wrap("#1=IFCTHING('unterminated);\n"))
    assert err.value.line is not None


def test_nested_aggregate_rejected():
    with pytest.raises(SpfSyntaxError):
        spf.parse_spf(wrap("#1=IFCTHING(((1,2),(3,4)));\n"))


def test_expression_value_rejected():
    with pytest.raises(SpfSyntaxError) as err:
        spf.parse_spf(wrap("#1=IFCTHING(UNQUOTED);\n"))
    assert "expression" in str(err.value)


def test_not_a_step_file():
    with pytest.raises(SpfSyntaxError):
        spf.parse_spf("hello world\n")


def test_reference_edge_multiset_matches_oracle():
    text = model_text("airport_wing")
    parsed = spf.parse_spf(text)
    ours = []
    for inst in parsed:
        for ref in spf.iter_refs(inst.attributes):
            ours.append((inst.id, ref.target))
    assert sorted(ours) == oracles.reference_edges(text)
