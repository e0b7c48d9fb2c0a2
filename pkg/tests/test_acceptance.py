"""Acceptance suite: one test per release criterion.

Each test prints an ACCEPT line on success so a plain `pytest -s
tests/test_acceptance.py` read gives the per-criterion verdict. Tolerances:
counts exact, sums within 1e-9 relative, runtime under one second per
query on the bundled fixtures.
"""

import json
import random
import time

import pytest

import oracles
from askbim import graph, nlq, prejoin, representation, store
from askbim.executor import Executor
from askbim.prejoin import PrejoinSpec
from conftest import DATA, build_model, model_text

BEAM_QUANTITY_Q = "quantity of beams of second and third storey"
PROGRESS_Q = "construction progress of the check-in zone"
STEEL_COLUMNS_Q = "quantity of steel columns of the check-in zone"

REL_TOL = 1e-9


def report(name):
    print(f"\nACCEPT {name}: PASS")


def run(schema, planner, model, text, use_prejoin=False):
    ks = nlq.extract_from_text(text)
    plan = planner.build_plan(ks, model)
    result = Executor(schema, model).execute(plan, use_prejoin=use_prejoin)
    return plan, result, representation.plan_for(result, title=text)


def test_end_to_end_showcase_queries(schema, planner):
    """The three showcase queries match the brute-force oracle and carry
    the mandated representation kinds, each in under a second."""
    two = build_model(schema, "two_storey")
    air = build_model(schema, "airport_wing")

    start = time.perf_counter()
    _, result, rplan = run(schema, planner, two, BEAM_QUANTITY_Q)
    assert time.perf_counter() - start < 1.0
    got = {tuple(r.group): r.value for r in result.rows}
    oracle = oracles.beam_quantity_by_storey(model_text("two_storey"),
                                             {"second", "third"})
    assert set(got) == set(oracle)
    for key, value in oracle.items():
        assert got[key] == pytest.approx(value, rel=REL_TOL)
    assert rplan.kind == "grouped_chart"

    start = time.perf_counter()
    _, result2, rplan2 = run(schema, planner, air, PROGRESS_Q)
    assert time.perf_counter() - start < 1.0
    names = sorted(r.value for r in result2.rows)
    assert names == oracles.construction_tasks_of_space(
        model_text("airport_wing"), "check-in")
    assert len(result2.rows) == 4  # count exact
    assert rplan2.kind == "timeline_dashboard"
    assert "gantt" in [c.kind for c in rplan2.companions]

    start = time.perf_counter()
    _, result3, rplan3 = run(schema, planner, air, STEEL_COLUMNS_Q)
    assert time.perf_counter() - start < 1.0
    total, contributing = oracles.steel_column_weight_in_space(
        model_text("airport_wing"), "check-in")
    assert len(result3.rows) == 1
    assert result3.rows[0].value == pytest.approx(total, rel=REL_TOL)
    assert sorted(result3.rows[0].keys) == sorted(f"#{i}" for i in contributing)
    assert rplan3.kind in ("column_chart", "bar_chart")
    assert rplan3.detail_table is not None
    report("end-to-end showcase queries")


def test_prejoin_oracle_equivalence():
    """Randomized: pipeline output is multiset-equal to a nested-loop inner
    join over >= 1000 cases, with byte-identical reruns."""
    from test_prejoin import SPEC, _join_signature, _oracle_signature, \
        _random_rows, make_model

    rng = random.Random(1203)
    cases = 0
    for _ in range(1000):
        a, b = _random_rows(rng, rng.randint(0, 100), rng.randint(0, 60))
        model = make_model(a, b)
        coll, _ = prejoin.prejoin(model, SPEC)
        assert _join_signature(coll, SPEC) == _oracle_signature(a, b, SPEC)
        cases += 1
    assert cases >= 1000
    a, b = _random_rows(rng, 100, 50)
    first, _ = prejoin.prejoin(make_model(a, b), SPEC)
    second, _ = prejoin.prejoin(make_model(a, b), SPEC)
    assert "\n".join(d.to_line() for d in first.ordered()) == \
        "\n".join(d.to_line() for d in second.ordered())
    report("pre-join oracle equivalence (1000 randomized cases)")


def test_access_count_halving(schema, planner):
    """Two-collection retrievals cost exactly half the collection accesses
    once the pre-joined collection exists."""
    two = build_model(schema, "two_storey")
    spec = PrejoinSpec(
        a_collection="IfcRelContainedInSpatialStructure",
        b_collection="IfcBuildingStorey", b_ref_field="RelatingStructure",
        a_payload=("RelatedElements",), b_payload=("Name",))
    plain = store.AccessLog()
    prejoin.fetch_with_refs(two, spec.a_collection, "RelatingStructure",
                            spec.b_collection, ["Name"], access=plain)
    prejoin.materialize(two, spec)
    joined = store.AccessLog()
    prejoin.fetch_with_refs(two, spec.a_collection, "RelatingStructure",
                            spec.b_collection, ["Name"], access=joined,
                            prejoined=spec.output_name())
    assert plain.total() == 2 and joined.total() == 1

    fresh = build_model(schema, "two_storey")
    ks = nlq.extract_from_text("beams of second and third storey")
    plan = planner.build_plan(ks, fresh)
    before = Executor(schema, fresh).execute(plan, use_prejoin=False)
    after = Executor(schema, fresh).execute(plan, use_prejoin=True)
    assert before.provenance["hops"][0]["pair_accesses"] == 2
    assert after.provenance["hops"][0]["pair_accesses"] == 1
    assert [r.keys for r in before.rows] == [r.keys for r in after.rows]
    report("access-count halving")


def test_keyword_extraction_fidelity():
    """The beam-quantity and progress sentences extract exactly as
    documented, and both front ends agree over the whole corpus."""
    ks = nlq.extract_from_text(BEAM_QUANTITY_Q)
    assert ks.keyword_words() == ["quantity", "beam", "storey"]
    storey_cons = ks.constraints_for(2)
    assert sorted(c.word for c in storey_cons) == ["second", "third"]
    assert {c.connective for c in storey_cons} == {"and"}
    assert [ks.keywords[i].word for i in ks.order] == \
        ["storey", "beam", "quantity"]

    ks6 = nlq.extract_from_text(PROGRESS_Q)
    assert ks6.keyword_words() == ["progress", "zone"]
    cons = {(ks6.keywords[c.target].word, c.word) for c in ks6.constraints}
    assert ("progress", "construction") in cons

    from test_nlq import signature
    sentences = (DATA / "corpus.txt").read_text().splitlines()
    trees = (DATA / "corpus_trees.txt").read_text().splitlines()
    assert len(sentences) >= 20
    for sentence, treetext in zip(sentences, trees):
        internal = nlq.extract_keywords(nlq.parse_text(sentence))
        imported = nlq.extract_keywords(nlq.load_bracketed_tree(treetext))
        assert signature(internal) == signature(imported), sentence
    report(f"keyword extraction fidelity ({len(sentences)}-sentence corpus)")


def test_dictionary_resolution(dictionary):
    """Synonyms and word forms unify; the rule table maps materials to
    measure kinds; the no-quantity flag forces the property fallback."""
    guids = {dictionary.resolve_concept(w).guid
             for w in ["girder", "beams", "Beam"]}
    assert len(guids) == 1
    for form in dictionary.name_forms():
        once = dictionary.normalize(form)
        assert dictionary.normalize(once) == once
    quantity = dictionary.resolve_concept("quantity")
    assert dictionary.map_to_schema(quantity, {"material": "steel"}).entity \
        == "IfcQuantityWeight"
    assert dictionary.map_to_schema(quantity, {"material": "concrete"}).entity \
        == "IfcQuantityVolume"
    assert dictionary.map_to_schema(
        quantity, {"no_quantity_instances": True}).entity == "IfcProperty"
    report("dictionary resolution")


def test_path_finding(schema_graph):
    """Dijkstra matches a BFS oracle on 500 random graphs; the bundled
    schema connects storey/beam/quantity through the containment
    relationship; xgml export/import is a fixpoint."""
    from test_graph import _random_graph

    rng = random.Random(555)
    checked = 0
    for _ in range(520):
        g = _random_graph(rng, rng.randint(2, 50))
        names = sorted(g.nodes)
        src, dst = rng.sample(names, 2)
        oracle = oracles.bfs_cost(oracles.graph_edges_for_bfs(g), src, dst)
        try:
            cost = graph.shortest_path(g, src, dst).cost
        except graph.NoPathError:
            cost = None
        assert cost == oracle
        checked += 1
    assert checked >= 500

    tree = graph.connect_entities(
        schema_graph, ["IfcBuildingStorey", "IfcBeam", "IfcElementQuantity"])
    names = set()
    for hop in tree.root.all_hops():
        names.update((hop.source, hop.target))
    assert "IfcRelContainedInSpatialStructure" in names

    once = graph.export_xgml(schema_graph)
    assert graph.export_xgml(graph.import_xgml(once)) == once
    report("path finding (500 random graphs; containment hop; xgml fixpoint)")


def test_constraint_semantics(schema, planner):
    """'and'/'or' between values of one property select the same storeys;
    'beams and columns' equals the union of the sub-plans."""
    two = build_model(schema, "two_storey")

    def keys(text):
        _, result, _ = run(schema, planner, two, text)
        return sorted(k for row in result.rows for k in row.keys)

    assert keys("beams of second and third storey") == \
        keys("beams of second or third storey")
    union = keys("beams and columns")
    assert union == sorted(keys("beams") + keys("columns"))
    report("constraint semantics")


def test_representation_rule_conformance():
    """One fixture per representation rule asserts the mandated kind."""
    from test_representation import (flat_array, geometric_result, plain_net,
                                     schedule_net, single_value, time_series,
                                     tree_result)
    plan = representation.plan_for(single_value())
    assert plan.kind == "plain_text" and plan.emphasis
    plan = representation.plan_for(flat_array())
    assert plan.kind == "column_chart" and plan.detail_table is not None
    plan = representation.plan_for(time_series())
    assert plan.kind == "line_chart" and plan.x_axis.is_time
    plan = representation.plan_for(tree_result())
    assert plan.kind == "grouped_chart"
    assert "tree_list" in [c.kind for c in plan.companions]
    assert plan.dual_axis and plan.y_axis.log  # >= 2 orders of magnitude
    plan = representation.plan_for(schedule_net())
    assert plan.kind == "timeline_dashboard"
    assert "gantt" in [c.kind for c in plan.companions]
    plan = representation.plan_for(plain_net())
    assert plan.kind == "net_graph"
    plan = representation.plan_for(geometric_result())
    assert plan.kind == "model_view_stub" and plan.color_groups
    report("representation rule conformance")


def test_store_round_trip(schema):
    """Serialization preserves the reference multigraph on every fixture;
    classification partitions the schema; index scans equal full scans."""
    from test_store import _random_predicate

    for name in ["two_storey", "airport_wing", "property_only"]:
        model = build_model(schema, name)
        ours = store.reference_edges(model)
        oracle = sorted((f"#{a}", f"#{b}")
                        for a, b in oracles.reference_edges(model_text(name)))
        assert ours == oracle

    from askbim.classify import classification_map
    classes = classification_map(schema)
    assert set(classes) == set(schema.entities)

    model = build_model(schema, "two_storey")
    rng = random.Random(31337)
    for coll_name in ["IfcBeam", "IfcRelContainedInSpatialStructure"]:
        coll = model.collection(coll_name)
        for _ in range(250):
            predicate = _random_predicate(rng)
            assert [d.key for d in coll.scan(predicate, use_index=True)] == \
                [d.key for d in coll.scan(predicate, use_index=False)]
    report("store round-trip, classification partition, index = full scan")
