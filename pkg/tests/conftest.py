import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from askbim import express, graph, spf, store
from askbim.dictionary import Dictionary
from askbim.executor import Executor
from askbim.planner import Planner

DATA = Path(__file__).parent.parent / "src" / "askbim" / "data"
MODELS = DATA / "models"
GOLDEN = Path(__file__).parent / "golden"


def model_text(name):
    return (MODELS / f"{name}.ifc").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def schema():
    return express.parse_express((DATA / "ifc_subset.exp").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def schema_graph(schema):
    return graph.build_graph(schema)


@pytest.fixture(scope="session")
def dictionary():
    return Dictionary.load_seed()


@pytest.fixture(scope="session")
def planner(schema, schema_graph, dictionary):
    return Planner(schema, schema_graph, dictionary)


def build_model(schema, name):
    return store.serialize_model(spf.parse_spf(model_text(name)), schema, name=name)


@pytest.fixture()
def two_storey(schema):
    return build_model(schema, "two_storey")


@pytest.fixture()
def airport(schema):
    return build_model(schema, "airport_wing")


@pytest.fixture()
def property_only(schema):
    return build_model(schema, "property_only")


@pytest.fixture()
def run_query(schema, planner):
    from askbim import nlq

    def _run(model, text, use_prejoin=False, plan_only=False):
        ks = nlq.extract_from_text(text)
        plan = planner.build_plan(ks, model)
        if plan_only:
            return plan, None
        result = Executor(schema, model).execute(plan, use_prejoin=use_prejoin)
        return plan, result

    return _run
