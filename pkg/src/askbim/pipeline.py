"""End-to-end query pipeline with stage timing and attribution.

Stages mirror the processing breakdown: parse (tokenize/tag/parse),
map (dictionary resolution inside planning), plan, execute, represent.
Timings are reported for extract/map, retrieve and represent; they are
informational and never asserted by tests.
"""

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import graph as graphmod
from . import nlq, representation
from .dictionary import Dictionary
from .errors import AskbimError
from .executor import Executor
from .express import parse_express
from .planner import Planner
from .spf import parse_spf
from .store import Model, serialize_model

DATA_DIR = Path(__file__).parent / "data"


class PipelineError(AskbimError):
    """An error attributed to one pipeline stage."""

    def __init__(self, stage, message, suggestions=None):
        self.stage = stage
        self.suggestions = suggestions or []
        super().__init__(message)


@dataclass
class QueryResponse:
    id: str
    query: str
    keywords: dict
    plan: dict
    result: dict
    representation: dict
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_json(self):
        return {"id": self.id, "query": self.query, "keywords": self.keywords,
                "plan": self.plan, "result": self.result,
                "representation": self.representation,
                "timings": self.timings, "warnings": self.warnings}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False,
                          indent=2) + "\n"


def default_schema_text():
    return (DATA_DIR / "ifc_subset.exp").read_text(encoding="utf-8")


def ingest(model_path, out_dir, schema_path=None, partition_count=3,
           rlx=None, name=None):
    """Parse, classify and serialize a model file into a model directory."""
    schema_text = (Path(schema_path).read_text(encoding="utf-8")
                   if schema_path else default_schema_text())
    schema = parse_express(schema_text)
    spf_file = parse_spf(Path(model_path).read_text(encoding="utf-8"))
    model = serialize_model(spf_file, schema,
                            name=name or Path(model_path).stem,
                            rlx_config=rlx, partition_count=partition_count)
    model.save(out_dir, schema_text=schema_text)
    return model


class Engine:
    """One loaded model plus the shared schema graph and dictionary.

    The model, dictionary and graph are immutable after construction;
    queries may run concurrently.
    """

    def __init__(self, model, schema, dictionary=None):
        self.model = model
        self.schema = schema
        self.dictionary = dictionary or Dictionary.load_seed()
        self.graph = graphmod.build_graph(schema)
        self.planner = Planner(schema, self.graph, self.dictionary)
        self.executor = Executor(schema, model)

    @classmethod
    def open(cls, model_dir, dictionary=None):
        model_dir = Path(model_dir)
        model = Model.load(model_dir)
        schema_file = model_dir / "schema.exp"
        schema_text = (schema_file.read_text(encoding="utf-8")
                       if schema_file.exists() else default_schema_text())
        return cls(model, parse_express(schema_text), dictionary)

    @classmethod
    def from_file(cls, model_path, schema_path=None, dictionary=None):
        schema_text = (Path(schema_path).read_text(encoding="utf-8")
                       if schema_path else default_schema_text())
        schema = parse_express(schema_text)
        spf_file = parse_spf(Path(model_path).read_text(encoding="utf-8"))
        model = serialize_model(spf_file, schema, name=Path(model_path).stem)
        return cls(model, schema, dictionary)

    def response_id(self, text):
        digest = hashlib.sha1(f"{self.model.name}\x00{text}".encode()).hexdigest()
        return digest[:12]

    def query(self, text, use_prejoin=False, plan_only=False):
        """Full pipeline for one question; returns a QueryResponse."""
        if not text or not text.strip():
            raise PipelineError("parse", "empty query text")
        warnings = []
        timings = {}

        t0 = time.perf_counter()
        try:
            tagged = nlq.tag(nlq.tokenize(text))
            tree = nlq.parse_query(tagged)
            ks = nlq.extract_keywords(tree)
        except AskbimError as exc:
            raise PipelineError("parse", str(exc)) from exc
        for word in nlq.unknown_words(tagged):
            note = f"unknown word {word!r} treated as noun"
            if note not in warnings:
                warnings.append(note)
        warnings.extend(w for w in ks.warnings if w not in warnings)
        warnings.extend(f"ignored {word!r} ({reason})"
                        for word, reason in ks.ignored
                        if reason not in ("determiner",))

        try:
            plan = self.planner.build_plan(ks, self.model)
        except AskbimError as exc:
            stage = "map" if exc.stage == "map" else "plan"
            raise PipelineError(stage, str(exc),
                                getattr(exc, "suggestions", None)) from exc
        timings["extract_map"] = time.perf_counter() - t0

        keywords_view = _keywords_view(ks)
        plan_view = _plan_view(plan)
        if plan_only:
            return QueryResponse(
                id=self.response_id(text), query=text, keywords=keywords_view,
                plan=plan_view, result={}, representation={},
                timings=timings, warnings=warnings)

        t1 = time.perf_counter()
        try:
            result = self.executor.execute(plan, use_prejoin=use_prejoin)
        except AskbimError as exc:
            raise PipelineError("execute", str(exc)) from exc
        timings["retrieve"] = time.perf_counter() - t1

        t2 = time.perf_counter()
        try:
            rplan = representation.plan_for(result, title=text)
        except AskbimError as exc:
            raise PipelineError("represent", str(exc)) from exc
        timings["represent"] = time.perf_counter() - t2

        return QueryResponse(
            id=self.response_id(text), query=text, keywords=keywords_view,
            plan=plan_view, result=result.to_json(),
            representation=rplan.to_json(), timings=timings, warnings=warnings)

    def render(self, response):
        if not response.representation:
            return json.dumps(response.plan, indent=2, sort_keys=True)
        plan = representation.RepresentationPlan.from_json(response.representation)
        return representation.render_text(plan)


def _keywords_view(ks):
    return {
        "keywords": [{"word": k.word, "surface": k.surface,
                      "position": list(k.position)} for k in ks.keywords],
        "constraints": [{"target": ks.keywords[c.target].word, "word": c.word,
                         "connective": c.connective, "source": c.source}
                        for c in ks.constraints],
        "order": [ks.keywords[i].word for i in ks.order],
        "links": [[ks.keywords[p].word, ks.keywords[c].word]
                  for p, c in ks.phrase_links],
        "phrase_connectives": [[ks.keywords[a].word, ks.keywords[b].word, w]
                               for a, b, w in ks.phrase_connectives],
        "ignored": [list(pair) for pair in ks.ignored],
    }


def _plan_view(plan):
    view = plan.to_json()
    view["anchors"] = plan.anchor_entities()
    view["hop_labels"] = plan.hop_labels()
    return view
