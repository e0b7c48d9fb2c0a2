"""askbim: a natural-language query engine for IFC building models.

Models are stored as classified document collections with a MapReduce-style
pre-join for two-collection retrievals. Questions in restricted natural
language are turned into retrieval plans via keyword extraction, a concept
dictionary, and path finding over the schema graph; results come back with
a declarative representation plan.
"""

from .classify import EntityClass, classify_entity
from .dictionary import Binding, Concept, Dictionary, stable_guid
from .errors import AskbimError
from .executor import Executor
from .express import parse_express
from .graph import (PathTree, RetrievalPath, SchemaGraph, build_graph,
                    connect_entities, export_xgml, import_xgml, shortest_path)
from .nlq import (KeywordSet, ParseTree, extract_from_text, extract_keywords,
                  load_bracketed_tree, parse_query, parse_text, tag, tokenize)
from .pipeline import Engine, PipelineError, QueryResponse, ingest
from .planner import Planner, QueryPlan, ResultSet, classify_results
from . import prejoin
from .prejoin import (PrejoinSpec, expand, fetch_with_refs, group_summarize,
                      map_phase, reduce_merge)
from .representation import (RepresentationPlan, classify_shape, plan_for,
                             render_text, select_representation)
from .spf import parse_spf
from .store import Collection, Document, Model, serialize_model

__version__ = "0.1.0"
