"""Keyed document collections for classified model instances.

Instances become documents in one collection per concrete entity type.
Object and relationship instances keep references by key; resource-layer
values are embedded recursively; geometry payloads go to a blob side-store
with only the blob id kept on the document.

A model is immutable once ingest completes; reads are safe from any number
of threads.
"""

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from . import spf as spfmod
from .classify import (DEFAULT_GEOMETRY_ROOTS, DEFAULT_RLX, EntityClass,
                       classification_map)
from .errors import (EmbeddingCycleError, SerializationError, StoreError,
                     UnknownCollectionError)

FORMAT_TAG = "askbim-model/1"

# G-class payload attributes routed to the blob store, per entity type
DEFAULT_GEOMETRY_PAYLOADS = {"IfcShapeRepresentation": ("EncodedData",)}


def key_order(key):
    """Sort key: numeric for '#n' instance keys, lexicographic otherwise."""
    if key.startswith("#") and key[1:].isdigit():
        return (0, int(key[1:]), "")
    return (1, 0, key)


def partition_of(key, partition_count):
    """Stable hash partition; must not depend on interpreter hash seeds."""
    return zlib.crc32(key.encode("utf-8")) % partition_count


# --- predicates ---------------------------------------------------------

class Predicate:
    def matches(self, doc):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


class TruePredicate(Predicate):
    def matches(self, doc):
        return True

    def to_json(self):
        return {"op": "true"}

    def __repr__(self):
        return "TRUE"


@dataclass(frozen=True)
class Comparison(Predicate):
    """Compare every value reachable at `path`; any hit is a match."""

    path: str
    op: str  # eq, ne, lt, le, gt, ge
    value: object
    case_insensitive: bool = False

    def matches(self, doc):
        values = resolve_path(doc, self.path)
        for value in values:
            if self._compare(value):
                return True
        return False

    def _compare(self, value):
        expected = self.value
        if isinstance(value, str) and isinstance(expected, str) and self.case_insensitive:
            value, expected = value.lower(), expected.lower()
        if self.op == "eq":
            return value == expected
        if self.op == "ne":
            return value != expected
        try:
            if self.op == "lt":
                return value < expected
            if self.op == "le":
                return value <= expected
            if self.op == "gt":
                return value > expected
            if self.op == "ge":
                return value >= expected
        except TypeError:
            return False
        raise StoreError(f"unknown comparison operator {self.op!r}")

    def to_json(self):
        return {"op": self.op, "path": self.path, "value": self.value,
                "ci": self.case_insensitive}

    def __repr__(self):
        return f"({self.path} {self.op} {self.value!r})"


@dataclass(frozen=True)
class And(Predicate):
    parts: tuple

    def __init__(self, parts):
        object.__setattr__(self, "parts", tuple(parts))

    def matches(self, doc):
        return all(p.matches(doc) for p in self.parts)

    def to_json(self):
        return {"op": "and", "parts": [p.to_json() for p in self.parts]}

    def __repr__(self):
        return "(" + " AND ".join(map(repr, self.parts)) + ")"


@dataclass(frozen=True)
class Or(Predicate):
    parts: tuple

    def __init__(self, parts):
        object.__setattr__(self, "parts", tuple(parts))

    def matches(self, doc):
        return any(p.matches(doc) for p in self.parts)

    def to_json(self):
        return {"op": "or", "parts": [p.to_json() for p in self.parts]}

    def __repr__(self):
        return "(" + " OR ".join(map(repr, self.parts)) + ")"


@dataclass(frozen=True)
class Not(Predicate):
    part: Predicate

    def matches(self, doc):
        return not self.part.matches(doc)

    def to_json(self):
        return {"op": "not", "part": self.part.to_json()}

    def __repr__(self):
        return f"(NOT {self.part!r})"


TRUE = TruePredicate()


def eq(path, value, ci=False):
    return Comparison(path, "eq", value, ci)


def predicate_from_json(obj):
    op = obj["op"]
    if op == "true":
        return TRUE
    if op == "and":
        return And([predicate_from_json(p) for p in obj["parts"]])
    if op == "or":
        return Or([predicate_from_json(p) for p in obj["parts"]])
    if op == "not":
        return Not(predicate_from_json(obj["part"]))
    return Comparison(obj["path"], op, obj["value"], obj.get("ci", False))


def resolve_path(doc, path):
    """All values reachable by a dotted field path; [] when absent.

    Each step looks through scalars, embedded sub-documents, refs, and blob
    ids; embedded lists fan out. 'key' and 'type' address the document
    identity fields.
    """
    nodes = [doc.as_dict() if isinstance(doc, Document) else doc]
    for part in path.split("."):
        next_nodes = []
        for node in nodes:
            if isinstance(node, list):
                if part.isdigit() and int(part) < len(node):
                    next_nodes.append(node[int(part)])
                else:
                    next_nodes.extend(n for n in node if isinstance(n, dict))
                continue
            if not isinstance(node, dict):
                continue
            if part in ("key", "type"):
                if part in node:
                    next_nodes.append(node[part])
                continue
            for section in ("scalars", "embedded", "refs", "blobs"):
                bucket = node.get(section)
                if bucket and part in bucket:
                    next_nodes.append(bucket[part])
        # a second pass flattens list hits for non-index parts
        nodes = next_nodes
    out = []
    for node in nodes:
        if isinstance(node, list) and all(not isinstance(i, (dict, list)) for i in node):
            out.extend(node)
        else:
            out.append(node)
    return out


# --- documents and collections ------------------------------------------

@dataclass
class BlobRef:
    id: str
    byte_length: int
    media_hint: str = "application/octet-stream"


@dataclass
class Document:
    key: str
    type_name: str
    scalars: dict = field(default_factory=dict)
    embedded: dict = field(default_factory=dict)
    refs: dict = field(default_factory=dict)        # attr -> [keys]
    blobs: dict = field(default_factory=dict)       # attr -> blob id
    value_types: dict = field(default_factory=dict) # attr -> STEP type wrapper
    partition: int = 0

    def as_dict(self):
        out = {"key": self.key, "type": self.type_name, "partition": self.partition,
               "scalars": self.scalars, "embedded": self.embedded,
               "refs": self.refs, "blobs": self.blobs}
        if self.value_types:
            out["value_types"] = self.value_types
        return out

    def to_line(self):
        return json.dumps(self.as_dict(), sort_keys=True, ensure_ascii=True,
                          separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj):
        return cls(key=obj["key"], type_name=obj["type"],
                   scalars=obj.get("scalars", {}), embedded=obj.get("embedded", {}),
                   refs=obj.get("refs", {}), blobs=obj.get("blobs", {}),
                   value_types=obj.get("value_types", {}),
                   partition=obj.get("partition", 0))


class Collection:
    def __init__(self, name, partition_count=3, index_paths=()):
        self.name = name
        self.partition_count = partition_count
        self.documents = {}
        self.index_paths = list(index_paths)
        self._indexes = {}

    def add(self, doc):
        if doc.key in self.documents:
            raise StoreError(f"duplicate key {doc.key} in collection {self.name}")
        self.documents[doc.key] = doc

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.ordered())

    def ordered(self):
        return [self.documents[k] for k in sorted(self.documents, key=key_order)]

    def build_indexes(self):
        self._indexes = {}
        for path in self.index_paths:
            table = {}
            for doc in self.documents.values():
                for value in resolve_path(doc, path):
                    for norm in _index_forms(value):
                        table.setdefault(norm, set()).add(doc.key)
            self._indexes[path] = table

    def candidate_keys(self, predicate):
        """Index-based superset of matching keys; None = no usable index."""
        if isinstance(predicate, Comparison) and predicate.op == "eq" \
                and predicate.path in self._indexes:
            hits = set()
            for norm in _index_forms(predicate.value):
                hits |= self._indexes[predicate.path].get(norm, set())
            return hits
        if isinstance(predicate, And):
            for part in predicate.parts:
                keys = self.candidate_keys(part)
                if keys is not None:
                    return keys
        if isinstance(predicate, Or):
            union = set()
            for part in predicate.parts:
                keys = self.candidate_keys(part)
                if keys is None:
                    return None
                union |= keys
            return union
        return None

    def scan(self, predicate=TRUE, use_index=True):
        """Documents matching the predicate, ascending key order."""
        keys = self.candidate_keys(predicate) if use_index else None
        if keys is None:
            pool = self.ordered()
        else:
            pool = [self.documents[k] for k in sorted(keys, key=key_order)]
        return [doc for doc in pool if predicate.matches(doc)]

    def partition_documents(self, partition):
        return [d for d in self.ordered() if d.partition == partition]


def _index_forms(value):
    if isinstance(value, str):
        return (("s", value.lower()),)
    if isinstance(value, bool):
        return (("b", value),)
    if isinstance(value, (int, float)):
        return (("n", float(value)),)
    return ()


class AccessLog:
    """Counts collection reads during one retrieval; not thread-shared."""

    def __init__(self):
        self.events = []

    def record(self, collection, label=""):
        self.events.append((collection, label))

    def total(self):
        return len(self.events)

    def by_collection(self):
        out = {}
        for name, _ in self.events:
            out[name] = out.get(name, 0) + 1
        return out

    def by_label(self):
        out = {}
        for _, label in self.events:
            out[label] = out.get(label, 0) + 1
        return out


class BlobStore:
    def __init__(self):
        self._blobs = {}
        self.refs = {}

    def put(self, blob_id, data, media_hint):
        if blob_id in self._blobs:
            raise StoreError(f"duplicate blob id {blob_id}")
        self._blobs[blob_id] = data
        self.refs[blob_id] = BlobRef(blob_id, len(data), media_hint)

    def get(self, blob_id):
        if blob_id not in self._blobs:
            raise StoreError(f"unknown blob id {blob_id}")
        return self._blobs[blob_id]

    def __len__(self):
        return len(self._blobs)

    def ids(self):
        return sorted(self._blobs)


class Model:
    """A serialized model: collections plus the blob side-store."""

    def __init__(self, name="model", partition_count=3):
        self.name = name
        self.partition_count = partition_count
        self.collections = {}
        self.blobs = BlobStore()
        self.classification = {}
        self.report = {}
        self.rlx_config = sorted(DEFAULT_RLX)
        self.geometry_roots = sorted(DEFAULT_GEOMETRY_ROOTS)
        self._prejoin_reports = {}

    def prejoin_reports(self):
        return self._prejoin_reports

    def collection(self, name):
        if name not in self.collections:
            raise UnknownCollectionError(f"unknown collection {name!r}")
        return self.collections[name]

    def has_collection(self, name):
        return name in self.collections

    def ensure_collection(self, name, index_paths=()):
        if name not in self.collections:
            self.collections[name] = Collection(name, self.partition_count, index_paths)
        return self.collections[name]

    def scan(self, name, predicate=TRUE, access=None, label=""):
        coll = self.collection(name)
        if access is not None:
            access.record(name, label or "scan")
        return coll.scan(predicate)

    def fetch(self, name, keys, access=None, label=""):
        """Documents for the given keys (missing ones skipped), key order."""
        coll = self.collection(name)
        if access is not None:
            access.record(name, label or "fetch")
        return [coll.documents[k] for k in sorted(set(keys), key=key_order)
                if k in coll.documents]

    def census(self):
        return {name: len(coll) for name, coll in sorted(self.collections.items())}

    # -- persistence ------------------------------------------------------

    def save(self, directory, schema_text=None):
        root = Path(directory)
        (root / "collections").mkdir(parents=True, exist_ok=True)
        manifest = {
            "format": FORMAT_TAG,
            "name": self.name,
            "partition_count": self.partition_count,
            "rlx": self.rlx_config,
            "geometry_roots": self.geometry_roots,
            "census": self.census(),
            "indexes": {n: c.index_paths for n, c in sorted(self.collections.items())},
            "report": self.report,
        }
        (root / "manifest.json").write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        for name, coll in sorted(self.collections.items()):
            lines = [doc.to_line() for doc in coll.ordered()]
            (root / "collections" / f"{name}.jsonl").write_text(
                "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        for name, report in sorted(self._prejoin_reports.items()):
            (root / "collections" / f"{name}.report.json").write_text(
                json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        blob_dir = root / "blobs"
        blob_dir.mkdir(exist_ok=True)
        blob_index = {}
        for blob_id in self.blobs.ids():
            ref = self.blobs.refs[blob_id]
            (blob_dir / blob_id).write_bytes(self.blobs.get(blob_id))
            blob_index[blob_id] = {"byte_length": ref.byte_length,
                                   "media_hint": ref.media_hint}
        (root / "blobs.json").write_text(
            json.dumps(blob_index, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        if schema_text is not None:
            (root / "schema.exp").write_text(schema_text, encoding="utf-8")

    @classmethod
    def load(cls, directory):
        root = Path(directory)
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
        if manifest.get("format") != FORMAT_TAG:
            raise StoreError(f"not a model directory: {directory}")
        model = cls(manifest["name"], manifest["partition_count"])
        model.rlx_config = manifest.get("rlx", model.rlx_config)
        model.geometry_roots = manifest.get("geometry_roots", model.geometry_roots)
        model.report = manifest.get("report", {})
        for path in sorted((root / "collections").glob("*.jsonl")):
            name = path.stem
            coll = model.ensure_collection(name, manifest["indexes"].get(name, ()))
            for line in path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    coll.add(Document.from_dict(json.loads(line)))
            coll.build_indexes()
        for path in sorted((root / "collections").glob("*.report.json")):
            name = path.name[:-len(".report.json")]
            model._prejoin_reports[name] = json.loads(path.read_text(encoding="utf-8"))
        blob_index_path = root / "blobs.json"
        if blob_index_path.exists():
            blob_index = json.loads(blob_index_path.read_text(encoding="utf-8"))
            for blob_id, meta in sorted(blob_index.items()):
                model.blobs.put(blob_id, (root / "blobs" / blob_id).read_bytes(),
                                meta["media_hint"])
        return model


# --- serialization -------------------------------------------------------

def serialize_model(spf_file, schema, name="model", rlx_config=None,
                    rlx_embedded=(), geometry_roots=None,
                    geometry_payloads=None, partition_count=3,
                    extra_indexes=None):
    """Serialize parsed instances into a Model per their classification.

    `rlx_embedded` lists RLx types stored inline rather than in their own
    collections (the per-type mode flag).
    """
    rlx_config = frozenset(DEFAULT_RLX if rlx_config is None else rlx_config)
    geometry_roots = frozenset(DEFAULT_GEOMETRY_ROOTS if geometry_roots is None
                               else geometry_roots)
    geometry_payloads = dict(DEFAULT_GEOMETRY_PAYLOADS if geometry_payloads is None
                             else geometry_payloads)
    classes = classification_map(schema, rlx_config, geometry_roots)
    rlx_embedded = frozenset(rlx_embedded)

    decl_of = {}
    for inst in spf_file:
        decl = schema.entity_by_upper(inst.type_name)
        if decl is None:
            raise SerializationError(
                f"instance #{inst.id}: entity type {inst.type_name} not in schema")
        decl_of[inst.id] = decl

    def cls_of(iid):
        return classes[decl_of[iid]]

    def is_embedded_target(iid):
        c = cls_of(iid)
        return c is EntityClass.P or (c is EntityClass.RLX
                                      and decl_of[iid] in rlx_embedded)

    embedded_ids = set()

    def embed(iid, stack):
        if iid in stack:
            cycle = " -> ".join(f"#{i}" for i in stack + [iid])
            raise EmbeddingCycleError(f"embedding cycle among value instances: {cycle}")
        embedded_ids.add(iid)
        inst = spf_file.instances[iid]
        doc = _instance_to_doc(inst, stack + [iid])
        return doc.as_dict()

    def _instance_to_doc(inst, stack):
        decl = decl_of[inst.id]
        attrs = schema.all_attributes(decl)
        if len(attrs) != len(inst.attributes):
            raise SerializationError(
                f"instance #{inst.id} ({decl}): {len(inst.attributes)} attributes, "
                f"schema declares {len(attrs)}")
        doc = Document(key=f"#{inst.id}", type_name=decl,
                       partition=partition_of(f"#{inst.id}", partition_count))
        own_class = classes[decl]
        payload_attrs = geometry_payloads.get(decl, ()) if own_class is EntityClass.G else ()
        for attr, value in zip(attrs, inst.attributes):
            if value is spfmod.ABSENT or value is spfmod.DERIVED:
                continue
            if attr.name in payload_attrs and isinstance(value, str):
                blob_id = f"blob-{inst.id}-{attr.name}"
                yield_blobs.append((blob_id, value.encode("utf-8")))
                doc.blobs[attr.name] = blob_id
                continue
            if isinstance(value, spfmod.Ref):
                _place_ref(doc, attr, value.target, stack, single=True)
            elif isinstance(value, list):
                for item in value:
                    if isinstance(item, spfmod.Ref):
                        _place_ref(doc, attr, item.target, stack, single=False)
                    else:
                        doc.embedded.setdefault(attr.name, [])
                        if not isinstance(doc.embedded[attr.name], list):
                            raise SerializationError(
                                f"#{inst.id}.{attr.name}: mixed aggregate")
                        doc.embedded[attr.name].append(_plain_value(item))
                if not value:
                    doc.scalars[attr.name] = []
            elif isinstance(value, spfmod.Typed):
                doc.scalars[attr.name] = _plain_value(value.value)
                doc.value_types[attr.name] = value.type_name
            else:
                doc.scalars[attr.name] = _plain_value(value)
        return doc

    def _place_ref(doc, attr, target_id, stack, single):
        if target_id not in decl_of:
            raise SerializationError(f"reference to unknown instance #{target_id}")
        if is_embedded_target(target_id):
            sub = embed(target_id, stack)
            if single:
                doc.embedded[attr.name] = sub
            else:
                doc.embedded.setdefault(attr.name, []).append(sub)
        else:
            if stack and cls_of(target_id) in (EntityClass.O, EntityClass.RL):
                raise SerializationError(
                    f"value instance #{stack[-1]} references object #{target_id}; "
                    "embedded data must stay pure")
            doc.refs.setdefault(attr.name, []).append(f"#{target_id}")

    model = Model(name, partition_count)
    model.rlx_config = sorted(rlx_config)
    model.geometry_roots = sorted(geometry_roots)
    yield_blobs = []

    top_docs = []
    for inst in sorted(spf_file, key=lambda r: r.id):
        if is_embedded_target(inst.id):
            continue
        top_docs.append(_instance_to_doc(inst, []))

    # value instances nothing embedded become their own documents so no
    # data is dropped; normally the set is empty
    orphans = [iid for iid in sorted(spf_file.instances)
               if is_embedded_target(iid) and iid not in embedded_ids]
    for iid in orphans:
        top_docs.append(_instance_to_doc(spf_file.instances[iid], []))

    extra_indexes = extra_indexes or {}
    for doc in top_docs:
        index_paths = _default_indexes(schema, doc.type_name)
        index_paths.extend(extra_indexes.get(doc.type_name, ()))
        coll = model.ensure_collection(doc.type_name, index_paths)
        coll.add(doc)
    for blob_id, data in yield_blobs:
        model.blobs.put(blob_id, data, "text/step-payload")
    for coll in model.collections.values():
        coll.build_indexes()
    model.classification = {n: c.value for n, c in classes.items()}
    model.report = {
        "instances": len(spf_file),
        "documents": sum(len(c) for c in model.collections.values()),
        "embedded_instances": len(embedded_ids),
        "orphan_value_documents": len(orphans),
        "blobs": len(model.blobs),
    }
    return model


def _default_indexes(schema, decl):
    paths = []
    for attr in schema.all_attributes(decl):
        if attr.name == "Name" or not schema.is_scalar_target(attr.target):
            paths.append(attr.name)
    return paths


def reference_edges(model):
    """(src key, dst key) multiset over refs and embedded sub-documents.

    Edges inside a value instance are counted once per unique instance, no
    matter how many owners embed a copy of it.
    """
    edges = []
    seen_embedded = set()

    def walk_embedded(obj):
        key = obj["key"]
        first_visit = key not in seen_embedded
        seen_embedded.add(key)
        for targets in obj.get("refs", {}).values():
            if first_visit:
                for t in targets:
                    edges.append((key, t))
        for value in obj.get("embedded", {}).values():
            subs = value if isinstance(value, list) else [value]
            for sub in subs:
                if isinstance(sub, dict) and "key" in sub:
                    if first_visit:
                        edges.append((key, sub["key"]))
                    walk_embedded(sub)

    for coll in model.collections.values():
        for doc in coll.ordered():
            for targets in doc.refs.values():
                for t in targets:
                    edges.append((doc.key, t))
            for value in doc.embedded.values():
                subs = value if isinstance(value, list) else [value]
                for sub in subs:
                    if isinstance(sub, dict) and "key" in sub:
                        edges.append((doc.key, sub["key"]))
                        walk_embedded(sub)
    return sorted(edges)


def _plain_value(value):
    if isinstance(value, spfmod.Enum):
        return value.name
    if isinstance(value, spfmod.Typed):
        return _plain_value(value.value)
    return value
