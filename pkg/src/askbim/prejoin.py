"""Pre-join of two collections via map, merge and expand phases.

Joining B into A turns the two reads needed to fetch an A document with its
B fields into one read of the joined collection. The public operation is
synchronous; the map phase can fan out over partitions.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import DuplicateKeyError, PrejoinError
from .store import TRUE, Collection, Document, resolve_path


@dataclass(frozen=True)
class PrejoinSpec:
    a_collection: str
    b_collection: str
    a_key_field: str = "key"
    b_ref_field: str = ""
    b_key_field: str = "key"
    a_payload: tuple = ()
    b_payload: tuple = ()
    output_collection: str = ""

    def output_name(self):
        return self.output_collection or f"{self.a_collection}__{self.b_collection}"


@dataclass
class TempRecord:
    """One map emission; exactly one side carries data."""

    b_key: object
    a_key: object = None
    a_payload: tuple = None
    b_payload: tuple = None

    @property
    def side(self):
        return "A" if self.a_key is not None else "B"


@dataclass
class MergedRecord:
    b_key: object
    b_payload: tuple
    col: list = field(default_factory=list)  # [(a_key, a_payload), ...] sorted


def order_value(value):
    """Total order over the scalar values keys may take."""
    if value is None:
        return (0, 0.0, "")
    if isinstance(value, bool):
        return (1, float(value), "")
    if isinstance(value, (int, float)):
        return (2, float(value), "")
    if isinstance(value, str) and value.startswith("#") and value[1:].isdigit():
        return (3, float(value[1:]), "")
    return (4, 0.0, str(value))


def _field_value(doc, path):
    """Single value for scalar fields, the whole list for multi-valued."""
    values = resolve_path(doc, path)
    if not values:
        return None
    return values[0] if len(values) == 1 else list(values)


def _join_key(doc, path):
    """The single key a ref field holds; None for absent or multi-valued."""
    values = resolve_path(doc, path)
    if len(values) != 1:
        return None
    return values[0]


def map_phase(documents, spec, side):
    """TempRecords for one side; A documents missing the ref are skipped."""
    records = []
    skipped = 0
    if side == "A":
        for doc in documents:
            b_key = _join_key(doc, spec.b_ref_field)
            if b_key is None:
                skipped += 1
                continue
            records.append(TempRecord(
                b_key=b_key,
                a_key=_field_value(doc, spec.a_key_field),
                a_payload=tuple(_field_value(doc, p) for p in spec.a_payload),
            ))
    elif side == "B":
        for doc in documents:
            records.append(TempRecord(
                b_key=_field_value(doc, spec.b_key_field),
                b_payload=tuple(_field_value(doc, p) for p in spec.b_payload),
            ))
    else:
        raise PrejoinError(f"unknown map side {side!r}")
    return records, skipped


def reduce_merge(records):
    """Merge temp records sharing a b_key; B keys are primary.

    Returns (merged records, a_orphans) where orphans are A-side records
    whose b_key has no B-side partner.
    """
    groups = {}
    order = []
    for rec in records:
        bucket = groups.get(rec.b_key)
        if bucket is None:
            bucket = groups[rec.b_key] = {"b": None, "a": []}
            order.append(rec.b_key)
        if rec.side == "B":
            if bucket["b"] is not None:
                raise DuplicateKeyError(
                    f"duplicate B-side key {rec.b_key!r}: B keys are primary")
            bucket["b"] = rec
        else:
            bucket["a"].append(rec)
    merged = []
    a_orphans = 0
    for b_key in sorted(order, key=order_value):
        bucket = groups[b_key]
        if bucket["b"] is None:
            a_orphans += len(bucket["a"])
            continue
        col = sorted(((r.a_key, r.a_payload) for r in bucket["a"]),
                     key=lambda pair: order_value(pair[0]))
        deduped = []
        for a_key, a_payload in col:
            if deduped and deduped[-1][0] == a_key:
                raise DuplicateKeyError(
                    f"duplicate A-side key {a_key!r} for B key {b_key!r}")
            deduped.append((a_key, a_payload))
        merged.append(MergedRecord(b_key, bucket["b"].b_payload, deduped))
    return merged, a_orphans


def expand(merged, spec):
    """Output collection: one document per col entry, (b_key, a_key) order."""
    coll = Collection(spec.output_name())
    rows = []
    for record in merged:
        for a_key, a_payload in record.col:
            rows.append((record.b_key, a_key, a_payload, record.b_payload))
    rows.sort(key=lambda r: (order_value(r[0]), order_value(r[1])))
    b_orphans = sum(1 for record in merged if not record.col)
    for i, (b_key, a_key, a_payload, b_payload) in enumerate(rows):
        scalars = {"a_key": a_key, "b_key": b_key}
        for name, value in zip(spec.a_payload, a_payload):
            scalars[name] = value
        for name, value in zip(spec.b_payload, b_payload):
            scalars[f"b.{name}" if name in scalars else name] = value
        coll.add(Document(key=f"j{i:08d}", type_name=spec.output_name(),
                          scalars=scalars))
    return coll, b_orphans


def prejoin(model, spec, parallel=1, access=None):
    """Run the full pre-join; returns (collection, report).

    `parallel` > 1 maps partitions concurrently; the merged output is
    identical to the serial run.
    """
    a_coll = model.collection(spec.a_collection)
    b_coll = model.collection(spec.b_collection)
    if access is not None:
        access.record(spec.a_collection, "prejoin-map")
        access.record(spec.b_collection, "prejoin-map")

    def run_side(coll, side):
        if parallel <= 1:
            return map_phase(coll.ordered(), spec, side)
        chunks = [coll.partition_documents(p) for p in range(coll.partition_count)]
        records, skipped = [], 0
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            for recs, skip in pool.map(lambda c: map_phase(c, spec, side), chunks):
                records.extend(recs)
                skipped += skip
        return records, skipped

    a_records, skipped = run_side(a_coll, "A")
    b_records, _ = run_side(b_coll, "B")
    merged, a_orphans = reduce_merge(a_records + b_records)
    coll, b_orphans = expand(merged, spec)
    report = {
        "mapped_a": len(a_records),
        "mapped_b": len(b_records),
        "skipped": skipped,
        "merged": len(merged),
        "a_orphans": a_orphans,
        "b_orphans": b_orphans,
        "expanded": len(coll),
        "accesses": 2,
    }
    return coll, report


def materialize(model, spec, parallel=1):
    """Run the pre-join and register its output collection on the model."""
    name = spec.output_name()
    if model.has_collection(name):
        return model.collection(name), model.prejoin_reports()[name]
    coll, report = prejoin(model, spec, parallel=parallel)
    model.collections[name] = coll
    model.prejoin_reports()[name] = report
    return coll, report


def fetch_with_refs(model, a_collection, b_ref_field, b_collection, b_fields,
                    predicate=TRUE, access=None, prejoined=None):
    """Each matching A document with its B fields attached.

    Two collection accesses without a pre-joined collection, one with it.
    """
    if prejoined is not None and model.has_collection(prejoined):
        rows = []
        for doc in model.scan(prejoined, predicate, access, "prejoined"):
            rows.append((doc.scalars.get("a_key"),
                         {f: doc.scalars.get(f) for f in b_fields}))
        return rows
    a_docs = model.scan(a_collection, predicate, access, "hop-A")
    wanted = {}
    for doc in a_docs:
        b_key = _field_value(doc, b_ref_field)
        if b_key is not None:
            wanted.setdefault(b_key, []).append(doc)
    b_docs = model.fetch(b_collection, list(wanted), access, "hop-B")
    rows = []
    for b_doc in b_docs:
        fields = {f: _field_value(b_doc, f) for f in b_fields}
        for a_doc in wanted.get(b_doc.key, []):
            rows.append((a_doc.key, fields))
    rows.sort(key=lambda r: order_value(r[0]))
    return rows


def group_summarize(documents, group_fields, aggregate):
    """Group rows by field values and summarise each group.

    `aggregate` is ("count",), ("sum", field) or ("list", field). Missing
    group values fall into the "∅" bucket. Rows come back sorted by group
    key.
    """
    kind = aggregate[0]
    groups = {}
    for doc in documents:
        key = []
        for f in group_fields:
            value = _field_value(doc, f)
            key.append("∅" if value is None else value)
        key = tuple(key)
        bucket = groups.setdefault(key, [])
        bucket.append(doc)
    rows = []
    for key in sorted(groups, key=lambda k: tuple(order_value(v) for v in k)):
        docs = groups[key]
        if kind == "count":
            value = len(docs)
        elif kind == "sum":
            value = 0.0
            for doc in docs:
                v = _field_value(doc, aggregate[1])
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    raise PrejoinError(
                        f"sum over non-numeric field {aggregate[1]!r}: {v!r}")
                value += float(v)
        elif kind == "list":
            value = [_field_value(doc, aggregate[1]) for doc in docs]
        else:
            raise PrejoinError(f"unknown aggregate {kind!r}")
        rows.append({"group": key, "value": value,
                     "keys": [d.key for d in docs]})
    return rows
