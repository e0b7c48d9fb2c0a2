"""Plan execution: walk the anchor chain from the innermost keyword
outward, joining through relationship collections, then group and
aggregate. Collection reads are counted per hop so pre-join savings are
observable.
"""

from dataclasses import dataclass

from .errors import ExecutionError
from .planner import (CastStep, DerefStep, PROPERTY_KIND_NAMES, QUANTITY_KINDS,
                      RelStep, ResultRow, ResultSet)
from .prejoin import materialize, order_value
from .store import AccessLog, Or, TRUE, eq


@dataclass
class _Item:
    """A document or embedded sub-document flowing through a join."""

    key: str
    type_name: str
    data: dict  # full document dict

    @classmethod
    def from_document(cls, doc):
        return cls(doc.key, doc.type_name, doc.as_dict())

    @classmethod
    def from_embedded(cls, obj):
        return cls(obj.get("key", ""), obj.get("type", ""), obj)

    def scalar(self, name):
        return self.data.get("scalars", {}).get(name)

    def refs(self, name):
        return self.data.get("refs", {}).get(name, [])

    def embedded(self, name):
        value = self.data.get("embedded", {}).get(name)
        if value is None:
            return []
        return value if isinstance(value, list) else [value]

    def display(self):
        return self.scalar("Name") or self.key


class Executor:
    def __init__(self, schema, model):
        self.schema = schema
        self.model = model
        self._subtype_cache = {}

    def collections_for(self, entity):
        if entity not in self._subtype_cache:
            if entity in self.schema.entities:
                names = [n for n in self.schema.subtypes_of(entity)
                         if self.model.has_collection(n)]
            else:
                names = [entity] if self.model.has_collection(entity) else []
            self._subtype_cache[entity] = sorted(names)
        return self._subtype_cache[entity]

    def _type_matches(self, type_name, entity):
        if type_name == entity:
            return True
        if type_name in self.schema.entities and entity in self.schema.entities:
            return self.schema.is_kind_of(type_name, entity)
        return False

    # -- plan execution -----------------------------------------------------

    def execute(self, plan, use_prejoin=False):
        access = AccessLog()
        hops = []
        prejoined = []
        if use_prejoin:
            for spec in plan.prejoin_requests:
                materialize(self.model, spec)
                prejoined.append(spec.output_name())
        contributions = []
        branch_subjects = []
        for branch in plan.branches:
            rows = self._run_branch(branch, plan, access, hops, use_prejoin)
            contributions.append(rows)
            branch_subjects.append({r["subject_key"] for r in rows})
        if plan.set_op == "intersection" and len(contributions) > 1:
            shared = set.intersection(*branch_subjects)
            merged = [r for r in contributions[0] if r["subject_key"] in shared]
        else:
            merged = [r for rows in contributions for r in rows]

        result = self._aggregate(plan, merged)
        result.provenance = {
            "accesses": access.total(),
            "by_collection": access.by_collection(),
            "events": [list(e) for e in access.events],
            "hops": hops,
            "prejoined": prejoined,
            "anchors": plan.anchor_entities(),
            "hop_labels": plan.hop_labels(),
        }
        return result

    def _run_branch(self, branch, plan, access, hops, use_prejoin):
        anchors = branch.anchors
        inner = anchors[-1]
        inner_idx = len(anchors) - 1

        rows = None
        if use_prejoin and len(anchors) > 1:
            rows = self._prejoined_scan(branch, plan, access, hops)
        if rows is None:
            start = access.total()
            items = self._scan_anchor(inner, access, f"anchor:{inner.keyword}")
            kept = self._filter_items(inner, items, access)
            rows = [{inner_idx: item} for item in items if id(item) in kept]
            if len(anchors) > 1:
                rows = self._apply_traversal(anchors[inner_idx], rows,
                                             inner_idx, access)
                pair = sum(1 for _, label in access.events[start:]
                           if label == f"anchor:{inner.keyword}"
                           or label == f"hop:{inner.keyword}:join")
                hops.append({
                    "hop": f"{inner.keyword}->{anchors[inner_idx - 1].keyword}",
                    "pair_accesses": pair, "prejoined": False})
                items = [r[inner_idx - 1] for r in rows]
                kept = self._filter_items(anchors[inner_idx - 1], items, access)
                rows = [r for r in rows if id(r[inner_idx - 1]) in kept]

        for i in range(inner_idx - 1, 0, -1):
            rows = self._apply_traversal(anchors[i], rows, i, access)
            items = [r[i - 1] for r in rows]
            kept = self._filter_items(anchors[i - 1], items, access)
            rows = [r for r in rows if id(r[i - 1]) in kept]

        subject_idx = branch.subject_index()
        out = []
        for row in rows:
            subject = row[subject_idx]
            group = {}
            for idx in range(subject_idx + 1, len(anchors)):
                group[anchors[idx].keyword] = row[idx].display()
            out.append({
                "subject_key": subject.key,
                "subject": subject,
                "root": row[0],
                "group": group,
                "branch": branch,
            })
        return out

    def _prejoined_scan(self, branch, plan, access, hops):
        """Replace the innermost anchor scan plus its join scan with one
        read of the pre-joined collection, when one was requested."""
        anchors = branch.anchors
        inner_idx = len(anchors) - 1
        inner = anchors[inner_idx]
        if not inner.traversal or inner.checks:
            return None
        rel_steps = [s for s in inner.traversal.steps if isinstance(s, RelStep)]
        if len(rel_steps) != 1 or not isinstance(
                inner.traversal.steps[-1], (RelStep, CastStep)):
            return None
        step = rel_steps[0]
        spec = None
        for candidate in plan.prejoin_requests:
            if candidate.a_collection == step.doc_entity \
                    and candidate.b_collection == inner.entity:
                spec = candidate
                break
        if spec is None or not self.model.has_collection(spec.output_name()):
            return None
        joined = self.model.scan(spec.output_name(), inner.predicate, access,
                                 f"hop:{inner.keyword}:prejoined")
        hops.append({"hop": f"{inner.keyword}->{anchors[inner_idx - 1].keyword}",
                     "pair_accesses": 1, "prejoined": True})
        # each joined row: rel document key + out refs + inner fields
        pairs = []
        for doc in joined:
            out_refs = doc.scalars.get(step.out_field) or []
            if isinstance(out_refs, str):
                out_refs = [out_refs]
            inner_item = _Item(
                key=str(doc.scalars.get("b_key")),
                type_name=inner.entity,
                data={"key": str(doc.scalars.get("b_key")), "type": inner.entity,
                      "scalars": {f: doc.scalars.get(f) for f in spec.b_payload}})
            pairs.append((inner_item, out_refs))
        rows = self._deref_pairs(pairs, step, anchors[inner_idx - 1],
                                 inner_idx, access)
        return rows

    def _deref_pairs(self, pairs, step, parent_anchor, inner_idx, access):
        all_refs = sorted({r for _, refs in pairs for r in refs}, key=order_value)
        fetched = {}
        if step.out_embedded:
            raise ExecutionError("pre-joined hop cannot end in embedded data")
        for coll in self.collections_for(step.target_entity):
            for doc in self.model.fetch(coll, all_refs, access,
                                        f"fetch:{step.target_entity}"):
                fetched[doc.key] = _Item.from_document(doc)
        rows = []
        for inner_item, refs in pairs:
            for ref in refs:
                item = fetched.get(ref)
                if item is None:
                    continue
                rows.append({inner_idx: inner_item, inner_idx - 1: item})
        kept = self._filter_items(parent_anchor,
                                  [r[inner_idx - 1] for r in rows], access)
        return [r for r in rows if id(r[inner_idx - 1]) in kept]

    def _scan_anchor(self, anchor, access, label):
        items = []
        for coll in self.collections_for(anchor.entity):
            for doc in self.model.scan(coll, anchor.predicate, access, label):
                items.append(_Item.from_document(doc))
        items.sort(key=lambda i: order_value(i.key))
        return items

    def _filter_items(self, anchor, items, access):
        """Apply an anchor's own predicate and traversal checks; returns the
        id() set of surviving items."""
        kept = set()
        passing_keys = None
        for check in anchor.checks:
            keys = self._check_keys(anchor, check, items, access)
            passing_keys = keys if passing_keys is None else passing_keys & keys
        for item in items:
            if not self._type_matches(item.type_name, anchor.entity):
                continue
            if anchor.predicate is not TRUE and not anchor.predicate.matches(item.data):
                continue
            if passing_keys is not None and item.key not in passing_keys:
                continue
            kept.add(id(item))
        return kept

    def _check_keys(self, anchor, check, items, access):
        """Keys of items passing a traversal property check."""
        rows = [{0: item} for item in items]
        rows = self._run_steps(check.traversal.steps, rows, 0, access,
                               label=f"check:{anchor.keyword}")
        passing = set()
        for row in rows:
            value = row[-1].scalar(check.attribute)
            if isinstance(value, str) and value.lower() in check.values:
                passing.add(row[0].key)
            elif value in check.values:
                passing.add(row[0].key)
        return passing

    def _apply_traversal(self, child_anchor, rows, child_idx, access):
        out_rows = self._run_steps(child_anchor.traversal.steps, rows, child_idx,
                                   access, label=f"hop:{child_anchor.keyword}")
        # re-key: traversal result lands at child_idx - 1
        final = []
        for row in out_rows:
            new_row = {k: v for k, v in row.items() if k >= 0}
            new_row[child_idx - 1] = row[-1]
            final.append(new_row)
        return final

    def _run_steps(self, steps, rows, start_idx, access, label):
        """Run traversal steps; each row gains a -1 entry for its current
        position (starting at the row's start_idx item)."""
        current = []
        for row in rows:
            started = dict(row)
            started[-1] = row[start_idx]
            current.append(started)
        for step in steps:
            if isinstance(step, CastStep):
                current = [row for row in current
                           if self._type_matches(row[-1].type_name,
                                                 step.target_entity)]
                continue
            if isinstance(step, RelStep):
                current = self._join_step(step, current, access, label)
                continue
            if isinstance(step, DerefStep):
                current = self._deref_step(step, current, access, label)
                continue
            raise ExecutionError(f"unknown step {step!r}")
        return current

    def _join_step(self, step, rows, access, label):
        keys = sorted({row[-1].key for row in rows}, key=order_value)
        if not keys:
            return []
        predicate = Or([eq(step.in_field, k) for k in keys]) if keys else TRUE
        by_key = {}
        for coll in self.collections_for(step.doc_entity):
            for doc in self.model.scan(coll, predicate, access, f"{label}:join"):
                for target in doc.refs.get(step.in_field, []):
                    by_key.setdefault(target, []).append(doc)
        out = []
        if step.out_embedded:
            for row in rows:
                for rel_doc in by_key.get(row[-1].key, []):
                    for sub in _embedded_list(rel_doc, step.out_field):
                        item = _Item.from_embedded(sub)
                        if self._type_matches(item.type_name, step.target_entity):
                            new_row = dict(row)
                            new_row[-1] = item
                            out.append(new_row)
            return out
        # referenced documents: one fetch per target collection
        wanted = sorted({ref for docs in by_key.values() for doc in docs
                         for ref in doc.refs.get(step.out_field, [])},
                        key=order_value)
        fetched = {}
        for coll in self.collections_for(step.target_entity):
            for doc in self.model.fetch(coll, wanted, access, f"{label}:fetch"):
                fetched[doc.key] = _Item.from_document(doc)
        for row in rows:
            for rel_doc in by_key.get(row[-1].key, []):
                for ref in rel_doc.refs.get(step.out_field, []):
                    item = fetched.get(ref)
                    if item is not None:
                        new_row = dict(row)
                        new_row[-1] = item
                        out.append(new_row)
        return out

    def _deref_step(self, step, rows, access, label):
        out = []
        if step.out_embedded:
            for row in rows:
                for sub in _embedded_list_item(row[-1], step.field_name):
                    item = _Item.from_embedded(sub)
                    if self._type_matches(item.type_name, step.target_entity):
                        new_row = dict(row)
                        new_row[-1] = item
                        out.append(new_row)
            return out
        wanted = sorted({ref for row in rows for ref in row[-1].refs(step.field_name)},
                        key=order_value)
        fetched = {}
        for coll in self.collections_for(step.target_entity):
            for doc in self.model.fetch(coll, wanted, access, f"{label}:fetch"):
                fetched[doc.key] = _Item.from_document(doc)
        for row in rows:
            for ref in row[-1].refs(step.field_name):
                item = fetched.get(ref)
                if item is not None:
                    new_row = dict(row)
                    new_row[-1] = item
                    out.append(new_row)
        return out

    # -- aggregation ---------------------------------------------------------

    def _aggregate(self, plan, merged):
        group_fields = list(plan.group_anchors)
        if plan.aggregation == "sum":
            return self._aggregate_sum(plan, merged, group_fields)
        if plan.aggregation == "project":
            return self._aggregate_project(plan, merged, group_fields)
        return self._aggregate_list(plan, merged, group_fields)

    def _aggregate_sum(self, plan, merged, group_fields):
        items = []
        for row in merged:
            for kind, unit, value in _measure_values(row["root"]):
                if value is None:
                    continue
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise ExecutionError(
                        f"sum over non-numeric quantity value {value!r}")
                items.append((kind, unit, float(value), row))
        kinds = sorted({kind for kind, _, _, _ in items})
        split_kinds = len(kinds) > 1
        sums = {}
        for kind, unit, value, row in items:
            key = ((kind,) if split_kinds else ()) + tuple(
                row["group"].get(f, "∅") for f in group_fields)
            entry = sums.setdefault(key, {"value": 0.0, "keys": [], "unit": unit,
                                          "kind": kind})
            entry["value"] += value
            if row["subject_key"] not in entry["keys"]:
                entry["keys"].append(row["subject_key"])
        fields = (["kind"] if split_kinds else []) + group_fields
        rows = [ResultRow(group=key, value=entry["value"], keys=entry["keys"],
                          unit=entry["unit"], extra={"kind": entry["kind"]})
                for key, entry in sums.items()]
        rows.sort(key=lambda r: tuple(order_value(v) for v in r.group))
        shape = _shape_for(len(fields), len(rows))
        return ResultSet(rows=rows, shape=shape, group_fields=fields,
                         units={k: _unit_for(k) for k in kinds})

    def _aggregate_project(self, plan, merged, group_fields):
        branch = plan.branches[0]
        attribute = branch.root.binding.attribute or "Name"
        buckets = {}
        for row in merged:
            value = row["root"].scalar(attribute)
            if value is None:
                continue
            key = tuple(row["group"].get(f, "∅") for f in group_fields) + (str(value),)
            entry = buckets.setdefault(key, {"count": 0, "keys": []})
            entry["count"] += 1
            if row["subject_key"] not in entry["keys"]:
                entry["keys"].append(row["subject_key"])
        fields = group_fields + [attribute]
        rows = [ResultRow(group=key, value=entry["count"], keys=entry["keys"])
                for key, entry in buckets.items()]
        rows.sort(key=lambda r: tuple(order_value(v) for v in r.group))
        shape = _shape_for(len(fields), len(rows))
        if len(rows) == 1 and not group_fields:
            # a single projected value reads as the value itself
            rows[0] = ResultRow(group=rows[0].group, value=rows[0].group[-1],
                                keys=rows[0].keys)
            shape = "single_value"
        return ResultSet(rows=rows, shape=shape, group_fields=fields)

    def _aggregate_list(self, plan, merged, group_fields):
        branch = plan.branches[0]
        subject_entity = branch.anchors[branch.subject_index()].entity
        seen = {}
        for row in merged:
            key = row["subject_key"]
            if key not in seen:
                seen[key] = row
        rows = []
        sequence = self._sequence_map() if self._is_process(subject_entity) else {}
        geometric = False
        for key, row in sorted(seen.items(), key=lambda kv: order_value(kv[0])):
            subject = row["subject"]
            extra = {"type": subject.type_name}
            if subject.data.get("blobs"):
                geometric = True
                extra["blobs"] = subject.data["blobs"]
            if self._is_process(subject.type_name):
                extra.update(_task_fields(subject))
                extra["successors"] = sequence.get(key, [])
            group = tuple(row["group"].get(f, "∅") for f in group_fields)
            rows.append(ResultRow(group=group, value=subject.display(),
                                  keys=[key], extra=extra))
        has_links = any(r.extra.get("successors") for r in rows)
        in_result = {r.keys[0] for r in rows}
        for r in rows:
            if "successors" in r.extra:
                r.extra["successors"] = [s for s in r.extra["successors"]
                                         if s in in_result]
        if has_links:
            shape = "net"
        elif geometric:
            shape = "geometric"
        else:
            shape = _shape_for(len(group_fields), len(rows))
        return ResultSet(rows=rows, shape=shape, group_fields=group_fields)

    def _is_process(self, entity):
        return (entity in self.schema.entities
                and self.schema.is_kind_of(entity, "IfcProcess"))

    def _sequence_map(self):
        mapping = {}
        for coll in self.collections_for("IfcRelSequence"):
            for doc in self.model.collection(coll).ordered():
                for src in doc.refs.get("RelatingProcess", []):
                    for dst in doc.refs.get("RelatedProcess", []):
                        mapping.setdefault(src, []).append(dst)
        return mapping


def _embedded_list(doc, field_name):
    value = doc.embedded.get(field_name)
    if value is None:
        return []
    return value if isinstance(value, list) else [value]


def _embedded_list_item(item, field_name):
    return item.embedded(field_name)


def _unit_for(kind):
    for name, (k, unit, _) in QUANTITY_KINDS.items():
        if k == kind:
            return unit
    return PROPERTY_KIND_NAMES.get(kind, (kind, ""))[1]


def _shape_for(dims, row_count):
    if dims >= 2:
        return "tree"
    if dims == 1:
        return "array"
    return "single_value" if row_count == 1 else "array"


def _measure_values(item):
    """(kind, unit, value) triples from a measure landing item."""
    if item.type_name in QUANTITY_KINDS:
        kind, unit, field = QUANTITY_KINDS[item.type_name]
        return [(kind, unit, item.scalar(field))]
    if item.type_name == "IfcElementQuantity":
        out = []
        for sub in item.embedded("Quantities"):
            t = sub.get("type")
            if t in QUANTITY_KINDS:
                kind, unit, field = QUANTITY_KINDS[t]
                out.append((kind, unit, sub.get("scalars", {}).get(field)))
        return out
    # property-set fallback: numeric single values whose name reads as a
    # measure (Volume, Weight, ...)
    name = (item.scalar("Name") or "").lower()
    if name in PROPERTY_KIND_NAMES:
        kind, unit = PROPERTY_KIND_NAMES[name]
        value = item.scalar("NominalValue")
        return [(kind, unit, value)]
    return []


def _task_fields(item):
    fields = {
        "status": item.scalar("Status"),
        "object_type": item.scalar("ObjectType"),
        "milestone": bool(item.scalar("IsMilestone")),
        "task_id": item.scalar("TaskId"),
    }
    times = item.embedded("TaskTime")
    if times:
        t = times[0].get("scalars", {})
        fields.update({"start": t.get("ScheduleStart"),
                       "finish": t.get("ScheduleFinish"),
                       "duration": t.get("ScheduleDuration"),
                       "percent_complete": t.get("PercentComplete")})
    return fields
