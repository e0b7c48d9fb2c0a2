"""Query planner and executor.

Fuses extracted keywords, dictionary bindings and schema-graph paths into a
QueryPlan, transforms constraints into predicates per the and/or rules, and
executes the plan against a model with per-hop access accounting and
optional pre-joined collections.

A plan is a set of branches. Each branch is a chain of anchors from the
outermost keyword's entity (the root) down to the innermost; execution
starts at the innermost anchor and joins upward hop by hop.
"""

from dataclasses import dataclass, field

from . import graph as graphmod
from .dictionary import Binding
from .errors import PlanError, UnreachableAnchorError
from .prejoin import PrejoinSpec
from .store import And, Comparison, Not, Or, TRUE, eq

QUANTITY_KINDS = {
    "IfcQuantityVolume": ("volume", "m3", "VolumeValue"),
    "IfcQuantityWeight": ("weight", "kg", "WeightValue"),
    "IfcQuantityLength": ("length", "m", "LengthValue"),
    "IfcQuantityArea": ("area", "m2", "AreaValue"),
    "IfcQuantityCount": ("count", "", "CountValue"),
}
# property names accepted on the property-set fallback route
PROPERTY_KIND_NAMES = {"volume": ("volume", "m3"), "weight": ("weight", "kg"),
                       "mass": ("weight", "kg"), "length": ("length", "m"),
                       "area": ("area", "m2"), "count": ("count", "")}

TASK_ROOT = "IfcTask"


# --- plan pieces ----------------------------------------------------------

@dataclass
class Traversal:
    """A compiled anchor-to-anchor traversal in execution order."""

    steps: list                 # [RelStep | CastStep]
    hop_labels: list            # edge labels for display

    def to_json(self):
        return {"steps": [s.to_json() for s in self.steps],
                "labels": self.hop_labels}


@dataclass
class CastStep:
    """Instance-level no-op: narrow the document type set."""

    target_entity: str

    def to_json(self):
        return {"kind": "cast", "target": self.target_entity}


@dataclass
class RelStep:
    """Join through a document collection: enter by `in_field` holding the
    current keys, leave by `out_field` (a ref, or an embedded sub-document
    when the target is value data)."""

    doc_entity: str
    in_field: str
    out_field: str
    out_embedded: bool
    target_entity: str

    def to_json(self):
        return {"kind": "join", "via": self.doc_entity, "in": self.in_field,
                "out": self.out_field, "embedded": self.out_embedded,
                "target": self.target_entity}


@dataclass
class DerefStep:
    """Follow a field the current documents already hold: fetch referenced
    documents, or dig into embedded value data."""

    field_name: str
    out_embedded: bool
    target_entity: str

    def to_json(self):
        return {"kind": "deref", "field": self.field_name,
                "embedded": self.out_embedded, "target": self.target_entity}


@dataclass
class PropertyCheck:
    """A predicate that must traverse away from the anchor to test a value
    (e.g. the material of an element lives on the association document)."""

    traversal: Traversal
    attribute: str
    values: list                # disjunctive

    def to_json(self):
        return {"kind": "property-check", "attribute": self.attribute,
                "values": self.values,
                "via": self.traversal.hop_labels}


@dataclass
class Anchor:
    keyword: str
    concept: str
    binding: Binding
    entity: str                      # entity whose instances this anchor holds
    role: str                        # subject | container | measure | attribute
    predicate: object = TRUE         # store predicate on own attributes
    checks: list = field(default_factory=list)  # [PropertyCheck]
    traversal: Traversal = None      # from the anchor below (execution order)

    def to_json(self):
        return {"keyword": self.keyword, "concept": self.concept,
                "binding": self.binding.to_json(), "entity": self.entity,
                "role": self.role, "predicate": self.predicate.to_json(),
                "checks": [c.to_json() for c in self.checks],
                "traversal": self.traversal.to_json() if self.traversal else None}


@dataclass
class Branch:
    anchors: list                    # root first, innermost last

    @property
    def root(self):
        return self.anchors[0]

    def subject_index(self):
        if self.root.role in ("measure", "attribute") and len(self.anchors) > 1:
            return 1
        return 0

    def to_json(self):
        return {"anchors": [a.to_json() for a in self.anchors]}


@dataclass
class QueryPlan:
    branches: list
    set_op: str = "union"            # union | intersection over branches
    group_anchors: list = field(default_factory=list)  # keyword names of dims
    aggregation: str = "list"        # sum | list | project | count
    prejoin_requests: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self):
        return {
            "branches": [b.to_json() for b in self.branches],
            "set_op": self.set_op,
            "grouping": list(self.group_anchors),
            "aggregation": self.aggregation,
            "prejoin_requests": [vars(p) | {"a_payload": list(p.a_payload),
                                            "b_payload": list(p.b_payload)}
                                 for p in self.prejoin_requests],
            "notes": list(self.notes),
        }

    def anchor_entities(self):
        out = []
        for branch in self.branches:
            for anchor in branch.anchors:
                if anchor.entity not in out:
                    out.append(anchor.entity)
        return out

    def hop_labels(self):
        out = []
        for branch in self.branches:
            for anchor in branch.anchors:
                if anchor.traversal:
                    out.extend(anchor.traversal.hop_labels)
        return out


@dataclass
class ResultRow:
    group: tuple
    value: object
    keys: list
    unit: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {"group": list(self.group), "value": self.value,
                "keys": self.keys, "unit": self.unit, "extra": self.extra}


@dataclass
class ResultSet:
    rows: list
    shape: str                       # single_value | array | tree | net | geometric
    group_fields: list
    units: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_json(self):
        return {"rows": [r.to_json() for r in self.rows], "shape": self.shape,
                "group_fields": self.group_fields, "units": self.units,
                "provenance": self.provenance}

    @classmethod
    def from_json(cls, obj):
        rows = [ResultRow(group=tuple(r["group"]), value=r["value"],
                          keys=r.get("keys", []), unit=r.get("unit", ""),
                          extra=r.get("extra", {})) for r in obj["rows"]]
        return cls(rows=rows, shape=obj["shape"],
                   group_fields=obj.get("group_fields", []),
                   units=obj.get("units", {}),
                   provenance=obj.get("provenance", {}))


def classify_results(result, dimensions=None):
    """Hierarchical grouping of result rows in dimension order.

    When mixed units are present the measure kind splits the rows first
    (weight apart from volume), then each group nests by the remaining
    dimensions. Returns {label, children|rows} nesting.
    """
    fields = list(dimensions) if dimensions is not None else list(result.group_fields)
    for f in fields:
        if f not in result.group_fields:
            raise PlanError(f"unknown grouping dimension {f!r}")
    positions = [result.group_fields.index(f) for f in fields]
    if "kind" in result.group_fields and "kind" not in fields:
        positions.insert(0, result.group_fields.index("kind"))
        fields.insert(0, "kind")

    def nest(rows, level):
        if level >= len(positions):
            return [{"label": " / ".join(str(g) for g in row.group) or "all",
                     "value": row.value, "unit": row.unit, "keys": row.keys}
                    for row in rows]
        buckets = {}
        for row in rows:
            buckets.setdefault(row.group[positions[level]], []).append(row)
        return [{"label": str(label), "dimension": fields[level],
                 "children": nest(bucket, level + 1)}
                for label, bucket in sorted(buckets.items(), key=lambda kv: str(kv[0]))]

    return {"label": "results", "children": nest(result.rows, 0)}


# --- plan building ---------------------------------------------------------

class Planner:
    def __init__(self, schema, schema_graph, dictionary):
        self.schema = schema
        self.graph = schema_graph
        self.dictionary = dictionary

    # .. binding helpers ..

    def _entity_for(self, binding):
        entity = binding.entity
        if entity not in self.schema.entities:
            raise PlanError(f"binding entity {entity!r} is not in the schema")
        return entity

    def _role_of(self, concept, binding):
        if binding.entity in QUANTITY_KINDS or binding.entity in (
                "IfcElementQuantity", "IfcProperty"):
            return "measure"
        if concept.kind == "characteristic" and binding.attribute:
            return "attribute"
        return "subject"

    def _material_hint(self, ks, dictionary):
        hints = set()
        for constraint in ks.constraints:
            target_kw = ks.keywords[constraint.target]
            try:
                subject = dictionary.resolve_concept(target_kw.word)
            except Exception:
                continue
            prop = dictionary.find_property_for_value(subject, constraint.word)
            if prop.preferred_name == "material":
                hints.add(dictionary.normalize(constraint.word))
        if len(hints) == 1:
            return hints.pop()
        return None

    def model_flags(self, model):
        """Context flags derived from what the model actually contains."""
        has_quantities = False
        if model.has_collection("IfcRelDefinesByProperties"):
            for doc in model.collection("IfcRelDefinesByProperties").ordered():
                sub = doc.embedded.get("RelatingPropertyDefinition")
                if isinstance(sub, dict) and sub.get("type") == "IfcElementQuantity":
                    has_quantities = True
                    break
        return {"no_quantity_instances": not has_quantities}

    # .. constraint transformation ..

    def transform_constraints(self, ks, keyword_index, anchor_entity):
        """Predicate tree and traversal checks for one keyword's constraints.

        Connectives between values of one property are disjunctive either
        way: for a single-valued property the conjunctive reading of
        "second and third" is unsatisfiable. Connectives across different
        properties combine with their boolean meaning.
        """
        concept = self.dictionary.resolve_concept(ks.keywords[keyword_index].word)
        groups = {}
        for constraint in ks.constraints_for(keyword_index):
            prop = self.dictionary.find_property_for_value(concept, constraint.word)
            groups.setdefault(constraint.group, []).append(
                (prop, constraint.word, constraint.connective))

        local_parts = []
        checks = []
        for _, items in sorted(groups.items()):
            by_prop = {}
            connective = None
            for prop, word, conn in items:
                by_prop.setdefault(prop.preferred_name, (prop, []))[1].append(word)
                connective = conn or connective
            prop_parts = []
            for prop_name, (prop, words) in sorted(by_prop.items()):
                binding = self.dictionary.map_to_schema(prop)
                attribute = binding.attribute or "Name"
                if self.schema.is_kind_of(anchor_entity, binding.entity):
                    leaves = [eq(attribute, w, ci=True) for w in words]
                    prop_parts.append(leaves[0] if len(leaves) == 1 else Or(leaves))
                else:
                    checks.append(self._property_check(anchor_entity, binding, words))
            if not prop_parts:
                continue
            if len(prop_parts) == 1:
                local_parts.append(prop_parts[0])
            elif connective == "or":
                local_parts.append(Or(prop_parts))
            else:
                local_parts.append(And(prop_parts))
        if not local_parts:
            predicate = TRUE
        elif len(local_parts) == 1:
            predicate = local_parts[0]
        else:
            predicate = And(local_parts)
        return predicate, checks

    def _property_check(self, anchor_entity, binding, words):
        path = graphmod.shortest_path(self.graph, anchor_entity, binding.entity)
        traversal = self._compile(path, anchor_entity, binding.entity)
        return PropertyCheck(traversal=traversal,
                             attribute=binding.attribute or "Name",
                             values=[w.lower() for w in words])

    # .. path compilation ..

    def _compile(self, path, source_entity, target_entity):
        """Translate graph hops (walked source -> target) into join steps.

        Patterns: a run of inheritance hops is a type cast; a reverse
        attribute hop enters a document collection that points back at the
        current instances and must pair with a forward hop out of it; a
        lone forward hop dereferences a field the current documents hold.
        """
        steps = []
        labels = []
        hops = list(path.hops)
        i = 0
        current = source_entity
        while i < len(hops):
            hop = hops[i]
            if hop.kind == "inh":
                while i < len(hops) and hops[i].kind == "inh":
                    current = hops[i].target
                    i += 1
                steps.append(CastStep(current))
                labels.append(f"as {current}")
                continue
            if hop.direction == "fwd":
                target = hop.target
                i += 1
                while i < len(hops) and hops[i].kind == "inh" \
                        and not self._starts_join(hops, i):
                    target = hops[i].target
                    i += 1
                out_embedded = target not in self._collection_universe()
                steps.append(DerefStep(field_name=hop.label,
                                       out_embedded=out_embedded,
                                       target_entity=target))
                labels.append(f".{hop.label} -> {target}")
                current = target
                continue
            # reverse hop: enter the declaring document type
            in_field = hop.label
            doc_entity = hop.target
            i += 1
            while i < len(hops) and hops[i].kind == "inh":
                doc_entity = hops[i].target
                i += 1
            if i >= len(hops) or hops[i].kind == "inh" or hops[i].direction != "fwd":
                raise PlanError(
                    f"join through {doc_entity} has no outgoing attribute")
            out_hop = hops[i]
            out_field = out_hop.label
            target = out_hop.target
            i += 1
            while i < len(hops) and hops[i].kind == "inh" \
                    and not self._starts_join(hops, i):
                target = hops[i].target
                i += 1
            out_embedded = target not in self._collection_universe()
            steps.append(RelStep(doc_entity=doc_entity, in_field=in_field,
                                 out_field=out_field, out_embedded=out_embedded,
                                 target_entity=target))
            labels.append(f"{in_field} -[{doc_entity}]-> {out_field}")
            current = target
        if current != target_entity and not self.schema.is_kind_of(
                target_entity, current) and not self.schema.is_kind_of(
                current, target_entity):
            raise PlanError(f"path compilation ended at {current}, "
                            f"expected {target_entity}")
        return Traversal(steps=steps, hop_labels=labels)

    def _starts_join(self, hops, i):
        """True when the cast run beginning at `i` leads into a reverse
        attribute hop, i.e. it belongs to the next join's entry casts."""
        j = i
        while j < len(hops) and hops[j].kind == "inh":
            j += 1
        return j < len(hops) and hops[j].direction == "rev"

    def _collection_universe(self):
        """Entity types whose instances live in their own collections."""
        if not hasattr(self, "_universe"):
            from .classify import EntityClass, classification_map
            classes = classification_map(self.schema)
            self._universe = {n for n, c in classes.items()
                              if c in (EntityClass.O, EntityClass.RL,
                                       EntityClass.G, EntityClass.RLX)}
        return self._universe

    # .. plan assembly ..

    def build_plan(self, ks, model=None, flags=None):
        """QueryPlan from a KeywordSet.

        The path tree follows the keyword nesting: the outermost keyword's
        entity is the root and consecutive keyword pairs contribute the
        hops, so every join carries the meaning the sentence implies.
        """
        if flags is None:
            flags = self.model_flags(model) if model is not None else {}
        material = self._material_hint(ks, self.dictionary)
        context = dict(flags)
        if material:
            context["material"] = material

        chains = self._keyword_chains(ks)
        branches = []
        for chain in chains:
            branches.append(self._build_branch(ks, chain, context))
        set_op = self._set_operation(ks, chains)

        sample = branches[0]
        aggregation = {"measure": "sum", "attribute": "project"}.get(
            sample.root.role, "list")
        subject_idx = sample.subject_index()
        group_anchors = [a.keyword for a in sample.anchors[subject_idx + 1:]]

        plan = QueryPlan(branches=branches, set_op=set_op,
                         group_anchors=group_anchors, aggregation=aggregation)
        if ks.mixed_connectives:
            plan.notes.append("mixed and/or connectives read left-associatively")
        self._request_prejoins(plan, model)
        return plan

    def _keyword_chains(self, ks):
        """Root-to-leaf keyword index chains, one per branch."""
        chains = []

        def descend(prefix, index):
            children = ks.children_of(index)
            if not children:
                chains.append(prefix + [index])
                return
            for child in children:
                descend(prefix + [index], child)

        for root in ks.roots():
            descend([], root)
        if not chains:
            raise PlanError("no keywords to plan for")
        return chains

    def _set_operation(self, ks, chains):
        """Union unless coordinated phrases resolve to one concept (then the
        conjunctive reading intersects the instance sets)."""
        if len(chains) <= 1:
            return "union"
        for left, right, word in ks.phrase_connectives:
            try:
                a = self.dictionary.resolve_concept(ks.keywords[left].word)
                b = self.dictionary.resolve_concept(ks.keywords[right].word)
            except Exception:
                continue
            if word == "and" and a.guid == b.guid:
                return "intersection"
        return "union"

    def _build_branch(self, ks, chain, context):
        anchors = []
        for depth, keyword_index in enumerate(chain):
            keyword = ks.keywords[keyword_index]
            concept = self.dictionary.resolve_concept(keyword.word)
            binding = self.dictionary.map_to_schema(concept, context)
            entity = self._entity_for(binding)
            role = self._role_of(concept, binding)
            if depth > 0:
                if role in ("measure", "attribute"):
                    raise PlanError(
                        f"keyword {keyword.word!r} names a property or measure "
                        "and must be the outermost keyword of the question")
                role = "container"
            predicate, checks = self.transform_constraints(ks, keyword_index, entity)
            if binding.attribute and role in ("subject", "container") \
                    and self._is_boolean_attr(entity, binding.attribute):
                # boolean flag bindings (e.g. milestone tasks) filter the set
                flag = eq(binding.attribute, True)
                predicate = flag if predicate is TRUE else And([predicate, flag])
            anchors.append(Anchor(keyword=keyword.word,
                                  concept=concept.preferred_name,
                                  binding=binding, entity=entity, role=role,
                                  predicate=predicate, checks=checks))

        # traversals in execution order (inner anchor -> its parent)
        for parent, child in zip(anchors, anchors[1:]):
            if parent.role == "attribute" and self.schema.is_kind_of(
                    child.entity, parent.entity):
                # the attribute lives on the child instances themselves
                child.traversal = Traversal(
                    steps=[CastStep(parent.entity)],
                    hop_labels=[f"as {parent.entity}"])
                continue
            path = self._path_between(child.entity, parent.entity)
            child.traversal = self._compile(path, child.entity, parent.entity)
        return Branch(anchors=anchors)

    def _is_boolean_attr(self, entity, attribute):
        attr = self._attribute_decl(entity, attribute)
        if attr is None:
            return False
        seen = set()
        target = attr.target
        while target in self.schema.defined_types and target not in seen:
            seen.add(target)
            target = self.schema.defined_types[target].underlying
        return target.upper() == "BOOLEAN"

    def _path_between(self, source, target):
        try:
            return graphmod.shortest_path(self.graph, source, target)
        except graphmod.NoPathError as exc:
            raise UnreachableAnchorError(str(exc))

    def _request_prejoins(self, plan, model):
        """A hop whose entry field is single-valued and whose inner anchor
        will be scanned anyway is worth one pre-joined collection."""
        for branch in plan.branches:
            for idx in range(len(branch.anchors) - 1, 0, -1):
                child = branch.anchors[idx]
                if not child.traversal:
                    continue
                rel_steps = [s for s in child.traversal.steps
                             if isinstance(s, RelStep)]
                if len(rel_steps) != 1:
                    continue
                step = rel_steps[0]
                attr = self._attribute_decl(step.doc_entity, step.in_field)
                if attr is None or attr.aggregate:
                    continue
                b_fields = self._predicate_fields(child.predicate) or ["Name"]
                if "Name" not in b_fields:
                    b_fields.append("Name")
                spec = PrejoinSpec(
                    a_collection=step.doc_entity,
                    b_collection=child.entity,
                    b_ref_field=step.in_field,
                    a_payload=(step.out_field,),
                    b_payload=tuple(b_fields),
                    output_collection=f"{step.doc_entity}__{child.entity}",
                )
                if model is None or (model.has_collection(step.doc_entity)
                                     and model.has_collection(child.entity)):
                    plan.prejoin_requests.append(spec)

    def _attribute_decl(self, entity, field_name):
        if entity not in self.schema.entities:
            return None
        for attr in self.schema.all_attributes(entity):
            if attr.name == field_name:
                return attr
        return None

    def _predicate_fields(self, predicate):
        if isinstance(predicate, Comparison):
            return [predicate.path]
        if isinstance(predicate, (And, Or)):
            out = []
            for part in predicate.parts:
                out.extend(self._predicate_fields(part))
            return out
        if isinstance(predicate, Not):
            return self._predicate_fields(predicate.part)
        return []
