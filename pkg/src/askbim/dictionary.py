"""Concept dictionary: GUID-identified concepts with typed relations,
synonym and word-form normalization, and bindings onto schema entities.

Terms with the same meaning are related by `same_to`; word forms (plurals,
spellings, abbreviations) hang off a concept as `alias_as` relations whose
targets are plain words. Matching is case-insensitive throughout.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BindingError, ConceptNotFoundError, DictionaryError

DATA_DIR = Path(__file__).parent / "data"

GUID_ALPHABET = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_$"
RELATION_KINDS = {"specializes", "composes", "acts_upon", "assigns_properties",
                  "assigns_measures", "assigns_values", "same_to", "alias_as"}
CHARACTERISTIC_TYPES = {"behavior", "environmental influence", "function",
                        "measure", "property", "unit"}


def stable_guid(name):
    """22-character GUID in the GlobalId alphabet, derived from the name."""
    digest = hashlib.md5(("askbim:" + name).encode()).digest()
    n = int.from_bytes(digest, "big")
    chars = []
    for _ in range(22):
        chars.append(GUID_ALPHABET[n & 63])
        n >>= 6
    return "".join(reversed(chars))


@dataclass(frozen=True)
class Binding:
    entity: str
    attribute: str = None

    def to_json(self):
        return {"entity": self.entity, "attribute": self.attribute}


@dataclass
class Concept:
    guid: str
    kind: str  # subject | characteristic
    preferred_name: str
    characteristic_type: str = None
    relations: list = field(default_factory=list)  # [(kind, target)]
    ifc_binding: Binding = None

    def targets(self, relation_kind):
        return [t for k, t in self.relations if k == relation_kind]

    @property
    def aliases(self):
        return self.targets("alias_as")

    def to_json(self):
        return {
            "guid": self.guid,
            "kind": self.kind,
            "characteristic_type": self.characteristic_type,
            "preferred_name": self.preferred_name,
            "relations": [[k, t] for k, t in self.relations],
            "ifc_binding": self.ifc_binding.to_json() if self.ifc_binding else None,
        }


def _edit_distance(a, b, cap=3):
    if abs(len(a) - len(b)) > cap:
        return cap + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        if min(cur) > cap:
            return cap + 1
        prev = cur
    return prev[-1]


class Dictionary:
    def __init__(self, concepts, rules=None):
        self.concepts = {}      # guid -> Concept
        self._order = []        # file order, preserved for save round-trips
        self._names = {}        # lowercased form -> guid (preferred + same_to)
        self._aliases = {}      # lowercased alias form -> preferred name
        self.rules = rules or []
        for concept in concepts:
            if concept.guid in self.concepts:
                raise DictionaryError(f"duplicate guid {concept.guid}")
            self.concepts[concept.guid] = concept
            self._order.append(concept.guid)
        self._validate()
        self._build_index()

    # -- loading ---------------------------------------------------------

    @classmethod
    def load(cls, path, rules_path=None):
        concepts = []
        for lineno, line in enumerate(
                Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DictionaryError(f"line {lineno}: malformed record: {exc}")
            concepts.append(cls._concept_from_json(obj, lineno))
        rules = []
        if rules_path is not None:
            rules = json.loads(Path(rules_path).read_text(encoding="utf-8"))["rules"]
        return cls(concepts, rules)

    @classmethod
    def load_seed(cls):
        return cls.load(DATA_DIR / "concepts.jsonl", DATA_DIR / "quantity_rules.json")

    @staticmethod
    def _concept_from_json(obj, lineno=0):
        guid = obj.get("guid", "")
        if len(guid) != 22 or any(c not in GUID_ALPHABET for c in guid):
            raise DictionaryError(f"line {lineno}: malformed guid {guid!r}")
        kind = obj.get("kind")
        if kind not in ("subject", "characteristic"):
            raise DictionaryError(f"line {lineno}: bad concept kind {kind!r}")
        ctype = obj.get("characteristic_type")
        if ctype is not None and ctype not in CHARACTERISTIC_TYPES:
            raise DictionaryError(f"line {lineno}: bad characteristic type {ctype!r}")
        relations = []
        for rel in obj.get("relations", []):
            rkind, target = rel
            if rkind not in RELATION_KINDS:
                raise DictionaryError(f"line {lineno}: unknown relation {rkind!r}")
            relations.append((rkind, target))
        binding = None
        if obj.get("ifc_binding"):
            binding = Binding(obj["ifc_binding"]["entity"],
                              obj["ifc_binding"].get("attribute"))
        return Concept(guid=guid, kind=kind,
                       preferred_name=obj["preferred_name"],
                       characteristic_type=ctype,
                       relations=relations, ifc_binding=binding)

    def save(self, path):
        lines = []
        for guid in self._order:
            lines.append(json.dumps(self.concepts[guid].to_json(),
                                    sort_keys=True, ensure_ascii=True))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    # -- validation --------------------------------------------------------

    def _validate(self):
        for concept in self.concepts.values():
            for kind, target in concept.relations:
                if kind == "alias_as":
                    continue
                if target not in self.concepts:
                    raise DictionaryError(
                        f"{concept.preferred_name}: dangling {kind} target {target!r}")
        for concept in self.concepts.values():
            for target in concept.targets("same_to"):
                partner = self.concepts[target]
                if concept.guid not in partner.targets("same_to"):
                    raise DictionaryError(
                        f"same_to asymmetry: {concept.preferred_name} -> "
                        f"{partner.preferred_name} lacks the reverse relation")
        # specializes must be acyclic
        visiting, done = set(), set()

        def visit(guid, trail):
            if guid in done:
                return
            if guid in visiting:
                names = " -> ".join(self.concepts[g].preferred_name
                                    for g in trail + [guid])
                raise DictionaryError(f"specializes cycle: {names}")
            visiting.add(guid)
            for target in self.concepts[guid].targets("specializes"):
                visit(target, trail + [guid])
            visiting.discard(guid)
            done.add(guid)

        for guid in self.concepts:
            visit(guid, [])

    def _build_index(self):
        for concept in self.concepts.values():
            self._names[concept.preferred_name.lower()] = concept.guid
        for concept in self.concepts.values():
            for alias in concept.aliases:
                form = alias.lower()
                if form in self._names:
                    continue  # never shadow a preferred name
                self._aliases[form] = concept.preferred_name

    # -- lookups -----------------------------------------------------------

    def __len__(self):
        return len(self.concepts)

    def name_forms(self):
        return sorted(set(self._names) | set(self._aliases))

    def normalize(self, word):
        """Standard form of a word: alias forms collapse to the preferred
        name; anything else passes through unchanged (idempotent)."""
        form = word.lower()
        if form in self._names:
            return self.concepts[self._names[form]].preferred_name
        if form in self._aliases:
            return self._aliases[form]
        return word.lower()

    def concept_by_name(self, word):
        form = self.normalize(word).lower()
        guid = self._names.get(form)
        return self.concepts[guid] if guid else None

    def canonical(self, concept):
        """Follow same_to to the binding-bearing concept of the synonym set."""
        if concept.ifc_binding is not None:
            return concept
        candidates = [self.concepts[t] for t in concept.targets("same_to")]
        bound = sorted((c.guid for c in candidates if c.ifc_binding is not None))
        if bound:
            return self.concepts[bound[0]]
        return concept

    def resolve_concept(self, word):
        """Word -> canonical concept, through alias_as then same_to."""
        concept = self.concept_by_name(word)
        if concept is None:
            raise ConceptNotFoundError(word, self.suggestions(word))
        return self.canonical(concept)

    def suggestions(self, word, limit=3, max_distance=2):
        form = word.lower()
        scored = []
        for name in self.name_forms():
            distance = _edit_distance(form, name, cap=max_distance)
            if distance <= max_distance:
                scored.append((distance, name))
        scored.sort()
        return [name for _, name in scored[:limit]]

    # -- schema mapping ------------------------------------------------------

    def map_to_schema(self, concept, context=None):
        """Schema binding for a concept; abstract characteristics go through
        the rule table with the supplied context."""
        context = context or {}
        for rule in self.rules:
            if rule["concept"] != concept.preferred_name:
                continue
            if self._rule_matches(rule.get("when", {}), context):
                binding = rule["binding"]
                return Binding(binding["entity"], binding.get("attribute"))
        if concept.ifc_binding is not None:
            return concept.ifc_binding
        raise BindingError(
            f"concept {concept.preferred_name!r} has no schema binding and "
            "no rule applies")

    def _rule_matches(self, when, context):
        for key, expected in when.items():
            actual = context.get(key)
            if isinstance(expected, str) and isinstance(actual, str):
                if self._same_term(actual, expected):
                    continue
                return False
            elif actual != expected:
                return False
        return True

    def _same_term(self, a, b):
        """Words denote the same term after alias and synonym collapse."""
        ca, cb = self.concept_by_name(a), self.concept_by_name(b)
        if ca is not None and cb is not None:
            return self.canonical(ca).guid == self.canonical(cb).guid
        return self.normalize(a) == self.normalize(b)

    def property_concepts_of(self, subject):
        """assigns_properties targets of a subject and of everything it
        specializes, nearest first."""
        seen = []
        stack = [subject.guid]
        visited = set()
        while stack:
            guid = stack.pop(0)
            if guid in visited:
                continue
            visited.add(guid)
            concept = self.concepts[guid]
            for target in concept.targets("assigns_properties"):
                if target not in (c.guid for c in seen):
                    seen.append(self.concepts[target])
            stack.extend(concept.targets("specializes"))
            stack.extend(concept.targets("same_to"))
        return seen

    def find_property_for_value(self, subject, value_word):
        """The subject property whose value domain contains the word; the
        name property is the default when nothing matches."""
        wanted = self.normalize(value_word)
        for prop in self.property_concepts_of(subject):
            for target in prop.targets("assigns_values"):
                value_concept = self.concepts[target]
                names = {value_concept.preferred_name.lower()}
                names.update(a.lower() for a in value_concept.aliases)
                if wanted.lower() in names:
                    return prop
        name_concept = self.concept_by_name("name")
        if name_concept is None:
            raise DictionaryError("seed dictionary is missing the 'name' property")
        return name_concept
