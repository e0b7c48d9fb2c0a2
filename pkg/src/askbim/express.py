"""Parser for the EXPRESS schema subset.

Supported: ENTITY blocks with single SUBTYPE OF, explicit attributes with
OPTIONAL and single-level SET/LIST aggregates, and TYPE blocks declaring
defined types (aliases of built-ins or other defined types) and SELECT
types. WHERE/DERIVE/UNIQUE rules, FUNCTION and RULE blocks are skipped with
a warning; INVERSE attributes are recorded by name/target only.
"""

import re
from dataclasses import dataclass, field

from .errors import ExpressSyntaxError

BUILTINS = {"STRING", "REAL", "INTEGER", "BOOLEAN", "NUMBER", "LOGICAL", "BINARY"}

_ATTR_RE = re.compile(
    r"^(?P<name>\w+)\s*:\s*(?P<optional>OPTIONAL\s+)?"
    r"(?P<agg>(?:SET|LIST|BAG)\s*(?:\[[^\]]*\])?\s+OF\s+)?(?P<target>\w+)$",
    re.IGNORECASE,
)

_INVERSE_RE = re.compile(
    r"^(?P<name>\w+)\s*:\s*(?:(?:SET|LIST|BAG)\s*(?:\[[^\]]*\])?\s+OF\s+)?"
    r"(?P<target>\w+)(?:\s+FOR\s+\w+)?$",
    re.IGNORECASE,
)


@dataclass
class Attribute:
    name: str
    target: str
    optional: bool = False
    aggregate: bool = False


@dataclass
class EntityDecl:
    name: str
    supertype: str | None = None
    attributes: list = field(default_factory=list)
    inverse: list = field(default_factory=list)  # (name, target) only
    line: int = 0


@dataclass
class DefinedType:
    name: str
    underlying: str
    line: int = 0


@dataclass
class SelectType:
    name: str
    members: list = field(default_factory=list)
    line: int = 0


@dataclass
class Schema:
    name: str = ""
    entities: dict = field(default_factory=dict)
    defined_types: dict = field(default_factory=dict)
    select_types: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def declarations(self):
        out = {}
        out.update(self.entities)
        out.update(self.defined_types)
        out.update(self.select_types)
        return out

    def has(self, name):
        return (name in self.entities or name in self.defined_types
                or name in self.select_types)

    def entity_by_upper(self, upper_name):
        """Look up an entity from a STEP-style all-caps type name."""
        return self._upper_index().get(upper_name.upper())

    def _upper_index(self):
        if not hasattr(self, "_upper_cache"):
            self._upper_cache = {n.upper(): n for n in self.entities}
        return self._upper_cache

    def supertype_chain(self, name):
        """Ancestors from direct supertype to the root, excluding `name`."""
        chain = []
        cur = self.entities[name].supertype
        while cur is not None:
            chain.append(cur)
            cur = self.entities[cur].supertype
        return chain

    def is_kind_of(self, name, ancestor):
        return name == ancestor or ancestor in self.supertype_chain(name)

    def subtypes_of(self, name):
        """All declared entities that are `name` or inherit from it."""
        return [e for e in self.entities if self.is_kind_of(e, name)]

    def all_attributes(self, name):
        """Explicit attributes in STEP order: inherited first, then own."""
        attrs = []
        for ancestor in reversed(self.supertype_chain(name)):
            attrs.extend(self.entities[ancestor].attributes)
        attrs.extend(self.entities[name].attributes)
        return attrs

    def is_scalar_target(self, target):
        """True when the target resolves to a built-in value type."""
        seen = set()
        cur = target
        while True:
            if cur.upper() in BUILTINS:
                return True
            if cur in self.entities or cur in self.select_types:
                return False
            if cur not in self.defined_types or cur in seen:
                return False
            seen.add(cur)
            cur = self.defined_types[cur].underlying


def _strip_comments(text):
    # (* ... *) comments may span lines; '--' comments run to end of line
    out = []
    i = 0
    while i < len(text):
        if text.startswith("(*", i):
            end = text.find("*)", i + 2)
            if end < 0:
                raise ExpressSyntaxError("unterminated (* comment")
            out.append("\n" * text.count("\n", i, end))
            i = end + 2
        elif text.startswith("--", i):
            end = text.find("\n", i)
            i = len(text) if end < 0 else end
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def _statements(text):
    """Yield (line, statement) pairs; statements are ';'-terminated."""
    line = 1
    buf = []
    start = 1
    for ch in text:
        if ch == "\n":
            line += 1
        if ch == ";":
            stmt = "".join(buf).strip()
            if stmt:
                yield start, re.sub(r"\s+", " ", stmt)
            buf = []
            start = line
            continue
        if not buf and not ch.isspace():
            start = line
        buf.append(ch)
    tail = "".join(buf).strip()
    if tail:
        raise ExpressSyntaxError(f"unterminated statement {tail[:40]!r} at line {start}")


def parse_express(text):
    """Parse EXPRESS subset text into a Schema."""
    schema = Schema()
    stmts = list(_statements(_strip_comments(text)))
    i = 0
    current = None       # EntityDecl being filled
    section = "attrs"    # attrs | inverse | skip
    skip_block = None    # FUNCTION / RULE

    def declare(name, line):
        if schema.has(name):
            raise ExpressSyntaxError(f"duplicate declaration of {name} at line {line}")

    while i < len(stmts):
        line, stmt = stmts[i]
        i += 1
        upper = stmt.upper()

        if skip_block:
            if upper == "END_" + skip_block:
                skip_block = None
            continue

        if upper.startswith("SCHEMA "):
            schema.name = stmt.split()[1]
            continue
        if upper == "END_SCHEMA":
            continue

        if upper.startswith("FUNCTION ") or upper.startswith("RULE "):
            kind = "FUNCTION" if upper.startswith("FUNCTION") else "RULE"
            schema.warnings.append(f"line {line}: {kind} block skipped")
            skip_block = kind
            continue

        if upper.startswith("ENTITY "):
            if current is not None:
                raise ExpressSyntaxError(f"ENTITY inside ENTITY at line {line}")
            m = re.match(
                r"^ENTITY\s+(\w+)"
                r"(?:\s+ABSTRACT)?"
                r"(?:\s+SUPERTYPE\s+OF\s*\([^)]*\))?"
                r"(?:\s+SUBTYPE\s+OF\s*\(\s*(\w+)\s*\))?$",
                stmt, re.IGNORECASE)
            if not m:
                raise ExpressSyntaxError(f"malformed ENTITY header at line {line}: {stmt!r}")
            name, supertype = m.group(1), m.group(2)
            declare(name, line)
            current = EntityDecl(name=name, supertype=supertype, line=line)
            section = "attrs"
            continue

        if upper == "END_ENTITY":
            if current is None:
                raise ExpressSyntaxError(f"END_ENTITY without ENTITY at line {line}")
            schema.entities[current.name] = current
            current = None
            continue

        if current is not None:
            # section keywords share the statement with their first rule
            head = upper.split(" ", 1)[0]
            if head == "INVERSE":
                section = "inverse"
                stmt = stmt[len("INVERSE"):].strip()
                if not stmt:
                    continue
                upper = stmt.upper()
            elif head in ("WHERE", "DERIVE", "UNIQUE"):
                schema.warnings.append(
                    f"line {line}: {head} section of {current.name} skipped")
                section = "skip"
                continue
            elif section == "skip":
                continue
            if section == "inverse":
                m = _INVERSE_RE.match(stmt)
                if not m:
                    raise ExpressSyntaxError(
                        f"malformed inverse attribute in {current.name} "
                        f"at line {line}: {stmt!r}")
                current.inverse.append((m.group("name"), m.group("target")))
                schema.warnings.append(
                    f"line {line}: inverse attribute {current.name}.{m.group('name')} "
                    "recorded by name/target only")
                continue
            m = _ATTR_RE.match(stmt)
            if not m:
                raise ExpressSyntaxError(
                    f"malformed attribute in {current.name} at line {line}: {stmt!r}")
            current.attributes.append(Attribute(
                name=m.group("name"),
                target=m.group("target"),
                optional=bool(m.group("optional")),
                aggregate=bool(m.group("agg")),
            ))
            continue

        if upper.startswith("TYPE "):
            m = re.match(r"^TYPE\s+(\w+)\s*=\s*(.+)$", stmt, re.IGNORECASE)
            if not m:
                raise ExpressSyntaxError(f"malformed TYPE at line {line}: {stmt!r}")
            name, definition = m.group(1), m.group(2).strip()
            declare(name, line)
            sel = re.match(r"^SELECT\s*\((.*)\)$", definition, re.IGNORECASE | re.DOTALL)
            if sel:
                members = [w.strip() for w in sel.group(1).split(",") if w.strip()]
                if not members:
                    raise ExpressSyntaxError(f"empty SELECT at line {line}")
                schema.select_types[name] = SelectType(name, members, line)
            else:
                if not re.match(r"^\w+$", definition):
                    raise ExpressSyntaxError(
                        f"unsupported type definition at line {line}: {definition!r}")
                schema.defined_types[name] = DefinedType(name, definition, line)
            # consume END_TYPE (WHERE bodies inside TYPE are skipped)
            while i < len(stmts):
                l2, s2 = stmts[i]
                i += 1
                if s2.upper() == "END_TYPE":
                    break
                schema.warnings.append(f"line {l2}: TYPE body statement skipped")
            continue

        raise ExpressSyntaxError(f"unexpected statement at line {line}: {stmt[:40]!r}")

    if current is not None:
        raise ExpressSyntaxError(f"ENTITY {current.name} missing END_ENTITY")

    _validate(schema)
    return schema


def _validate(schema):
    for entity in schema.entities.values():
        if entity.supertype is not None and entity.supertype not in schema.entities:
            raise ExpressSyntaxError(
                f"{entity.name}: unknown supertype {entity.supertype}")
        for attr in entity.attributes:
            if attr.target.upper() in BUILTINS:
                continue
            if not schema.has(attr.target):
                raise ExpressSyntaxError(
                    f"{entity.name}.{attr.name}: unknown target type {attr.target}")
    for select in schema.select_types.values():
        for member in select.members:
            if member.upper() not in BUILTINS and not schema.has(member):
                raise ExpressSyntaxError(
                    f"select {select.name}: unknown member {member}")
