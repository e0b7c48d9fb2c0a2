"""ISO 10303-21 (STEP physical file) reader for the supported subset.

Produces raw instances: positional attribute values with references kept as
tokens. Value domain: strings, numbers, booleans, enumeration names, refs,
absent (`$`), derived (`*`), typed values like IFCLABEL('x'), and one level
of aggregate nesting. Expression-valued attributes are rejected.
"""

from dataclasses import dataclass, field

from .errors import DuplicateInstanceError, MissingReferenceError, SpfSyntaxError


class Absent:
    """Singleton marker for `$` attributes."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ABSENT"


class Derived:
    """Singleton marker for `*` attributes."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DERIVED"


ABSENT = Absent()
DERIVED = Derived()


@dataclass(frozen=True)
class Ref:
    """Reference token `#n`."""

    target: int

    def __repr__(self):
        return f"#{self.target}"


@dataclass(frozen=True)
class Enum:
    """Enumeration token `.NAME.`; `.T.`/`.F.` are decoded to booleans."""

    name: str


@dataclass(frozen=True)
class Typed:
    """Typed value wrapper, e.g. IFCLABEL('x')."""

    type_name: str
    value: object


@dataclass
class RawInstance:
    id: int
    type_name: str
    attributes: list
    line: int


@dataclass
class SpfFile:
    header: dict = field(default_factory=dict)
    instances: dict = field(default_factory=dict)  # id -> RawInstance

    def __iter__(self):
        return iter(self.instances.values())

    def __len__(self):
        return len(self.instances)


class _Scanner:
    def __init__(self, text, line, col_offset=0):
        self.text = text
        self.pos = 0
        self.line = line
        self.col_offset = col_offset

    def error(self, message):
        raise SpfSyntaxError(message, self.line, self.col_offset + self.pos + 1)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}, found {self.peek()!r}")
        self.pos += 1

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text)

    def read_string(self):
        # STEP strings escape the quote by doubling it
        self.expect("'")
        out = []
        while True:
            if self.pos >= len(self.text):
                self.error("unterminated string")
            ch = self.text[self.pos]
            if ch == "'":
                if self.pos + 1 < len(self.text) and self.text[self.pos + 1] == "'":
                    out.append("'")
                    self.pos += 2
                    continue
                self.pos += 1
                return "".join(out)
            out.append(ch)
            self.pos += 1

    def read_value(self, depth=0):
        self.skip_ws()
        ch = self.peek()
        if ch == "":
            self.error("unexpected end of attribute list")
        if ch == "$":
            self.pos += 1
            return ABSENT
        if ch == "*":
            self.pos += 1
            return DERIVED
        if ch == "#":
            self.pos += 1
            start = self.pos
            while self.peek().isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("reference without a number")
            return Ref(int(self.text[start:self.pos]))
        if ch == "'":
            return self.read_string()
        if ch == ".":
            self.pos += 1
            start = self.pos
            while self.peek() not in (".", ""):
                self.pos += 1
            name = self.text[start:self.pos]
            self.expect(".")
            if not name or not all(c.isalnum() or c == "_" for c in name):
                self.error(f"malformed enumeration {name!r}")
            if name == "T":
                return True
            if name == "F":
                return False
            return Enum(name)
        if ch == "(":
            if depth >= 1:
                self.error("nested aggregates are not supported")
            self.pos += 1
            items = []
            self.skip_ws()
            if self.peek() == ")":
                self.pos += 1
                return items
            while True:
                items.append(self.read_value(depth + 1))
                self.skip_ws()
                if self.peek() == ",":
                    self.pos += 1
                    continue
                self.expect(")")
                return items
        if ch.isdigit() or ch in "+-":
            start = self.pos
            self.pos += 1
            while self.peek() and (self.peek().isdigit() or self.peek() in ".eE+-"):
                # a '+'/'-' is only valid immediately after an exponent marker
                if self.peek() in "+-" and self.text[self.pos - 1] not in "eE":
                    break
                self.pos += 1
            token = self.text[start:self.pos]
            try:
                if any(c in token for c in ".eE"):
                    return float(token)
                return int(token)
            except ValueError:
                self.error(f"malformed number {token!r}")
        if ch.isalpha() or ch == "_":
            start = self.pos
            while self.peek().isalnum() or self.peek() == "_":
                self.pos += 1
            name = self.text[start:self.pos]
            self.skip_ws()
            if self.peek() != "(":
                self.error(
                    f"bare token {name!r}: expression-valued attributes are not supported"
                )
            self.pos += 1
            inner = self.read_value(depth)
            self.skip_ws()
            self.expect(")")
            return Typed(name.upper(), inner)
        self.error(f"unexpected character {ch!r} in attribute value")

    def read_attributes(self):
        values = []
        if self.at_end():
            return values
        while True:
            values.append(self.read_value())
            self.skip_ws()
            if self.peek() == ",":
                self.pos += 1
                continue
            if self.at_end():
                return values
            self.error(f"expected ',' between attributes, found {self.peek()!r}")


def _logical_lines(text):
    """Yield (line_number, statement) with statements joined across newlines.

    STEP statements end with ';'. Quoted strings may contain ';' so we track
    string state while splitting.
    """
    buf = []
    start_line = None
    in_str = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        i = 0
        while i < len(line):
            ch = line[i]
            if not buf:
                if ch.isspace():
                    i += 1
                    continue
                start_line = lineno
            buf.append(ch)
            if in_str:
                if ch == "'":
                    in_str = False
            elif ch == "'":
                in_str = True
            elif ch == ";":
                yield start_line, "".join(buf).strip()
                buf = []
            i += 1
        if buf and not in_str:
            buf.append(" ")
    tail = "".join(buf).strip()
    if tail:
        raise SpfSyntaxError(f"unterminated statement {tail[:40]!r}", start_line, None)


def parse_spf(text):
    """Parse STEP file content into an SpfFile of raw instances.

    Raises on syntax errors, duplicate instance ids, and (after a full pass)
    on references to missing ids.
    """
    instances = {}
    header = {}
    section = None
    saw_start = False
    for lineno, stmt in _logical_lines(text):
        upper = stmt.upper()
        if upper.startswith("ISO-10303-21"):
            saw_start = True
            continue
        if upper in ("HEADER;",):
            section = "header"
            continue
        if upper in ("DATA;",):
            section = "data"
            continue
        if upper in ("ENDSEC;",):
            section = None
            continue
        if upper.startswith("END-ISO-10303-21"):
            break
        if section == "header":
            name = stmt.split("(", 1)[0].strip().upper()
            header[name] = stmt
            continue
        if section == "data":
            if not stmt.startswith("#"):
                raise SpfSyntaxError(f"expected instance line, found {stmt[:30]!r}", lineno, 1)
            eq = stmt.find("=")
            if eq < 0:
                raise SpfSyntaxError("missing '=' in instance line", lineno, 1)
            try:
                iid = int(stmt[1:eq].strip())
            except ValueError:
                raise SpfSyntaxError(f"malformed instance id {stmt[:eq]!r}", lineno, 1)
            rest = stmt[eq + 1:].strip()
            if not rest.endswith(";"):
                raise SpfSyntaxError("instance line must end with ';'", lineno, len(stmt))
            rest = rest[:-1].strip()
            paren = rest.find("(")
            if paren < 0 or not rest.endswith(")"):
                raise SpfSyntaxError("expected TYPE(...) in instance line", lineno, eq + 2)
            type_name = rest[:paren].strip().upper()
            if not type_name or not all(c.isalnum() or c == "_" for c in type_name):
                raise SpfSyntaxError(f"malformed type name {type_name!r}", lineno, eq + 2)
            body = rest[paren + 1:-1]
            scanner = _Scanner(body, lineno, col_offset=eq + 1 + paren + 1)
            attributes = scanner.read_attributes()
            if iid in instances:
                raise DuplicateInstanceError(
                    f"duplicate instance id #{iid} (lines {instances[iid].line} and {lineno})"
                )
            instances[iid] = RawInstance(iid, type_name, attributes, lineno)
    if not saw_start:
        raise SpfSyntaxError("not a STEP physical file (missing ISO-10303-21 header)", 1, 1)

    missing = []
    for inst in instances.values():
        for ref in iter_refs(inst.attributes):
            if ref.target not in instances:
                missing.append((inst.id, ref.target))
    if missing:
        listed = ", ".join(f"#{src}->#{dst}" for src, dst in sorted(missing)[:10])
        raise MissingReferenceError(
            f"{len(missing)} reference(s) to missing instances: {listed}"
        )
    return SpfFile(header=header, instances=instances)


def iter_refs(values):
    """Yield every Ref inside a raw attribute list (one aggregate level)."""
    for value in values:
        if isinstance(value, Ref):
            yield value
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, Ref):
                    yield item
        elif isinstance(value, Typed) and isinstance(value.value, Ref):
            yield value.value
