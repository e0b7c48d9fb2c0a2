"""Restricted natural-language front end: tokenize, tag, parse to a noun
phrase tree, and extract keywords with their constraints.

Grammar scope is noun-phrase queries: NP -> (ADJP|JJ|noun-modifier)* head
(PP)*, PP -> IN NP, ADJP -> JJ (CC JJ)*, plus NP coordination with a
conjunction. Sentences with verbs or pronouns get a helpful rejection
instead of a wrong answer.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BracketedTreeError, QueryParseError, UnsupportedSentenceError

DATA_DIR = Path(__file__).parent / "data"

TREE_TAGS = {"NN", "NNS", "JJ", "IN", "CC", "DT", "CD"}
PHRASE_LABELS = {"ROOT", "NP", "PP", "ADJP"}
NOUN_TAGS = {"NN", "NNS"}
# tagger-internal tags that never appear in a parse tree
REJECT_TAGS = {"VB", "PRP"}
TAG_ALIASES = {"NNP": "NN", "NNPS": "NNS", "VBP": "VB", "VBZ": "VB", "VBG": "VB",
               "VBD": "VB", "VBN": "VB", "PRP$": "PRP"}

_WORD_RE = re.compile(r"[A-Za-z0-9]+(?:-[A-Za-z0-9]+)*")
_NUMBER_RE = re.compile(r"^\d+(?:\.\d+)?$")


@dataclass(frozen=True)
class Token:
    text: str
    normalized: str
    span: tuple


@dataclass(frozen=True)
class TaggedToken:
    token: Token
    tag: str
    lemma: str
    unknown: bool = False

    @property
    def word(self):
        return self.token.normalized


@dataclass
class ParseTree:
    label: str
    children: list = field(default_factory=list)
    leaf: TaggedToken = None
    position: tuple = ()

    def is_leaf(self):
        return self.leaf is not None

    def leaves(self):
        if self.is_leaf():
            return [self]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def pretty(self):
        if self.is_leaf():
            return f"({self.label} {self.leaf.word})"
        return "(" + self.label + " " + " ".join(c.pretty() for c in self.children) + ")"

    def assign_positions(self, prefix=()):
        self.position = prefix
        for i, child in enumerate(self.children):
            child.assign_positions(prefix + (i,))


@dataclass
class Keyword:
    word: str
    surface: str
    position: tuple
    index: int


@dataclass
class Constraint:
    target: int            # keyword index
    word: str
    surface: str
    group: int = 0         # constraints joined by one connective share a group
    connective: str = None  # 'and' | 'or' | None
    source: str = "adjective"  # adjective | compound | cardinal


@dataclass
class KeywordSet:
    keywords: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    order: list = field(default_factory=list)       # keyword indices, innermost first
    phrase_links: list = field(default_factory=list)       # (parent idx, child idx)
    phrase_connectives: list = field(default_factory=list)  # (left idx, right idx, word)
    ignored: list = field(default_factory=list)     # (word, reason)
    warnings: list = field(default_factory=list)
    mixed_connectives: bool = False

    def keyword_words(self):
        return [k.word for k in self.keywords]

    def constraints_for(self, index):
        return [c for c in self.constraints if c.target == index]

    def children_of(self, index):
        return [c for p, c in self.phrase_links if p == index]

    def parent_of(self, index):
        for p, c in self.phrase_links:
            if c == index:
                return p
        return None

    def roots(self):
        linked = {c for _, c in self.phrase_links}
        return [k.index for k in self.keywords if k.index not in linked]

    def coordination_groups(self):
        """Connected components of phrase-coordinated keywords."""
        groups = []
        for left, right, word in self.phrase_connectives:
            for group in groups:
                if left in group["members"] or right in group["members"]:
                    group["members"].update((left, right))
                    group["words"].add(word)
                    break
            else:
                groups.append({"members": {left, right}, "words": {word}})
        return groups


_lexicon_cache = None


def _lexicon():
    global _lexicon_cache
    if _lexicon_cache is None:
        table = {}
        for line in (DATA_DIR / "lexicon.tsv").read_text(encoding="utf-8").splitlines():
            if line.strip():
                word, tag = line.split("\t")
                table[word] = tag
        _lexicon_cache = table
    return _lexicon_cache


def tokenize(text):
    """Split on whitespace and punctuation, keeping internal hyphens."""
    if not text or not text.strip():
        raise QueryParseError("empty query text")
    tokens = []
    pos = 0
    for match in re.finditer(r"\S+", text):
        chunk, start = match.group(), match.start()
        i = 0
        while i < len(chunk):
            m = _WORD_RE.match(chunk, i)
            if m:
                tokens.append(Token(m.group(), m.group().lower(),
                                    (start + m.start(), start + m.end())))
                i = m.end()
            else:
                tokens.append(Token(chunk[i], chunk[i],
                                    (start + i, start + i + 1)))
                i += 1
    return tokens


def _lemma_of(word, lexicon):
    if word.endswith("ies") and word[:-3] + "y" in lexicon:
        return word[:-3] + "y"
    if word.endswith("es") and word[:-2] in lexicon:
        return word[:-2]
    if word.endswith("s") and word[:-1] in lexicon:
        return word[:-1]
    return word


def tag(tokens):
    """Tag tokens from the lexicon with noun/ordinal fallbacks; total."""
    lexicon = _lexicon()
    tagged = []
    for token in tokens:
        word = token.normalized
        if not word[:1].isalnum():
            tagged.append(TaggedToken(token, "PUNCT", word))
            continue
        if word in lexicon:
            t = lexicon[word]
            lemma = _lemma_of(word, lexicon) if t == "NNS" else word
            tagged.append(TaggedToken(token, t, lemma))
            continue
        if _NUMBER_RE.match(word):
            tagged.append(TaggedToken(token, "CD", word))
            continue
        lemma = _lemma_of(word, lexicon)
        if lemma != word:
            tagged.append(TaggedToken(token, "NNS", lemma))
            continue
        tagged.append(TaggedToken(token, "NN", word, unknown=True))
    return tagged


def unknown_words(tagged):
    return [t.word for t in tagged if t.unknown]


# --- grammar -------------------------------------------------------------

class _Parser:
    def __init__(self, tagged):
        self.tokens = [t for t in tagged if t.tag != "PUNCT"]
        self.skipped = [t for t in tagged if t.tag == "PUNCT"]
        self.pos = 0

    def peek(self, ahead=0):
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        where = f" at {tok.word!r}" if tok else " at end of input"
        raise QueryParseError(message + where)

    def parse(self):
        for tok in self.tokens:
            if tok.tag in REJECT_TAGS:
                raise UnsupportedSentenceError(
                    f"only noun-phrase queries are supported; {tok.word!r} is not "
                    "part of the noun grammar")
        if not self.tokens:
            raise QueryParseError("no words to parse")
        top = self.np_coordination()
        if self.peek() is not None:
            self.fail("unexpected token")
        root = ParseTree("ROOT", [top])
        root.assign_positions()
        return root

    def np_coordination(self):
        first = self.np()
        parts = [first]
        while self.peek() is not None and self.peek().tag == "CC" \
                and self.peek(1) is not None \
                and self.peek(1).tag in NOUN_TAGS | {"DT", "JJ", "CD"}:
            cc = self.take()
            parts.append(ParseTree(cc.tag, leaf=cc))
            parts.append(self.np())
        if len(parts) == 1:
            return first
        return ParseTree("NP", parts)

    def np(self):
        children = []
        tok = self.peek()
        if tok is not None and tok.tag == "DT":
            children.append(ParseTree("DT", leaf=self.take()))
        saw_noun_head = False
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.tag == "JJ":
                children.append(self.adjp_or_jj())
                continue
            if tok.tag == "CD":
                children.append(ParseTree("CD", leaf=self.take()))
                continue
            if tok.tag in NOUN_TAGS:
                nxt = self.peek(1)
                node = ParseTree(tok.tag, leaf=self.take())
                children.append(node)
                if nxt is not None and nxt.tag in NOUN_TAGS | {"JJ", "CD"}:
                    continue  # this noun modifies a later head
                saw_noun_head = True
                break
            break
        if not saw_noun_head:
            self.fail("expected a noun")
        while self.peek() is not None and self.peek().tag == "IN":
            children.append(self.pp())
        return ParseTree("NP", children)

    def adjp_or_jj(self):
        first = self.take()
        parts = [ParseTree("JJ", leaf=first)]
        while self.peek() is not None and self.peek().tag == "CC" \
                and self.peek(1) is not None and self.peek(1).tag == "JJ":
            cc = self.take()
            parts.append(ParseTree(cc.tag, leaf=cc))
            parts.append(ParseTree("JJ", leaf=self.take()))
        if len(parts) == 1:
            return parts[0]
        return ParseTree("ADJP", parts)

    def pp(self):
        children = [ParseTree("IN", leaf=self.take())]
        children.append(self.np_coordination())
        return ParseTree("PP", children)


def parse_query(tagged):
    """Parse tagged tokens into a single ROOT tree covering every token."""
    return _Parser(tagged).parse()


def parse_text(text):
    return parse_query(tag(tokenize(text)))


# --- bracketed-tree import -------------------------------------------------

def load_bracketed_tree(text):
    """Penn-notation import; an externally produced tree enters the same
    extraction path as the internal parser's output."""
    tokens = re.findall(r"\(|\)|[^\s()]+", text)
    if not tokens:
        raise BracketedTreeError("empty tree text")
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise BracketedTreeError("unbalanced brackets: unexpected end")
        tok = tokens[pos]
        pos += 1
        if tok != "(":
            raise BracketedTreeError(f"expected '(', found {tok!r}")
        if pos >= len(tokens) or tokens[pos] in "()":
            raise BracketedTreeError("missing node label")
        label = tokens[pos]
        pos += 1
        label = TAG_ALIASES.get(label, label)
        children = []
        words = []
        while pos < len(tokens) and tokens[pos] != ")":
            if tokens[pos] == "(":
                children.append(read())
            else:
                words.append(tokens[pos])
                pos += 1
        if pos >= len(tokens):
            raise BracketedTreeError("unbalanced brackets: missing ')'")
        pos += 1  # consume ')'
        if words and children:
            raise BracketedTreeError(f"node {label} mixes words and subtrees")
        if words:
            if label in REJECT_TAGS:
                raise BracketedTreeError(
                    f"unsupported tag {label!r}: only noun-phrase trees are accepted")
            if label not in TREE_TAGS:
                raise BracketedTreeError(f"unsupported tag {label!r}")
            if len(words) > 1:
                raise BracketedTreeError(f"leaf {label} with multiple words")
            word = words[0].lower()
            lemma = _lemma_of(word, _lexicon()) if label == "NNS" else word
            token = Token(words[0], word, (0, 0))
            return ParseTree(label, leaf=TaggedToken(token, label, lemma))
        if label in REJECT_TAGS:
            raise BracketedTreeError(f"unsupported tag {label!r}")
        if label not in PHRASE_LABELS and label not in TREE_TAGS:
            raise BracketedTreeError(f"unsupported label {label!r}")
        return ParseTree(label, children)

    tree = read()
    if pos != len(tokens):
        raise BracketedTreeError("unbalanced brackets: trailing text")
    if tree.label != "ROOT":
        tree = ParseTree("ROOT", [tree])
    _respan(tree)
    tree.assign_positions()
    return tree


def _respan(tree):
    """Give imported leaves consistent character spans."""
    offset = 0
    for leaf_node in tree.leaves():
        word = leaf_node.leaf.token.text
        token = Token(word, leaf_node.leaf.token.normalized,
                      (offset, offset + len(word)))
        leaf_node.leaf = TaggedToken(token, leaf_node.leaf.tag,
                                     leaf_node.leaf.lemma, leaf_node.leaf.unknown)
        offset += len(word) + 1


# --- keyword extraction ----------------------------------------------------

def _is_coordination(node):
    return (node.label == "NP"
            and any(c.label == "CC" for c in node.children)
            and any(c.label == "NP" for c in node.children))


def _flatten_np(node, items):
    """Collect leaves, ADJP and PP children from an NP, descending through
    nested non-coordination NPs (Penn-style head nesting)."""
    for child in node.children:
        if child.label == "NP" and not _is_coordination(child):
            _flatten_np(child, items)
        else:
            items.append(child)


class _Extractor:
    def __init__(self):
        self.ks = KeywordSet()
        self._group = 0

    def new_group(self):
        self._group += 1
        return self._group

    def extract(self, tree):
        if not any(leaf.leaf.tag in NOUN_TAGS for leaf in tree.leaves()):
            raise QueryParseError("query has no noun to anchor on")
        top = [c for c in tree.children if c.label in ("NP", "PP")]
        if not top:
            raise QueryParseError("no noun phrase under the root")
        for node in top:
            self.analyze_np(node, parent=None)
        for t in tree.leaves():
            if t.leaf.tag == "PUNCT":
                self.ks.ignored.append((t.leaf.word, "punctuation"))
        return self.ks

    def analyze_np(self, node, parent):
        if _is_coordination(node):
            member_indices = []
            cc_words = []
            for child in node.children:
                if child.label == "CC":
                    cc_words.append(child.leaf.word)
                elif child.label == "NP":
                    member_indices.append(self.analyze_np(child, parent))
            for i in range(len(member_indices) - 1):
                word = cc_words[i] if i < len(cc_words) else cc_words[-1]
                self.ks.phrase_connectives.append(
                    (member_indices[i], member_indices[i + 1], word))
            if len(set(cc_words)) > 1:
                self.ks.mixed_connectives = True
            return member_indices[0]

        items = []
        _flatten_np(node, items)
        noun_leaves = [i for i in items if i.label in NOUN_TAGS]
        if not noun_leaves:
            raise QueryParseError("noun phrase without a noun leaf")
        head = noun_leaves[-1]
        keyword = Keyword(word=head.leaf.lemma, surface=head.leaf.word,
                          position=head.position, index=len(self.ks.keywords))
        self.ks.keywords.append(keyword)
        if parent is not None:
            self.ks.phrase_links.append((parent, keyword.index))
        if head.leaf.unknown:
            self.ks.warnings.append(f"unknown word {head.leaf.word!r} treated as noun")

        pps = []
        for item in items:
            if item is head:
                continue
            if item.label in NOUN_TAGS:
                # the rightmost noun is the keyword, nouns left of it its
                # constraints (noun-compound dependency)
                self.ks.constraints.append(Constraint(
                    target=keyword.index, word=item.leaf.lemma,
                    surface=item.leaf.word, group=self.new_group(),
                    connective=None, source="compound"))
                if item.leaf.unknown:
                    self.ks.warnings.append(
                        f"unknown word {item.leaf.word!r} treated as noun")
            elif item.label == "JJ":
                self.ks.constraints.append(Constraint(
                    target=keyword.index, word=item.leaf.word,
                    surface=item.leaf.word, group=self.new_group(),
                    connective=None, source="adjective"))
            elif item.label == "CD":
                self.ks.constraints.append(Constraint(
                    target=keyword.index, word=item.leaf.word,
                    surface=item.leaf.word, group=self.new_group(),
                    connective=None, source="cardinal"))
            elif item.label == "ADJP":
                group = self.new_group()
                cc_words = [c.leaf.word for c in item.children if c.label == "CC"]
                connective = cc_words[0] if cc_words else None
                if len(set(cc_words)) > 1:
                    self.ks.mixed_connectives = True
                for c in item.children:
                    if c.label == "JJ":
                        self.ks.constraints.append(Constraint(
                            target=keyword.index, word=c.leaf.word,
                            surface=c.leaf.word, group=group,
                            connective=connective, source="adjective"))
            elif item.label == "DT":
                self.ks.ignored.append((item.leaf.word, "determiner"))
            elif item.label == "PP":
                pps.append(item)
            elif item.label == "IN":
                pass
            else:
                self.ks.ignored.append(
                    (item.leaf.word if item.is_leaf() else item.label, "unused"))
        for pp in pps:
            inner = [c for c in pp.children if c.label == "NP"]
            for np_node in inner:
                self.analyze_np(np_node, parent=keyword.index)
        self.ks.order.append(keyword.index)
        return keyword.index


def extract_keywords(tree):
    """Keywords, constraints and their application order from a parse tree.

    The application sequence is the inversion of the recursive analysis
    order: the innermost phrase's keyword comes first, the outermost last.
    """
    extractor = _Extractor()
    ks = extractor.extract(tree)
    # order was appended leaf-first within each branch already; keep as is
    return ks


def extract_from_text(text):
    tagged = tag(tokenize(text))
    ks = extract_keywords(parse_query(tagged))
    for word in unknown_words(tagged):
        note = f"unknown word {word!r} treated as noun"
        if note not in ks.warnings:
            ks.warnings.append(note)
    return ks


def coverage(tree, ks):
    """Account for every token: keyword, constraint, function word, or
    explicitly ignored. Returns a list of (word, role)."""
    roles = []
    keyword_positions = {k.position for k in ks.keywords}
    constraint_words = {}
    for c in ks.constraints:
        constraint_words.setdefault(c.surface, 0)
        constraint_words[c.surface] += 1
    for leaf_node in tree.leaves():
        tagged = leaf_node.leaf
        if leaf_node.position in keyword_positions:
            roles.append((tagged.word, "keyword"))
        elif tagged.tag in ("IN", "CC"):
            roles.append((tagged.word, "function"))
        elif tagged.tag == "DT":
            roles.append((tagged.word, "determiner"))
        elif constraint_words.get(tagged.word, 0) > 0:
            constraint_words[tagged.word] -= 1
            roles.append((tagged.word, "constraint"))
        elif tagged.tag == "PUNCT":
            roles.append((tagged.word, "ignored"))
        else:
            roles.append((tagged.word, "unaccounted"))
    return roles
