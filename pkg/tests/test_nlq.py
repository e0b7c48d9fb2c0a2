import pytest

from askbim import nlq
from askbim.errors import (BracketedTreeError, QueryParseError,
                           UnsupportedSentenceError)
from conftest import DATA

BEAM_QUANTITY_Q = "quantity of beams of second and third storey"
PROGRESS_Q = "construction progress of the check-in zone"


def corpus_pairs():
    sentences = (DATA / "corpus.txt").read_text().splitlines()
    trees = (DATA / "corpus_trees.txt").read_text().splitlines()
    assert len(sentences) == len(trees) >= 20
    return list(zip(sentences, trees))


# --- tokenize ---------------------------------------------------------------

def test_tokenize_keeps_internal_hyphens():
    tokens = nlq.tokenize(PROGRESS_Q)
    assert [t.text for t in tokens] == \
        ["construction", "progress", "of", "the", "check-in", "zone"]


def test_tokenize_single_word():
    tokens = nlq.tokenize("beams")
    assert len(tokens) == 1 and tokens[0].normalized == "beams"


def test_tokenize_whitespace_collapse():
    text = "  quantity   of beams "
    tokens = nlq.tokenize(text)
    assert [t.text for t in tokens] == ["quantity", "of", "beams"]
    spans = [t.span for t in tokens]
    assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))
    # spans point back into the original text
    assert all(text[s:e] == t.text for t, (s, e) in zip(tokens, spans))


def test_tokenize_rejects_blank():
    with pytest.raises(QueryParseError):
        nlq.tokenize("   ")


def test_tokenize_splits_punctuation():
    tokens = nlq.tokenize("beams, columns?")
    assert [t.text for t in tokens] == ["beams", ",", "columns", "?"]


# --- tag ---------------------------------------------------------------------

def test_tag_lexicon_and_parts():
    tagged = nlq.tag(nlq.tokenize("beams of and"))
    assert [t.tag for t in tagged] == ["NNS", "IN", "CC"]
    assert tagged[0].lemma == "beam"


def test_tag_ordinals_are_adjectives():
    tagged = nlq.tag(nlq.tokenize("second third"))
    assert [t.tag for t in tagged] == ["JJ", "JJ"]


def test_tag_unknown_word_warns():
    tagged = nlq.tag(nlq.tokenize("zorkmid"))
    assert tagged[0].tag == "NN" and tagged[0].unknown
    assert nlq.unknown_words(tagged) == ["zorkmid"]


def test_tag_plural_fallback_for_known_noun():
    # 'trusses' is not in the lexicon as its own entry shape; the -es rule
    # must still find the stem
    tagged = nlq.tag(nlq.tokenize("trusses"))
    assert tagged[0].tag == "NNS" and tagged[0].lemma == "truss"


def test_tag_numbers_are_cd():
    tagged = nlq.tag(nlq.tokenize("level 2"))
    assert tagged[1].tag == "CD"


# --- parse --------------------------------------------------------------------

def test_parse_nested_pp_structure():
    tree = nlq.parse_text(BEAM_QUANTITY_Q)
    assert tree.pretty() == (
        "(ROOT (NP (NN quantity) (PP (IN of) (NP (NNS beams) (PP (IN of) "
        "(NP (ADJP (JJ second) (CC and) (JJ third)) (NN storey)))))))")


def test_parse_single_noun():
    tree = nlq.parse_text("beams")
    assert tree.pretty() == "(ROOT (NP (NNS beams)))"


def test_parse_rejects_verbs():
    with pytest.raises(UnsupportedSentenceError) as err:
        nlq.parse_text("show me beams")
    assert "show" in str(err.value)


def test_parse_rejects_pronouns():
    with pytest.raises(UnsupportedSentenceError):
        nlq.parse_text("beams of my building")


def test_parse_error_names_offending_token():
    with pytest.raises(QueryParseError) as err:
        nlq.parse_text("of beams")
    assert "of" in str(err.value)


def test_parse_deterministic():
    assert nlq.parse_text(BEAM_QUANTITY_Q).pretty() == nlq.parse_text(BEAM_QUANTITY_Q).pretty()


# --- bracketed import ------------------------------------------------------------

def test_bracketed_single_keyword():
    tree = nlq.load_bracketed_tree("(NP (NN beam))")
    ks = nlq.extract_keywords(tree)
    assert ks.keyword_words() == ["beam"]
    assert ks.constraints == []


def test_bracketed_unsupported_tag():
    with pytest.raises(BracketedTreeError):
        nlq.load_bracketed_tree("(NP (VB run))")


def test_bracketed_nnp_mapped_to_nn():
    tree = nlq.load_bracketed_tree("(NP (NNP Beam))")
    assert tree.leaves()[0].leaf.tag == "NN"


def test_bracketed_unbalanced():
    with pytest.raises(BracketedTreeError):
        nlq.load_bracketed_tree("(NP (NN beam)")
    with pytest.raises(BracketedTreeError):
        nlq.load_bracketed_tree("(NP (NN beam)))")


# --- extraction ---------------------------------------------------------------

def signature(ks):
    kws = tuple(k.word for k in ks.keywords)
    cons = tuple(sorted((ks.keywords[c.target].word, c.word, c.connective or "")
                        for c in ks.constraints))
    order = tuple(ks.keywords[i].word for i in ks.order)
    links = tuple(sorted((ks.keywords[p].word, ks.keywords[c].word)
                         for p, c in ks.phrase_links))
    coords = tuple(sorted((ks.keywords[a].word, ks.keywords[b].word, w)
                          for a, b, w in ks.phrase_connectives))
    return kws, cons, order, links, coords


def test_extract_beam_quantity_sentence():
    ks = nlq.extract_from_text(BEAM_QUANTITY_Q)
    assert ks.keyword_words() == ["quantity", "beam", "storey"]
    assert [ks.keywords[i].word for i in ks.order] == ["storey", "beam", "quantity"]
    storey_cons = ks.constraints_for(2)
    assert sorted(c.word for c in storey_cons) == ["second", "third"]
    assert {c.connective for c in storey_cons} == {"and"}
    assert len({c.group for c in storey_cons}) == 1


def test_extract_noun_compound_sentence():
    ks = nlq.extract_from_text(PROGRESS_Q)
    assert ks.keyword_words() == ["progress", "zone"]
    cons = {(ks.keywords[c.target].word, c.word, c.source) for c in ks.constraints}
    assert ("progress", "construction", "compound") in cons
    assert ("zone", "check-in", "compound") in cons


def test_extract_single_keyword_no_constraints():
    ks = nlq.extract_from_text("beams")
    assert ks.keyword_words() == ["beam"]
    assert ks.constraints == []


def test_extract_coordination_records_connective():
    ks = nlq.extract_from_text("beams and columns")
    assert ks.keyword_words() == ["beam", "column"]
    assert ks.phrase_connectives == [(0, 1, "and")]


def test_extract_no_noun_rejected():
    with pytest.raises(QueryParseError):
        nlq.extract_keywords(nlq.load_bracketed_tree("(ROOT (ADJP (JJ second)))"))


def test_keyword_positions_are_noun_leaves():
    ks = nlq.extract_from_text(BEAM_QUANTITY_Q)
    tree = nlq.parse_text(BEAM_QUANTITY_Q)
    by_position = {leaf.position: leaf for leaf in tree.leaves()}
    for kw in ks.keywords:
        leaf = by_position[kw.position]
        assert leaf.leaf.tag in ("NN", "NNS")


def test_every_constraint_targets_existing_keyword():
    for sentence, _ in corpus_pairs():
        ks = nlq.extract_from_text(sentence)
        for c in ks.constraints:
            assert 0 <= c.target < len(ks.keywords)
        assert sorted(ks.order) == list(range(len(ks.keywords)))


def test_front_end_equivalence_over_corpus():
    for sentence, treetext in corpus_pairs():
        internal = nlq.extract_keywords(nlq.parse_text(sentence))
        imported = nlq.extract_keywords(nlq.load_bracketed_tree(treetext))
        assert signature(internal) == signature(imported), sentence


def test_extraction_deterministic():
    for sentence, _ in corpus_pairs():
        a = signature(nlq.extract_from_text(sentence))
        b = signature(nlq.extract_from_text(sentence))
        assert a == b


def test_token_coverage_no_silent_drops():
    for sentence, _ in corpus_pairs():
        tree = nlq.parse_text(sentence)
        ks = nlq.extract_keywords(tree)
        roles = nlq.coverage(tree, ks)
        unaccounted = [w for w, role in roles if role == "unaccounted"]
        assert unaccounted == [], (sentence, roles)


def test_mixed_connectives_flagged():
    ks = nlq.extract_from_text("beams and columns or walls")
    assert ks.mixed_connectives
