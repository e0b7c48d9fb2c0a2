"""From a sentence to keywords, constraints, and their application order."""

from askbim import extract_keywords, load_bracketed_tree, parse_text

for sentence in ["quantity of beams of second and third storey",
                 "construction progress of the check-in zone",
                 "beams and columns"]:
    print(f"\n{sentence!r}")
    tree = parse_text(sentence)
    print("  tree:", tree.pretty())
    ks = extract_keywords(tree)
    print("  keywords:", ks.keyword_words())
    for c in ks.constraints:
        conn = f" ({c.connective})" if c.connective else ""
        print(f"  constraint: {ks.keywords[c.target].word} <- {c.word}"
              f" [{c.source}]{conn}")
    print("  application order:", [ks.keywords[i].word for i in ks.order])
    if ks.phrase_connectives:
        print("  coordination:", [(ks.keywords[a].word, w, ks.keywords[b].word)
                                  for a, b, w in ks.phrase_connectives])

# an externally parsed tree goes through the same extraction
imported = load_bracketed_tree(
    "(ROOT (NP (NP (NN quantity)) (PP (IN of) (NP (NNS beams)))))")
print("\nimported bracketed tree ->",
      extract_keywords(imported).keyword_words())

try:
    parse_text("show me beams")
except Exception as exc:
    print("\nrejected:", exc)
