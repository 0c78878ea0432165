"""Semantic tokens: the server-side mirror, enrichment, hover, templates.

The editor sends text (or change lists) to a mirror; the server answers
with token groups, one group per clause or directive, each token tagged
with a semantic class from cross-reference analysis.
"""

from logicdesk.highlight import (
    MirrorRegistry,
    enriched_tokens,
    hover_info,
    templates,
    update_mirror,
)

TEXT = """\
% a tiny program
p(1).
q(X) :- p(X), member(X, [1,2]), mystery(X).
"""

registry = MirrorRegistry()
generation = update_mirror(registry, "demo-doc", {"text": TEXT})
print("mirror generation:", generation)

generation, groups = enriched_tokens(registry, "demo-doc")
for i, group in enumerate(groups):
    print(f"group {i}:")
    for tok in group:
        tag = f"  [{tok.cls}{'/' + tok.origin if tok.origin else ''}]" if tok.cls else ""
        print(f"   {tok.token.kind:<13} {tok.token.text!r}{tag}")

print()
print("an incremental update (patch, not full text):")
generation = update_mirror(
    registry,
    "demo-doc",
    {"changes": [{"from": TEXT.index("mystery"), "to": TEXT.index("mystery") + 7, "insert": "p"}],
     "generation": generation},
)
print("  new generation:", generation)
_, groups = enriched_tokens(registry, "demo-doc")
last = [t for t in groups[-1] if t.token.text == "p"]
print("  'p' is now classified:", last[-1].cls)

print()
offset = TEXT.index("member")
print("hover over member/2:", hover_info(registry, "demo-doc", offset))
print("templates for 'atom_':")
for t in templates("atom_"):
    print("  ", t)
