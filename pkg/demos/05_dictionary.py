"""Concept dictionary: synonyms, word forms, bindings, and the rule table."""

from askbim.dictionary import Dictionary
from askbim.errors import ConceptNotFoundError

d = Dictionary.load_seed()
print(f"seed dictionary: {len(d)} concepts")

for word in ["girder", "beams", "Beam", "storey", "floors", "zone", "mass"]:
    concept = d.resolve_concept(word)
    binding = concept.ifc_binding
    print(f"  {word:<8} -> {concept.preferred_name:<9} "
          f"guid {concept.guid}  binding {binding.entity if binding else None}")

print("\nnormalize is idempotent:", d.normalize("beams"), "->",
      d.normalize(d.normalize("beams")))

quantity = d.resolve_concept("quantity")
for context in [{"material": "steel"}, {"material": "concrete"},
                {"material": "metal"}, {"no_quantity_instances": True}, {}]:
    print(f"  quantity with {context} -> "
          f"{d.map_to_schema(quantity, context).entity}")

beam = d.resolve_concept("beam")
print("\nvalue constraints resolve to properties:")
for value in ["concrete", "second", "xyzzy"]:
    print(f"  (beam, {value!r}) -> {d.find_property_for_value(beam, value).preferred_name}")

try:
    d.resolve_concept("beem")
except ConceptNotFoundError as exc:
    print("\nunknown word:", exc)
