"""The whole pipeline: sentence in, rendered answer out."""

from pathlib import Path

from askbim.pipeline import Engine

MODELS = Path(__file__).parent.parent / "src" / "askbim" / "data" / "models"

two_storey = Engine.from_file(MODELS / "two_storey.ifc")
airport = Engine.from_file(MODELS / "airport_wing.ifc")

for engine, question in [
        (two_storey, "quantity of beams of second and third storey"),
        (airport, "construction progress of the check-in zone"),
        (airport, "quantity of steel columns of the check-in zone")]:
    response = engine.query(question)
    print("=" * 72)
    print(engine.render(response))
    print(f"keywords: {response.keywords['order']}")
    print(f"anchors:  {response.plan['anchors']}")
    print(f"accesses: {response.result['provenance']['accesses']}"
          f"  (hops: {response.result['provenance']['hops']})")

print("=" * 72)
prejoined = two_storey.query("beams of second and third storey",
                             use_prejoin=True)
print("with pre-join:", prejoined.result["provenance"]["hops"])
