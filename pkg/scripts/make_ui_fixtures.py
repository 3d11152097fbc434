"""Regenerate the frontend's shared fixtures.

- act_vectors.json: candidate acts with the violation codes the backend
  grammar assigns, so the client-side mirror can be property-tested against
  the same vectors.
- cube_mesh.json: the cube fixture exactly as GET /documents/{id}/mesh
  serves it.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from meshreview.acts import validate_act  # noqa: E402
from meshreview.codec import force_to_json  # noqa: E402
from meshreview.geometry import MeshFormat, load_mesh  # noqa: E402
from test_acts import random_candidate  # noqa: E402

OUT = ROOT / "frontend" / "tests" / "fixtures"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(0xF00D)
    vectors = []
    for i in range(400):
        force, utterance, refs = random_candidate(rng, force_valid=i % 2 == 0)
        vectors.append(
            {
                "force": force_to_json(force),
                "utterance": {"text": utterance.text, "content_kind": utterance.content_kind.value},
                "references": [[k.value, r.value] for k, r in refs],
                "violations": list(validate_act(force, utterance, refs).violations),
            }
        )
    (OUT / "act_vectors.json").write_text(json.dumps(vectors, indent=2) + "\n")

    cube = load_mesh((ROOT / "tests" / "fixtures" / "cube.obj").read_bytes(), MeshFormat.OBJ)
    payload = {
        "document": "fixture-cube",
        "revision": 1,
        "content_hash": cube.content_hash.hex(),
        "vertices": cube.vertices.tolist(),
        "faces": cube.faces.tolist(),
    }
    (OUT / "cube_mesh.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {OUT / 'act_vectors.json'} ({len(vectors)} vectors) and cube_mesh.json")


if __name__ == "__main__":
    main()
