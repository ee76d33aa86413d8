#!/usr/bin/env python3
"""Validate the shipped JSON inputs against schema/*.schema.json."""

import json
import sys
from pathlib import Path

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent
schemas = {p.name: json.loads(p.read_text()) for p in (root / "schema").glob("*.schema.json")}
registry = Registry().with_resources(
    (name, Resource.from_contents(s)) for name, s in schemas.items()
)

checks = [("materials.schema.json", root / "data" / "materials.json")]
checks += [("scenario.schema.json", p) for p in sorted((root / "scenarios").glob("*.json"))]
checks += [
    ("distribution.schema.json", p)
    for p in sorted((root / "scenarios" / "distributions").glob("*.json"))
]

failures = 0
for schema_name, path in checks:
    validator = Draft202012Validator(schemas[schema_name], registry=registry)
    errors = list(validator.iter_errors(json.loads(path.read_text())))
    for e in errors:
        print(f"{path.relative_to(root)}: {'/' + '/'.join(map(str, e.path))}: {e.message}")
    failures += bool(errors)
print(f"{len(checks) - failures} of {len(checks)} files valid")
sys.exit(1 if failures else 0)
