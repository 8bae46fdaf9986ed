#!/usr/bin/env python3
"""Validate preset documents against schema/config.schema.json."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(__file__).resolve().parent.parent
schema = json.loads((root / "schema" / "config.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

failed = 0
paths = [pathlib.Path(p) for p in sys.argv[1:]] or sorted((root / "presets").glob("*.json"))
for path in paths:
    errors = sorted(validator.iter_errors(json.loads(path.read_text())), key=lambda e: list(e.path))
    for e in errors:
        print(f"{path.name}: {'.'.join(map(str, e.path)) or '<root>'}: {e.message}")
    failed += bool(errors)
    if not errors:
        print(f"{path.name}: ok")
sys.exit(1 if failed else 0)
